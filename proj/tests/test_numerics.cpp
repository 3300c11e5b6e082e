#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "lagspaces/numerics.hpp"
#include "lagspaces/specfun.hpp"

using namespace lagspaces;
using namespace lagspaces::numerics;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gauss_legendre weights integrate polynomials exactly") {
    std::vector<double> n8, w8;
    gauss_legendre(8, n8, w8);
    double sum = 0.0, x6 = 0.0;
    for (int i = 0; i < 8; ++i) {
        sum += w8[static_cast<size_t>(i)];
        x6 += w8[static_cast<size_t>(i)] * std::pow(n8[static_cast<size_t>(i)], 6);
    }
    CHECK_THAT(sum, WithinAbs(2.0, 1e-14));
    CHECK_THAT(x6, WithinAbs(2.0 / 7.0, 1e-14));
}

TEST_CASE("QuadGrid axis weights are positive and sum to x_max") {
    for (double xmax : {3.0, 12.0, 20.0}) {
        auto g = QuadGrid::make(1, xmax);
        for (double w : g.axis().weights) CHECK(w > 0.0);
        CHECK_THAT(g.axis().weight_sum(), WithinAbs(xmax, 1e-12 * xmax));
    }
}

TEST_CASE("integrate: closed-form checks") {
    auto g1 = QuadGrid::make(1, 10.0);
    double gauss = integrate([](const Point& x) { return std::exp(-x[0] * x[0]); }, g1);
    CHECK_THAT(gauss, WithinAbs(0.5 * std::sqrt(std::numbers::pi), 1e-10));

    auto g2 = QuadGrid::make(2, 3.0);
    double box = integrate([](const Point&) { return 1.0; }, g2);
    CHECK_THAT(box, WithinAbs(9.0, 1e-11));

    // ||phi_0^{1/2}||_2 = 1
    auto g3 = QuadGrid::make(1, 12.0);
    double nrm = integrate(
        [&](const Point& x) {
            double v = specfun::phi_eval(MultiIndex{0}, AlphaIndex{0.5}, x);
            return v * v;
        },
        g3);
    CHECK_THAT(nrm, WithinAbs(1.0, 1e-8));

    CHECK_THROWS_AS(
        integrate([](const Point& x) { return 1.0 / (x[0] - x[0]); }, g1), quadrature_error);
}

TEST_CASE("inner_product orthonormality, both families") {
    auto g = QuadGrid::make(1, 12.0);
    AlphaIndex alpha{0.5};
    for (int j = 0; j <= 8; ++j) {
        for (int k = j; k <= 8; ++k) {
            double phi_ip = inner_product(
                [&](const Point& x) { return specfun::phi_eval(MultiIndex{j}, alpha, x); },
                [&](const Point& x) { return specfun::phi_eval(MultiIndex{k}, alpha, x); }, g);
            CHECK_THAT(phi_ip, WithinAbs(j == k ? 1.0 : 0.0, 1e-8));
            // convolution-type functions against the weight x^{2a+1}
            double ell_ip = integrate(
                [&](const Point& x) {
                    return specfun::ell_eval(MultiIndex{j}, alpha, x) *
                           specfun::ell_eval(MultiIndex{k}, alpha, x) *
                           std::pow(x[0], 2.0 * alpha[0] + 1.0);
                },
                g);
            CHECK_THAT(ell_ip, WithinAbs(j == k ? 1.0 : 0.0, 1e-8));
        }
    }
    // <f,f> >= 0
    double ff = inner_product([](const Point& x) { return std::sin(3.0 * x[0]); },
                              [](const Point& x) { return std::sin(3.0 * x[0]); }, g);
    CHECK(ff >= 0.0);
}

TEST_CASE("weighted orthonormality near the singular endpoint") {
    // alpha close to -1/2 stresses the graded panels: weight x^{2a+1} = x^{0.02}
    AlphaIndex alpha{-0.49};
    auto g = QuadGrid::make(1, 12.0);
    double ip = integrate(
        [&](const Point& x) {
            double v = specfun::ell_eval(MultiIndex{0}, alpha, x);
            return v * v * std::pow(x[0], 2.0 * alpha[0] + 1.0);
        },
        g);
    CHECK_THAT(ip, WithinAbs(1.0, 1e-8));
}

TEST_CASE("TGrid is exact on constants") {
    TGrid tg(-8, 8, 16);
    CHECK_THAT(tg.weight_sum(), WithinAbs(16.0 * std::numbers::ln2, 1e-12));
    TGrid one(0, 1, 16);
    auto r = t_integrate([](double) { return 1.0; }, one);
    CHECK_THAT(r.value, WithinAbs(std::numbers::ln2, 1e-14));
}

TEST_CASE("t_integrate closed forms") {
    TGrid tg(-40, 8, 16);
    SECTION("gamma integral") {
        // h(t) = (t sqrt(lam))^m e^{-2 t sqrt(lam)} integrates to Gamma(m)/2^m
        for (double lam : {1.0, 3.0, 14.0}) {
            for (int m : {1, 2, 4}) {
                double rl = std::sqrt(lam);
                TailEnvelope env{static_cast<double>(m), std::pow(rl, m), 2.0 * rl, 1e30};
                auto r = t_integrate(
                    [&](double t) { return std::pow(t * rl, m) * std::exp(-2.0 * t * rl); }, tg,
                    env);
                double expected = std::tgamma(m) / std::pow(2.0, m);
                CHECK_THAT(r.value, WithinRel(expected, 1e-9));
                CHECK(r.tail_bound < 1e-9 * expected);
            }
        }
    }
    SECTION("q-th power of the t-profile") {
        // h(t) = (t^{-sigma} (t sqrt(lam))^m e^{-t sqrt(lam)})^q
        double lam = 3.0, sigma = -1.0;
        int m = 3, q = 2;
        auto r = t_integrate(
            [&](double t) {
                double u = t * std::sqrt(lam);
                return std::pow(std::pow(t, -sigma) * std::pow(u, m) * std::exp(-u), q);
            },
            tg,
            TailEnvelope{(m - sigma) * q, std::pow(lam, 0.5 * m * q), q * std::sqrt(lam), 1e60});
        double expected = std::tgamma((m - sigma) * q) / std::pow(q, (m - sigma) * q) *
                          std::pow(lam, 0.5 * sigma * q);
        CHECK_THAT(r.value, WithinRel(expected, 1e-8));
    }
}

TEST_CASE("t_integrate tail policy") {
    TGrid tg(-2, 2, 12);
    // full-line semantics demanded, integrand has not decayed: refuse
    CHECK_THROWS_AS(t_integrate([](double) { return 1.0; }, tg, std::nullopt, TailPolicy::bound),
                    refusal_error);
    // decayed integrand passes without an envelope
    TGrid wide(-6, 6, 12);
    auto ok = t_integrate([](double t) { return std::exp(-5.0 * (t + 1.0 / t)); }, wide,
                          std::nullopt, TailPolicy::bound);
    CHECK(ok.value > 0.0);
    // truncation semantics never refuse
    auto trunc = t_integrate([](double) { return 1.0; }, tg);
    CHECK_THAT(trunc.value, WithinAbs(4.0 * std::numbers::ln2, 1e-13));
}

TEST_CASE("refinement changes resolved integrals far below tolerance") {
    auto coarse = QuadGrid::make(1, 10.0, 16);
    auto fine = QuadGrid::make(1, 10.0, 32);
    auto f = [](const Point& x) { return std::exp(-x[0] * x[0]) * std::cos(3.0 * x[0]); };
    double a = integrate(f, coarse), b = integrate(f, fine);
    CHECK_THAT(a, WithinAbs(b, 1e-12));
}

TEST_CASE("thread-count independence of reductions") {
    auto g = QuadGrid::make(2, 6.0, 12);
    auto f = [](const Point& x) {
        return std::exp(-x[0] * x[0] - 0.5 * x[1] * x[1]) + x[0] * x[1] * 1e-7;
    };
    runtime::set_thread_count(1);
    double v1 = integrate(f, g);
    runtime::set_thread_count(2);
    double v2 = integrate(f, g);
    runtime::set_thread_count(4);
    double v4 = integrate(f, g);
    runtime::set_thread_count(0);
    CHECK(v1 == v2);
    CHECK(v1 == v4);
}
