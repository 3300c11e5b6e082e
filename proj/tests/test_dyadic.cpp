#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lagspaces/dyadic.hpp"
#include "lagspaces/spectral.hpp"
#include "oracles.hpp"

using namespace lagspaces;
using namespace lagspaces::dyadic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("enumerate_cubes") {
    auto c1 = enumerate_cubes(0, 2.0, 1);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0].lo(0) == 0.0);
    CHECK(c1[0].hi(0) == 1.0);
    CHECK(c1[1].hi(0) == 2.0);

    auto c2 = enumerate_cubes(-1, 1.0, 2);
    CHECK(c2.size() == 4);
    for (const auto& q : c2) CHECK(q.side() == 0.5);

    // partition property: volumes add up to B^d
    double vol = 0.0;
    for (const auto& q : enumerate_cubes(-2, 3.0, 2)) vol += q.volume();
    CHECK_THAT(vol, WithinRel(9.0, 1e-12));

    // derived quantities
    DyadicCube q{1, {3}};
    CHECK(q.side() == 2.0);
    CHECK(q.center()[0] == 7.0);
    CHECK(q.contains(Point{7.9}));
    CHECK_FALSE(q.contains(Point{6.0}));  // half-open below
    CHECK(q.contains(Point{8.0}));
}

TEST_CASE("dyadic nesting: each cube splits into 2^d children") {
    for (int nu : {-1, 0, 2}) {
        for (const auto& q : enumerate_cubes(nu, 4.0, 2)) {
            int found = 0;
            for (const auto& child : enumerate_cubes(nu - 1, 4.0, 2)) {
                bool inside = true;
                for (int j = 0; j < 2; ++j)
                    inside = inside && child.lo(j) >= q.lo(j) - 1e-12 &&
                             child.hi(j) <= q.hi(j) + 1e-12;
                found += inside ? 1 : 0;
            }
            CHECK(found == 4);
        }
    }
}

TEST_CASE("CubeSet enumeration order") {
    CubeSet set{-1, 0, 2.0};
    auto cubes = set.cubes(1);
    REQUIRE(cubes.size() == 6);  // 4 at nu=-1, 2 at nu=0
    CHECK(cubes.front().nu == -1);
    CHECK(cubes.back().nu == 0);
    for (std::size_t i = 1; i < 4; ++i) CHECK(cubes[i].m[0] == cubes[i - 1].m[0] + 1);
}

TEST_CASE("maximal_operator on an indicator") {
    auto f = GridSamples::tabulate(1, 4.0, 256, [](const Point& x) { return x[0] <= 1.0 ? 1.0 : 0.0; });
    MaximalFamily family{-6, 3};
    CHECK_THAT(maximal_operator(f, 1.0, Point{0.5}, family), WithinRel(1.0, 1e-12));
    // best cube straddling the support: (0, 2] gives |Q cap (0,1]| / |Q| = 1/2
    CHECK_THAT(maximal_operator(f, 1.0, Point{2.0}, family), WithinRel(0.5, 1e-9));
    CHECK_THROWS_AS(maximal_operator(f, 1.0, Point{5.0}, family), std::domain_error);
}

TEST_CASE("maximal_operator dominates |f| and stays below the brute-force sup") {
    SplitMix64 rng(53);
    oracles::GridFunction1D raw;
    raw.h = 1.0 / 32.0;
    GridSamples f{1, 4.0, 128, {}};
    for (int i = 0; i < 128; ++i) {
        double v = rng.uniform(-1.0, 1.0);
        f.values.push_back(v);
        raw.samples.push_back(v);
    }
    MaximalFamily family{-7, 3};
    for (int i = 5; i < 128; i += 13) {
        Point x{(i + 0.5) * f.h()};
        double m = maximal_operator(f, 1.0, x, family);
        CHECK(m >= std::abs(f.values[static_cast<size_t>(i)]) - 1e-12);
        // family is a subset of all integer-endpoint cubes
        double brute = oracles::maximal_bruteforce_1d(raw, 1.0, i, 160);
        CHECK(m <= brute * (1.0 + 1e-9));
    }
}

TEST_CASE("maximal_operator is monotone in the family") {
    auto f = GridSamples::tabulate(1, 4.0, 128,
                                   [](const Point& x) { return std::exp(-lagspaces::sq(x[0] - 1.7)); });
    Point x{2.5};
    double small = maximal_operator(f, 2.0, x, MaximalFamily{-3, 0});
    double big = maximal_operator(f, 2.0, x, MaximalFamily{-5, 2});
    CHECK(big >= small);
}

TEST_CASE("fefferman_stein_check") {
    MaximalFamily family{-6, 2};
    SECTION("single indicator: ratio finite and bounded") {
        std::vector<GridSamples> fs{GridSamples::tabulate(
            1, 4.0, 128, [](const Point& x) { return x[0] <= 0.75 ? 1.0 : 0.0; })};
        auto rep = fefferman_stein_check(fs, 2.0, 2.0, 1.0, family);
        CHECK(rep.ratio > 1.0);  // maximal function dominates the function
        CHECK(rep.ratio < 6.0);
    }
    SECTION("all-zero family reports ratio 0") {
        std::vector<GridSamples> fs{GridSamples::tabulate(1, 4.0, 64, [](const Point&) { return 0.0; })};
        auto rep = fefferman_stein_check(fs, 2.0, 2.0, 1.0, family);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.rhs == 0.0);
        CHECK(rep.ratio == 0.0);
    }
    SECTION("ratio invariant under scaling") {
        auto base = GridSamples::tabulate(
            1, 4.0, 64, [](const Point& x) { return std::sin(2.0 * x[0]) + 0.3; });
        auto doubled = base;
        for (auto& v : doubled.values) v *= 2.0;
        std::vector<GridSamples> a{base}, b{doubled};
        auto ra = fefferman_stein_check(a, 2.0, 2.0, 1.0, family);
        auto rb = fefferman_stein_check(b, 2.0, 2.0, 1.0, family);
        CHECK_THAT(ra.ratio, WithinRel(rb.ratio, 1e-12));
    }
    SECTION("parameter violation refuses") {
        std::vector<GridSamples> fs{GridSamples::tabulate(1, 2.0, 32, [](const Point&) { return 1.0; })};
        CHECK_THROWS_AS(fefferman_stein_check(fs, 2.0, 2.0, 2.5, family), refusal_error);
    }
}

namespace {

// |(sqrt(L))^m e^{-t sqrt(L)} f(x)|^2 for a single-shell field
auto poisson_profile_sq(const spectral::CoeffField& f, int m) {
    return [f, m](const Point& x, double t) {
        CompensatedSum s;
        for (const auto& e : f.entries()) {
            double lam = spectral::eigenvalue(e.k.length(), f.alpha(), f.dim());
            s.add(std::pow(lam, 0.5 * m) * std::exp(-t * std::sqrt(lam)) * e.c *
                  specfun::phi_eval(e.k, f.alpha(), x));
        }
        return lagspaces::sq(s.value());
    };
}

}  // namespace

TEST_CASE("subharmonic mean-value check") {
    AlphaIndex alpha{0.5};
    spectral::CoeffField f(alpha, 1);
    f.set(MultiIndex{8}, 1.0);
    auto u = poisson_profile_sq(f, 2);

    SECTION("eigenfunction profile, cube away from the boundary") {
        SpaceTimeCube Q{Point{0.8}, 1.25, 1.0};
        auto rep = subharmonic_mean_check(u, Q, 2.0, 1.0, 12, 0.05);
        CHECK(rep.ok);
        auto rep2 = subharmonic_mean_check(u, Q, 2.0, 0.5, 12, 0.05);
        CHECK(rep2.ok);
    }
    SECTION("constant profile: equality within sampling error") {
        auto c = [](const Point&, double) { return 0.7; };
        SpaceTimeCube Q{Point{1.0}, 2.0, 1.0};
        auto rep = subharmonic_mean_check(c, Q, 1.5, 2.0, 8, 0.05);
        CHECK(rep.ok);
        CHECK_THAT(rep.sup_Q, WithinRel(rep.avg_muQ, 1e-12));
    }
    SECTION("cube straddling x = 0 via even reflection") {
        SpaceTimeCube Q{Point{-0.5}, 1.25, 1.0};
        auto rep = subharmonic_mean_check(u, Q, 2.0, 1.0, 12, 0.05);
        CHECK(rep.ok);
    }
    SECTION("geometry refusal") {
        SpaceTimeCube Q{Point{1.0}, 0.2, 1.0};  // closure of 2Q dips below t = 0
        CHECK_THROWS_AS(subharmonic_mean_check(u, Q, 2.0, 1.0, 8, 0.05), refusal_error);
        CHECK_THROWS_AS(subharmonic_mean_check(u, SpaceTimeCube{Point{1.0}, 2.0, 1.0}, 3.0, 1.0),
                        refusal_error);
    }
}

TEST_CASE("mean-value check refinement stability") {
    AlphaIndex alpha{0.5};
    spectral::CoeffField f(alpha, 1);
    f.set(MultiIndex{8}, 1.0);
    auto u = poisson_profile_sq(f, 2);
    SpaceTimeCube Q{Point{0.8}, 1.25, 1.0};
    auto coarse = subharmonic_mean_check(u, Q, 2.0, 1.0, 16);
    auto fine = subharmonic_mean_check(u, Q, 2.0, 1.0, 32);
    CHECK_THAT(coarse.avg_muQ, WithinRel(fine.avg_muQ, 0.10));
    CHECK(fine.ok);
}
