#pragma once

// Homogeneous Besov and Triebel-Lizorkin norm estimators driven by the
// Poisson-type profiles P_{t,m} f:
//   besov: ( int_0^inf ( t^{-sigma} || P_{t,m} f ||_p )^q dt/t )^{1/q}
//   t-l:   || ( int_0^inf | t^{-sigma} P_{t,m} f |^q dt/t )^{1/q} ||_p
// p or q = infinity turns the corresponding integral into a max over nodes
// (with a local golden-section refinement along t). The 0 < p,q < 1 regime
// is plain quadrature of |.|^p; no triangle inequality is used anywhere.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "lagspaces/numerics.hpp"
#include "lagspaces/spectral.hpp"

namespace lagspaces::spaces {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

namespace detail {

/// Values of every entry's basis function on the grid plus shell data;
/// evaluating P_{t,m} f on all nodes is then one pass per t.
struct FieldTable {
    std::vector<double> coeff;
    std::vector<double> lambda;          // per entry
    std::vector<std::vector<double>> phi;  // per entry, per node
    std::vector<double> weights;
    std::size_t n_nodes = 0;

    FieldTable(const spectral::CoeffField& f, const numerics::QuadGrid& g) {
        n_nodes = g.total_nodes();
        int K = std::max(f.degree(), 0);
        spectral::BasisTable basis(f.alpha(), K, g);
        weights.reserve(n_nodes);
        g.for_each_node([&](const Point&, std::span<const std::size_t>, double w) {
            weights.push_back(w);
        });
        for (const auto& e : f.entries()) {
            coeff.push_back(e.c);
            lambda.push_back(spectral::eigenvalue(e.k.length(), f.alpha(), f.dim()));
            std::vector<double> vals(n_nodes);
            std::size_t flat = 0;
            g.for_each_node([&](const Point&, std::span<const std::size_t> node, double) {
                vals[flat++] = basis.phi(e.k, node);
            });
            phi.push_back(std::move(vals));
        }
    }

    /// P_{t,m} f on all nodes.
    void profile(double t, int m, std::vector<double>& out) const {
        out.assign(n_nodes, 0.0);
        for (std::size_t e = 0; e < coeff.size(); ++e) {
            double u = t * std::sqrt(lambda[e]);
            double theta = std::pow(u, m) * std::exp(-u) * coeff[e];
            const auto& row = phi[e];
            for (std::size_t i = 0; i < n_nodes; ++i) out[i] += theta * row[i];
        }
    }

    double lambda_min() const {
        double v = infinity;
        for (double l : lambda) v = std::min(v, l);
        return v;
    }
};

inline double lp_norm(std::span<const double> vals, std::span<const double> weights, double p) {
    if (p == infinity) {
        double mx = 0.0;
        for (double v : vals) mx = std::max(mx, std::abs(v));
        return mx;
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < vals.size(); ++i)
        s.add(weights[i] * std::pow(std::abs(vals[i]), p));
    return std::pow(s.value(), 1.0 / p);
}

/// Golden-section maximization around the best grid node of a smooth
/// positive profile; still a max over sampled t's.
template <typename Fn>
double refined_sup(Fn&& v, const numerics::TGrid& tg) {
    auto nodes = tg.nodes();
    double best = 0.0;
    std::size_t best_i = 0;
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        vals[i] = v(nodes[i]);
        if (vals[i] > best) {
            best = vals[i];
            best_i = i;
        }
    }
    double lo = best_i == 0 ? nodes.front() * 0.5 : nodes[best_i - 1];
    double hi = best_i + 1 == nodes.size() ? nodes.back() * 2.0 : nodes[best_i + 1];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = v(c), fd = v(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = v(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = v(d);
        }
    }
    return std::max({best, fc, fd});
}

/// Envelope constants for h(t) = (t^{-sigma} ||P_{t,m}f||_p)^q: near zero
/// |h| <= (A t^{m-sigma})^q, at infinity |h| <= cinf e^{-q sqrt(lam_min) t / 2}.
inline numerics::TailEnvelope profile_envelope(double A, double lam_min, double sigma, int m,
                                               double q, double t_hi) {
    numerics::TailEnvelope env;
    env.power_at_zero = (m - sigma) * q;
    env.c0 = std::pow(A, q);
    double rate_half = 0.5 * q * std::sqrt(lam_min);
    env.exp_rate = rate_half;
    double t_star = std::max(t_hi, 2.0 * (m - sigma) / std::sqrt(lam_min));
    env.cinf = std::pow(A * std::pow(t_star, m - sigma), q) * std::exp(-rate_half * t_star);
    return env;
}

}  // namespace detail

struct NormOptions {
    bool override_regime = false;  // explore outside the admissible range
    double* tail_bound = nullptr;  // optional: receive the t-tail bound
};

/// Besov-type norm. Requires m > m_0 and a space-admissible alpha unless
/// overridden.
inline double besov_norm(const spectral::CoeffField& f, const spectral::SpaceParams& P,
                         const numerics::TGrid& tg, const numerics::QuadGrid& xg,
                         const NormOptions& opt = {}) {
    if (!opt.override_regime) {
        if (!P.norm_admissible())
            throw refusal_error("besov_norm: m <= m_0 for these (sigma, p, q, d)");
        if (!f.alpha().is_space_admissible())
            throw refusal_error("besov_norm: alpha outside the admissible set");
    }
    if (f.empty()) {
        if (opt.tail_bound) *opt.tail_bound = 0.0;
        return 0.0;
    }
    detail::FieldTable table(f, xg);
    // fresh buffer per evaluation: t_integrate may run nodes in parallel
    auto v = [&](double t) {
        std::vector<double> profile;
        table.profile(t, P.m, profile);
        return std::pow(t, -P.sigma) * detail::lp_norm(profile, table.weights, P.p);
    };
    if (P.q == infinity) {
        if (opt.tail_bound) *opt.tail_bound = 0.0;
        return detail::refined_sup(v, tg);
    }
    // envelope constant A = sum |c_k| lam^{m/2} ||phi_k||_p
    double A = 0.0;
    for (std::size_t e = 0; e < table.coeff.size(); ++e)
        A += std::abs(table.coeff[e]) * std::pow(table.lambda[e], 0.5 * P.m) *
             detail::lp_norm(table.phi[e], table.weights, P.p);
    auto env = detail::profile_envelope(A, table.lambda_min(), P.sigma, P.m, P.q, tg.t_hi());
    auto r = numerics::t_integrate([&](double t) { return std::pow(v(t), P.q); }, tg, env);
    if (opt.tail_bound) *opt.tail_bound = r.tail_bound;
    return std::pow(r.value, 1.0 / P.q);
}

/// Triebel-Lizorkin-type norm; p = infinity is outside the family.
inline double tl_norm(const spectral::CoeffField& f, const spectral::SpaceParams& P,
                      const numerics::TGrid& tg, const numerics::QuadGrid& xg,
                      const NormOptions& opt = {}) {
    if (P.p == infinity) throw refusal_error("tl_norm: p = infinity is not defined");
    if (!opt.override_regime) {
        if (!P.norm_admissible())
            throw refusal_error("tl_norm: m <= m_0 for these (sigma, p, q, d)");
        if (!f.alpha().is_space_admissible())
            throw refusal_error("tl_norm: alpha outside the admissible set");
    }
    if (f.empty()) return 0.0;
    detail::FieldTable table(f, xg);
    std::size_t n = table.n_nodes;

    std::vector<double> w_of_x(n, 0.0);
    if (P.q == infinity) {
        // pointwise sup over t, refined around the best node per point
        parallel_for(n, [&](std::size_t i) {
            auto vi = [&](double t) {
                double u = 0.0;
                for (std::size_t e = 0; e < table.coeff.size(); ++e) {
                    double arg = t * std::sqrt(table.lambda[e]);
                    u += std::pow(arg, P.m) * std::exp(-arg) * table.coeff[e] * table.phi[e][i];
                }
                return std::pow(t, -P.sigma) * std::abs(u);
            };
            w_of_x[i] = detail::refined_sup(vi, tg);
        });
    } else {
        std::vector<double> profile;
        auto nodes = tg.nodes();
        auto weights = tg.weights();
        std::vector<double> acc(n, 0.0), comp(n, 0.0);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            table.profile(nodes[j], P.m, profile);
            double tf = std::pow(nodes[j], -P.sigma);
            for (std::size_t i = 0; i < n; ++i) {
                // Neumaier update per point, fixed t order
                double x = weights[j] * std::pow(tf * std::abs(profile[i]), P.q);
                double s = acc[i] + x;
                comp[i] += std::abs(acc[i]) >= std::abs(x) ? (acc[i] - s) + x : (x - s) + acc[i];
                acc[i] = s;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            w_of_x[i] = std::pow(acc[i] + comp[i], 1.0 / P.q);
    }
    return detail::lp_norm(w_of_x, table.weights, P.p);
}

struct RatioTable {
    std::vector<double> ratios;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double spread() const { return min_ratio > 0.0 ? max_ratio / min_ratio : infinity; }
};

namespace detail {

inline RatioTable make_table(std::vector<double> ratios) {
    RatioTable t;
    t.ratios = std::move(ratios);
    if (!t.ratios.empty()) {
        t.min_ratio = *std::min_element(t.ratios.begin(), t.ratios.end());
        t.max_ratio = *std::max_element(t.ratios.begin(), t.ratios.end());
    }
    return t;
}

}  // namespace detail

/// Norm ratios between two admissible smoothing orders m1, m2 over a corpus.
inline RatioTable m_equivalence_check(std::span<const spectral::CoeffField> corpus,
                                      spectral::SpaceParams P, int m1, int m2,
                                      const numerics::TGrid& tg, const numerics::QuadGrid& xg) {
    spectral::SpaceParams P1 = P, P2 = P;
    P1.m = m1;
    P2.m = m2;
    if (!P1.norm_admissible() || !P2.norm_admissible())
        throw refusal_error("m_equivalence_check: both orders must exceed m_0");
    std::vector<double> ratios(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        ratios[i] = besov_norm(corpus[i], P1, tg, xg) / besov_norm(corpus[i], P2, tg, xg);
    return detail::make_table(std::move(ratios));
}

/// Ratios ||f||_target / ||f||_source for the two embedding hypotheses:
/// (i) same (sigma, p), q_source <= q_target; (ii) same q, sigma_source >=
/// sigma_target and sigma - d/p matched.
inline RatioTable embedding_check(std::span<const spectral::CoeffField> corpus,
                                  const spectral::SpaceParams& source,
                                  const spectral::SpaceParams& target,
                                  const numerics::TGrid& tg, const numerics::QuadGrid& xg) {
    bool case_i = source.sigma == target.sigma && source.p == target.p && source.q <= target.q;
    bool case_ii = source.q == target.q && source.sigma >= target.sigma &&
                   std::abs((source.sigma - source.d / source.p) -
                            (target.sigma - target.d / target.p)) < 1e-12;
    if (!case_i && !case_ii)
        throw refusal_error("embedding_check: hypotheses of neither embedding case hold");
    std::vector<double> ratios(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        double src = besov_norm(corpus[i], source, tg, xg);
        double tgt = besov_norm(corpus[i], target, tg, xg);
        ratios[i] = src == 0.0 ? 0.0 : tgt / src;
    }
    return detail::make_table(std::move(ratios));
}

/// Closed form for the t-integral of a single basis field: the norm is
/// ||phi_k||_p lambda^{sigma/2} Gamma((m-sigma)q)^{1/q} / q^{m-sigma}, and
/// lambda^{sigma/2} (m-sigma)^{m-sigma} e^{-(m-sigma)} at q = infinity.
inline double single_field_t_factor(double lambda, const spectral::SpaceParams& P) {
    double a = P.m - P.sigma;
    if (P.q == infinity) return std::pow(lambda, 0.5 * P.sigma) * std::pow(a, a) * std::exp(-a);
    return std::pow(lambda, 0.5 * P.sigma) *
           std::pow(std::tgamma(a * P.q), 1.0 / P.q) / std::pow(P.q, a);
}

}  // namespace lagspaces::spaces
