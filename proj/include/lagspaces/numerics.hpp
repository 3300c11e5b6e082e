#pragma once

// Quadrature on truncated boxes (0, x_max]^d and on the dyadic t-axis with
// measure dt/t. Reductions use compensated summation in a fixed order, so
// results are identical across runs and thread counts.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagspaces/common.hpp"

namespace lagspaces::numerics {

/// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<size_t>(n), 0.0);
    weights.assign(static_cast<size_t>(n), 0.0);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<size_t>(i)] = -x;
        nodes[static_cast<size_t>(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[static_cast<size_t>(i)] = w;
        weights[static_cast<size_t>(n - 1 - i)] = w;
    }
}

/// One quadrature axis: Gauss panels covering (0, x_max] without overlap.
struct QuadAxis {
    std::vector<double> nodes;
    std::vector<double> weights;

    double weight_sum() const {
        CompensatedSum s;
        for (double w : weights) s.add(w);
        return s.value();
    }
};

/// Tensor quadrature rule on (0, x_max]^d. Panels are geometric near 0
/// (ratio 1/2 down to 2^-20) so that weights x^{2a+1} with a near -1/2
/// integrate accurately, then uniform up to x_max.
class QuadGrid {
  public:
    /// Default rule: graded panels on (0,1], unit panels on [1, x_max].
    static QuadGrid make(int d, double x_max, int nodes_per_panel = 16, bool graded = true) {
        std::vector<double> breaks = panel_breaks(x_max, graded, 1.0);
        return QuadGrid(d, x_max, breaks, nodes_per_panel, graded);
    }

    /// Rule whose panel boundaries sit on multiples of `align` (plus a graded
    /// stack inside (0, align]); every panel then lies in exactly one dyadic
    /// cube of side >= align.
    static QuadGrid make_aligned(int d, double x_max, double align, int nodes_per_panel = 8) {
        std::vector<double> breaks = panel_breaks(x_max, true, align);
        return QuadGrid(d, x_max, breaks, nodes_per_panel, true);
    }

    int dim() const { return d_; }
    double x_max() const { return x_max_; }
    bool graded() const { return graded_; }
    const QuadAxis& axis() const { return axis_; }
    std::size_t axis_size() const { return axis_.nodes.size(); }
    std::size_t total_nodes() const {
        std::size_t n = 1;
        for (int i = 0; i < d_; ++i) n *= axis_size();
        return n;
    }

    /// Visit every tensor node in lexicographic axis-index order.
    /// fn(point, axis_indices, weight).
    template <typename Fn>
    void for_each_node(Fn&& fn) const {
        std::vector<std::size_t> idx(static_cast<size_t>(d_), 0);
        Point x(static_cast<size_t>(d_));
        std::size_t n_axis = axis_size();
        std::size_t total = total_nodes();
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            double w = 1.0;
            for (int i = d_ - 1; i >= 0; --i) {
                idx[static_cast<size_t>(i)] = rem % n_axis;
                rem /= n_axis;
                x[static_cast<size_t>(i)] = axis_.nodes[idx[static_cast<size_t>(i)]];
                w *= axis_.weights[idx[static_cast<size_t>(i)]];
            }
            fn(static_cast<const Point&>(x), std::span<const std::size_t>(idx), w);
        }
    }

  private:
    QuadGrid(int d, double x_max, const std::vector<double>& breaks, int nodes_per_panel,
             bool graded)
        : d_(d), x_max_(x_max), graded_(graded) {
        if (d < 1) throw std::domain_error("QuadGrid: dimension must be positive");
        std::vector<double> gl_nodes, gl_weights;
        gauss_legendre(nodes_per_panel, gl_nodes, gl_weights);
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            double a = breaks[p], b = breaks[p + 1];
            double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (int j = 0; j < nodes_per_panel; ++j) {
                axis_.nodes.push_back(mid + half * gl_nodes[static_cast<size_t>(j)]);
                axis_.weights.push_back(half * gl_weights[static_cast<size_t>(j)]);
            }
        }
    }

    static std::vector<double> panel_breaks(double x_max, bool graded, double unit) {
        if (!(x_max > 0.0)) throw std::domain_error("QuadGrid: x_max must be positive");
        std::vector<double> breaks;
        double head = std::min(unit, x_max);
        breaks.push_back(0.0);
        if (graded) {
            for (int j = 20; j >= 1; --j) breaks.push_back(head * std::ldexp(1.0, -j));
        }
        breaks.push_back(head);
        double x = head;
        while (x < x_max - 1e-12 * x_max) {
            x = std::min(x + unit, x_max);
            breaks.push_back(x);
        }
        return breaks;
    }

    int d_;
    double x_max_;
    bool graded_;
    QuadAxis axis_;
};

/// Tensor Gauss estimate of the integral of f over (0, x_max]^d.
/// Node evaluations may run in parallel; the reduction is a fixed-order
/// compensated sum over the lexicographic node list.
template <typename Fn>
double integrate(Fn&& f, const QuadGrid& g) {
    std::size_t total = g.total_nodes();
    std::vector<double> vals(total);
    std::size_t n_axis = g.axis_size();
    const auto& ax = g.axis();
    int d = g.dim();
    parallel_for(total, [&](std::size_t flat) {
        Point x(static_cast<size_t>(d));
        std::size_t rem = flat;
        double w = 1.0;
        for (int i = d - 1; i >= 0; --i) {
            std::size_t q = rem % n_axis;
            rem /= n_axis;
            x[static_cast<size_t>(i)] = ax.nodes[q];
            w *= ax.weights[q];
        }
        double v = f(static_cast<const Point&>(x));
        if (!std::isfinite(v)) {
            std::string where = "integrate: non-finite integrand at node (";
            for (int i = 0; i < d; ++i) where += (i ? ", " : "") + sig17(x[static_cast<size_t>(i)]);
            throw quadrature_error(where + ")");
        }
        vals[flat] = w * v;
    });
    CompensatedSum s;
    for (double v : vals) s.add(v);
    return s.value();
}

template <typename F, typename G>
double inner_product(F&& f, G&& g, const QuadGrid& grid) {
    return integrate([&](const Point& x) { return f(x) * g(x); }, grid);
}

/// Decay envelope for truncated dt/t integrals: |h(t)| <= c0 t^p0 for
/// t <= t_lo and |h(t)| <= cinf e^{-rate t} for t >= t_hi.
struct TailEnvelope {
    double power_at_zero = 0.0;
    double c0 = 0.0;
    double exp_rate = 0.0;
    double cinf = 0.0;
};

struct TIntegral {
    double value = 0.0;
    double tail_bound = 0.0;  // analytic bound on the mass outside the grid
};

/// Quadrature rule for integral over [2^{nu_min}, 2^{nu_max}] of h(t) dt/t:
/// Gauss nodes in log t, per octave.
class TGrid {
  public:
    TGrid(int nu_min, int nu_max, int nodes_per_octave = 16)
        : nu_min_(nu_min), nu_max_(nu_max) {
        if (nu_min >= nu_max) throw std::domain_error("TGrid: requires nu_min < nu_max");
        std::vector<double> gl_nodes, gl_weights;
        gauss_legendre(nodes_per_octave, gl_nodes, gl_weights);
        for (int nu = nu_min; nu < nu_max; ++nu) {
            double s0 = nu * std::numbers::ln2, s1 = (nu + 1) * std::numbers::ln2;
            double half = 0.5 * (s1 - s0), mid = 0.5 * (s0 + s1);
            for (int j = 0; j < nodes_per_octave; ++j) {
                nodes_.push_back(std::exp(mid + half * gl_nodes[static_cast<size_t>(j)]));
                weights_.push_back(half * gl_weights[static_cast<size_t>(j)]);
            }
        }
    }

    int nu_min() const { return nu_min_; }
    int nu_max() const { return nu_max_; }
    double t_lo() const { return std::ldexp(1.0, nu_min_); }
    double t_hi() const { return std::ldexp(1.0, nu_max_); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    double weight_sum() const {
        CompensatedSum s;
        for (double w : weights_) s.add(w);
        return s.value();
    }

  private:
    int nu_min_, nu_max_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// With `truncate`, the result is the plain quadrature over [t_lo, t_hi].
/// With `bound`, the result stands in for the full (0, inf) integral and the
/// tails must be accounted for, analytically or by decayed-boundary evidence.
enum class TailPolicy { truncate, bound };

/// Integral of h(t) dt/t over the grid range. A supplied envelope yields an
/// analytic bound on the mass outside the range; asking for full-line
/// semantics without an envelope refuses unless the boundary octaves show
/// the integrand has already decayed away.
template <typename Fn>
TIntegral t_integrate(Fn&& h, const TGrid& tg,
                      const std::optional<TailEnvelope>& env = std::nullopt,
                      TailPolicy policy = TailPolicy::truncate, double rel_tol = 1e-9) {
    auto nodes = tg.nodes();
    auto weights = tg.weights();
    std::vector<double> vals(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        double v = h(nodes[i]);
        if (!std::isfinite(v))
            throw quadrature_error("t_integrate: non-finite integrand at t = " + sig17(nodes[i]));
        vals[i] = weights[i] * v;
    });
    CompensatedSum s;
    for (double v : vals) s.add(v);
    TIntegral out;
    out.value = s.value();

    if (env) {
        if (env->power_at_zero <= 0.0)
            throw refusal_error("t_integrate: envelope power at zero must be positive");
        // int_0^{t_lo} c0 t^p dt/t and int_{t_hi}^inf cinf e^{-bt} dt/t
        double left = env->c0 * std::pow(tg.t_lo(), env->power_at_zero) / env->power_at_zero;
        double b = env->exp_rate;
        double right = b > 0.0 ? env->cinf * std::exp(-b * tg.t_hi()) / (b * tg.t_hi())
                               : std::numeric_limits<double>::infinity();
        out.tail_bound = left + right;
        return out;
    }
    if (policy == TailPolicy::bound) {
        std::size_t per_octave = nodes.size() / static_cast<size_t>(tg.nu_max() - tg.nu_min());
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < per_octave; ++i) {
            first += std::abs(vals[i]);
            last += std::abs(vals[nodes.size() - 1 - i]);
        }
        double scale = std::max(std::abs(out.value), 1e-300);
        if (first > rel_tol * scale || last > rel_tol * scale)
            throw refusal_error(
                "t_integrate: tails not negligible and no decay envelope supplied");
        out.tail_bound = first + last;
    }
    return out;
}

}  // namespace lagspaces::numerics
