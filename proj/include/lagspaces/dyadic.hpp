#pragma once

// Dyadic cubes of (0,inf)^d, a sampled uncentered maximal operator, the
// vector-valued maximal inequality check, and the local mean-value check for
// the subharmonic Poisson profiles.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagspaces/common.hpp"

namespace lagspaces::dyadic {

/// Q = prod_j (m_j 2^nu, (m_j+1) 2^nu], m_j in N.
struct DyadicCube {
    int nu = 0;
    std::vector<int> m;

    int dim() const { return static_cast<int>(m.size()); }
    double side() const { return std::ldexp(1.0, nu); }
    double volume() const { return std::pow(side(), dim()); }
    Point center() const {
        Point c(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) c[j] = (m[j] + 0.5) * side();
        return c;
    }
    double lo(int j) const { return m[static_cast<size_t>(j)] * side(); }
    double hi(int j) const { return (m[static_cast<size_t>(j)] + 1) * side(); }
    bool contains(std::span<const double> x) const {
        for (int j = 0; j < dim(); ++j)
            if (!(x[static_cast<size_t>(j)] > lo(j) && x[static_cast<size_t>(j)] <= hi(j)))
                return false;
        return true;
    }
    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/// All cubes of D_nu inside (0,B]^d, lexicographic in m.
inline std::vector<DyadicCube> enumerate_cubes(int nu, double B, int d) {
    if (!(B > 0.0)) throw std::domain_error("enumerate_cubes: requires B > 0");
    double side = std::ldexp(1.0, nu);
    int count = static_cast<int>(std::floor(B / side + 1e-9));
    std::vector<DyadicCube> out;
    std::vector<int> m(static_cast<size_t>(d), 0);
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == d) {
            out.push_back(DyadicCube{nu, m});
            return;
        }
        for (int v = 0; v < count; ++v) {
            m[static_cast<size_t>(pos)] = v;
            self(self, pos + 1);
        }
    };
    if (count > 0) rec(rec, 0);
    return out;
}

/// Truncation of the full dyadic family: scales nu in [nu_lo, nu_hi], cubes
/// within (0,B]^d, enumerated by nu ascending then lexicographic m.
struct CubeSet {
    int nu_lo = 0;
    int nu_hi = 0;
    double B = 1.0;

    std::vector<DyadicCube> cubes(int d) const {
        std::vector<DyadicCube> out;
        for (int nu = nu_lo; nu <= nu_hi; ++nu) {
            auto level = enumerate_cubes(nu, B, d);
            out.insert(out.end(), level.begin(), level.end());
        }
        return out;
    }
};

/// Samples of a function on the uniform midpoint grid of (0,B]^d:
/// values at ((i_1+1/2)h, ..., (i_d+1/2)h), row-major, h = B/n.
struct GridSamples {
    int d = 1;
    double B = 1.0;
    int n = 0;  // samples per axis
    std::vector<double> values;

    double h() const { return B / n; }
    double at(std::span<const int> idx) const {
        std::size_t flat = 0;
        for (int j = 0; j < d; ++j) {
            int i = idx[static_cast<size_t>(j)];
            if (i < 0 || i >= n) return 0.0;  // extension by zero
            flat = flat * static_cast<size_t>(n) + static_cast<size_t>(i);
        }
        return values[flat];
    }

    template <typename Fn>
    static GridSamples tabulate(int d, double B, int n, Fn&& f) {
        GridSamples g{d, B, n, {}};
        std::size_t total = 1;
        for (int j = 0; j < d; ++j) total *= static_cast<size_t>(n);
        g.values.resize(total);
        std::vector<int> idx(static_cast<size_t>(d), 0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            Point x(static_cast<size_t>(d));
            for (int j = d - 1; j >= 0; --j) {
                idx[static_cast<size_t>(j)] = static_cast<int>(rem % static_cast<size_t>(n));
                rem /= static_cast<size_t>(n);
                x[static_cast<size_t>(j)] = (idx[static_cast<size_t>(j)] + 0.5) * g.h();
            }
            g.values[flat] = f(static_cast<const Point&>(x));
        }
        return g;
    }
};

/// Family used in place of "all axis-parallel cubes": dyadically anchored
/// cubes at scales [nu_lo, nu_hi] plus their half-side translates per axis.
struct MaximalFamily {
    int nu_lo = 0;
    int nu_hi = 0;
};

namespace detail {

// Midpoint-rule average of |f|^r over the box prod (a_j, b_j].
inline double box_average_pow(const GridSamples& f, double r, std::span<const double> a,
                              std::span<const double> b) {
    double h = f.h();
    std::vector<int> lo(static_cast<size_t>(f.d)), hi(static_cast<size_t>(f.d));
    double volume = 1.0;
    for (int j = 0; j < f.d; ++j) {
        // sample (i+1/2)h lies in (a, b]: a-exclusive, b-inclusive
        lo[static_cast<size_t>(j)] =
            static_cast<int>(std::ceil(a[static_cast<size_t>(j)] / h - 0.5 + 1e-12));
        hi[static_cast<size_t>(j)] =
            static_cast<int>(std::floor(b[static_cast<size_t>(j)] / h - 0.5 + 1e-12));
        volume *= b[static_cast<size_t>(j)] - a[static_cast<size_t>(j)];
    }
    double sum = 0.0;
    std::vector<int> idx = lo;
    while (true) {
        sum += std::pow(std::abs(f.at(idx)), r);
        int j = f.d - 1;
        while (j >= 0 && ++idx[static_cast<size_t>(j)] > hi[static_cast<size_t>(j)]) {
            idx[static_cast<size_t>(j)] = lo[static_cast<size_t>(j)];
            --j;
        }
        if (j < 0) break;
    }
    return sum * std::pow(h, f.d) / volume;
}

}  // namespace detail

/// Sampled uncentered maximal operator M_r at a grid point. A lower
/// approximation of the true supremum: the family is finite.
inline double maximal_operator(const GridSamples& f, double r, std::span<const double> x,
                               const MaximalFamily& family) {
    if (!(r > 0.0)) throw std::domain_error("maximal_operator: requires r > 0");
    for (int j = 0; j < f.d; ++j) {
        double v = x[static_cast<size_t>(j)];
        if (!(v > 0.0 && v <= f.B)) throw std::domain_error("maximal_operator: x outside grid");
    }
    double best = 0.0;
    std::vector<double> a(static_cast<size_t>(f.d)), b(static_cast<size_t>(f.d));
    std::vector<int> shift(static_cast<size_t>(f.d), 0);
    // grid-compatible scales only: the midpoint rule needs side >= h
    int nu_min = static_cast<int>(std::ceil(std::log2(f.h()) - 1e-9));
    for (int nu = std::max(family.nu_lo, nu_min); nu <= family.nu_hi; ++nu) {
        double side = std::ldexp(1.0, nu);
        // offsets -1/2, 0, +1/2 of the anchor per axis
        std::fill(shift.begin(), shift.end(), -1);
        while (true) {
            for (int j = 0; j < f.d; ++j) {
                double off = 0.5 * shift[static_cast<size_t>(j)] * side;
                double pos = x[static_cast<size_t>(j)] - off;
                double cell = std::ceil(pos / side) - 1.0;
                a[static_cast<size_t>(j)] = cell * side + off;
                b[static_cast<size_t>(j)] = a[static_cast<size_t>(j)] + side;
            }
            best = std::max(best, std::pow(detail::box_average_pow(f, r, a, b), 1.0 / r));
            int j = f.d - 1;
            while (j >= 0 && ++shift[static_cast<size_t>(j)] > 1) {
                shift[static_cast<size_t>(j)] = -1;
                --j;
            }
            if (j < 0) break;
        }
    }
    return best;
}

struct RatioReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // 0/0 reported as 0
};

/// Vector-valued maximal inequality surrogate on the sample grid:
/// || (sum_n (M_r f_n)^q)^{1/q} ||_p against || (sum_n |f_n|^q)^{1/q} ||_p.
inline RatioReport fefferman_stein_check(std::span<const GridSamples> fs, double p, double q,
                                         double r, const MaximalFamily& family) {
    if (!(r > 0.0 && r < std::min(p, q)))
        throw refusal_error("fefferman_stein_check: requires 0 < r < min(p, q)");
    if (fs.empty()) return {};
    const GridSamples& f0 = fs[0];
    std::size_t total = f0.values.size();
    std::vector<double> lhs_terms(total), rhs_terms(total);
    parallel_for(total, [&](std::size_t flat) {
        std::vector<int> idx(static_cast<size_t>(f0.d));
        std::size_t rem = flat;
        Point x(static_cast<size_t>(f0.d));
        for (int j = f0.d - 1; j >= 0; --j) {
            idx[static_cast<size_t>(j)] = static_cast<int>(rem % static_cast<size_t>(f0.n));
            rem /= static_cast<size_t>(f0.n);
            x[static_cast<size_t>(j)] = (idx[static_cast<size_t>(j)] + 0.5) * f0.h();
        }
        double sum_m = 0.0, sum_f = 0.0;
        for (const auto& f : fs) {
            sum_m += std::pow(maximal_operator(f, r, x, family), q);
            sum_f += std::pow(std::abs(f.at(idx)), q);
        }
        lhs_terms[flat] = std::pow(sum_m, p / q);
        rhs_terms[flat] = std::pow(sum_f, p / q);
    });
    CompensatedSum ls, rs;
    for (double v : lhs_terms) ls.add(v);
    for (double v : rhs_terms) rs.add(v);
    double hv = std::pow(f0.h(), f0.d);
    RatioReport rep;
    rep.lhs = std::pow(hv * ls.value(), 1.0 / p);
    rep.rhs = std::pow(hv * rs.value(), 1.0 / p);
    rep.ratio = rep.rhs == 0.0 ? 0.0 : rep.lhs / rep.rhs;
    return rep;
}

/// Axis-aligned cube in (x, t) space: prod_j [x_lo_j, x_lo_j + side] x
/// [t_lo, t_lo + side]. x faces may cross the coordinate hyperplanes.
struct SpaceTimeCube {
    Point x_lo;
    double t_lo = 0.0;
    double side = 1.0;
};

struct MeanValueReport {
    double sup_Q = 0.0;
    double avg_muQ = 0.0;  // (|muQ|^{-1} int_{muQ} u^r)^{1/r}
    bool ok = false;
};

/// Local mean-value check for a nonnegative function u(x,t) expected to be
/// subharmonic after multi-even reflection in x: sampled sup over Q against
/// the r-average over muQ (same center). u is evaluated as u(|x_1|,...,t).
template <typename Fn>
MeanValueReport subharmonic_mean_check(Fn&& u, const SpaceTimeCube& Q, double mu, double r,
                                       int samples_per_side = 8, double tol = 0.05) {
    if (!(mu > 1.0 && mu <= 2.0))
        throw refusal_error("subharmonic_mean_check: requires mu in (1, 2]");
    if (samples_per_side < 8)
        throw refusal_error("subharmonic_mean_check: requires >= 8 samples per side");
    double tc = Q.t_lo + 0.5 * Q.side;
    if (!(tc - Q.side > 0.0))
        throw refusal_error("subharmonic_mean_check: closure of 2Q leaves t > 0");
    int d = static_cast<int>(Q.x_lo.size());

    auto u_even = [&](const Point& x, double t) {
        Point ax(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) ax[j] = std::abs(x[j]);
        return u(ax, t);
    };

    // sup over Q on a midpoint lattice
    double sup = 0.0;
    int nQ = samples_per_side;
    std::vector<int> idx(static_cast<size_t>(d) + 1, 0);
    double hQ = Q.side / nQ;
    while (true) {
        Point x(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j)
            x[static_cast<size_t>(j)] = Q.x_lo[static_cast<size_t>(j)] +
                                        (idx[static_cast<size_t>(j)] + 0.5) * hQ;
        double t = Q.t_lo + (idx[static_cast<size_t>(d)] + 0.5) * hQ;
        sup = std::max(sup, u_even(x, t));
        int j = d;
        while (j >= 0 && ++idx[static_cast<size_t>(j)] >= nQ) {
            idx[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }

    // r-average over muQ, same center, midpoint rule
    int nM = static_cast<int>(std::ceil(samples_per_side * mu));
    double sideM = mu * Q.side;
    double hM = sideM / nM;
    CompensatedSum sum;
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
        Point x(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j) {
            double c = Q.x_lo[static_cast<size_t>(j)] + 0.5 * Q.side;
            x[static_cast<size_t>(j)] = c - 0.5 * sideM + (idx[static_cast<size_t>(j)] + 0.5) * hM;
        }
        double t = tc - 0.5 * sideM + (idx[static_cast<size_t>(d)] + 0.5) * hM;
        sum.add(std::pow(u_even(x, t), r));
        int j = d;
        while (j >= 0 && ++idx[static_cast<size_t>(j)] >= nM) {
            idx[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    double total_cells = std::pow(static_cast<double>(nM), d + 1);
    MeanValueReport rep;
    rep.sup_Q = sup;
    rep.avg_muQ = std::pow(sum.value() / total_cells, 1.0 / r);
    rep.ok = sup <= rep.avg_muQ * (1.0 + tol);
    return rep;
}

}  // namespace lagspaces::dyadic
