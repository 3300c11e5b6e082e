#pragma once

// Heat and Poisson-type kernels of L_alpha, evaluated by independent routes:
//
//   G_t(x,y)      = (sinh 2t)^{-d} exp(-coth(2t)(|x|^2+|y|^2)/2)
//                   prod_i sqrt(x_i y_i) I_{alpha_i}(x_i y_i / sinh 2t)
//   G_t(x,y)      = sum_n e^{-t lambda_n} S_n(x,y),
//   p_{t,m}(x,y)  = sum_n (t sqrt(lambda_n))^m e^{-t sqrt(lambda_n)} S_n(x,y),
//   p_t(x,y)      = (2 sqrt(pi))^{-1} int_0^inf t e^{-t^2/4u} G_u(x,y) u^{-3/2} du,
//   p_{t,m}(x,y)  = ((-1)^{m+1} t^m / sqrt(pi))
//                   int_0^inf d^{m+1}/dt^{m+1}(e^{-t^2/4u}) G_u(x,y) u^{-1/2} du,
//
// with S_n(x,y) = sum_{|k|=n} phi_k(x) phi_k(y). Closed forms run in log
// space; series return certified truncation-tail bounds; the semi-infinite
// integrals use octave panels with the substitution u = (t^2+|x-y|^2)/(8w)
// on the left piece, which makes the integrand decay like e^{-2w}.

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "lagspaces/common.hpp"
#include "lagspaces/numerics.hpp"
#include "lagspaces/specfun.hpp"

namespace lagspaces::kernels {

struct KernelQuery {
    double t = 1.0;
    int m = 0;
    Point x;
    Point y;
    AlphaIndex alpha;

    int dim() const { return static_cast<int>(x.size()); }
    void validate() const {
        if (!(t > 0.0)) throw std::domain_error("KernelQuery: requires t > 0");
        if (x.size() != y.size() || alpha.dim() != dim())
            throw std::domain_error("KernelQuery: dimension mismatch");
        for (double v : x)
            if (!(v > 0.0)) throw std::domain_error("KernelQuery: x must be interior");
        for (double v : y)
            if (!(v > 0.0)) throw std::domain_error("KernelQuery: y must be interior");
    }
};

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

inline double log_sinh(double s) {
    return s < 20.0 ? std::log(std::sinh(s)) : s - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * s));
}

inline double lambda_offset(const AlphaIndex& alpha, int d) { return 2.0 * alpha.total() + 2.0 * d; }

// Per-axis table phi_j(x) phi_j(y), j = 0..K.
inline std::vector<double> axis_product_table(int K, double a, double x, double y) {
    auto fx = specfun::phi_axis_table(K, a, x);
    auto fy = specfun::phi_axis_table(K, a, y);
    for (std::size_t j = 0; j < fx.size(); ++j) fx[j] *= fy[j];
    return fx;
}

// ----- FFT-backed linear convolution (FFTW, plans cached per length) -------

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

inline FftPlans& fft_plans(std::size_t L) {
    static std::map<std::size_t, FftPlans> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;
    std::vector<double> re(L);
    std::vector<fftw_complex> cx(L / 2 + 1);
    FftPlans plans;
    plans.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(L), re.data(), cx.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.inv = fftw_plan_dft_c2r_1d(static_cast<int>(L), cx.data(), re.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(L, plans).first->second;
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t L = 1;
    while (L < n) L <<= 1;
    return L;
}

inline std::vector<double> convolve_fft(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t n = a.size() + b.size() - 1;
    std::size_t L = next_pow2(n);
    auto& plans = fft_plans(L);
    std::vector<double> pa(L, 0.0), pb(L, 0.0);
    std::copy(a.begin(), a.end(), pa.begin());
    std::copy(b.begin(), b.end(), pb.begin());
    std::vector<fftw_complex> fa(L / 2 + 1), fb(L / 2 + 1);
    fftw_execute_dft_r2c(plans.fwd, pa.data(), fa.data());
    fftw_execute_dft_r2c(plans.fwd, pb.data(), fb.data());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_execute_dft_c2r(plans.inv, fa.data(), pa.data());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = pa[i] / static_cast<double>(L);
    return out;
}

inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() * b.size() <= 1u << 22) {
        std::vector<double> out(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        return out;
    }
    return convolve_fft(a, b);
}

/// S_n(x,y) for n = 0..K: iterated convolution of the per-axis tables.
inline std::vector<double> shell_sums(const KernelQuery& q, int K) {
    std::vector<double> s = axis_product_table(K, q.alpha[0], q.x[0], q.y[0]);
    for (int i = 1; i < q.dim(); ++i) {
        s = convolve(s, axis_product_table(K, q.alpha[i], q.x[i], q.y[i]));
        s.resize(static_cast<size_t>(K) + 1);
    }
    return s;
}

/// Empirical uniform bound on |S_n| / (n+1)^{d-1}: product of per-axis maxima.
inline double shell_base(const KernelQuery& q, int K) {
    double base = 1.0;
    for (int i = 0; i < q.dim(); ++i) {
        auto tab = axis_product_table(K, q.alpha[i], q.x[i], q.y[i]);
        double mx = 0.0;
        for (double v : tab) mx = std::max(mx, std::abs(v));
        base *= mx;
    }
    return base;
}

// sum_{n>K} (n+1)^{d-1} w(lambda_n), summed numerically; cached.
template <typename W>
double tail_sum(W&& w, double offset, int d, int K) {
    CompensatedSum s;
    double acc = 0.0;
    for (long n = K + 1; n < K + 100000000L; ++n) {
        double lam = 4.0 * static_cast<double>(n) + offset;
        double term = std::pow(n + 1.0, d - 1) * w(lam);
        s.add(term);
        acc = s.value();
        if (term < 1e-17 * acc && n > K + 8) break;
    }
    return acc;
}

inline double heat_tail_factor(double t, double offset, int d, int K) {
    return tail_sum([&](double lam) { return std::exp(-t * lam); }, offset, d, K);
}

inline double patm_tail_factor(double t, int m, double offset, int d, int K) {
    struct Key {
        double t, offset;
        int m, d, K;
        bool operator<(const Key& o) const {
            return std::tie(t, offset, m, d, K) < std::tie(o.t, o.offset, o.m, o.d, o.K);
        }
    };
    static std::map<Key, double> cache;
    static std::mutex mu;
    Key key{t, offset, m, d, K};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    double v = tail_sum(
        [&](double lam) {
            double u = t * std::sqrt(lam);
            return std::pow(u, m) * std::exp(-u);
        },
        offset, d, K);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, v);
    return v;
}

}  // namespace detail

/// Closed-form heat kernel, log-space evaluation. If the value underflows the
/// double range it saturates to 0 and sets *saturated.
inline double heat_kernel_closed(const KernelQuery& q, bool* saturated = nullptr) {
    q.validate();
    if (saturated) *saturated = false;
    int d = q.dim();
    double s2t = 2.0 * q.t;
    double log_s = detail::log_sinh(s2t);
    double coth = 1.0 / std::tanh(s2t);
    double log_g = -d * log_s - 0.5 * coth * (norm2sq(q.x) + norm2sq(q.y));
    for (int i = 0; i < d; ++i) {
        double xy = q.x[static_cast<size_t>(i)] * q.y[static_cast<size_t>(i)];
        double log_z = std::log(xy) - log_s;
        double z = std::exp(log_z);
        double log_bessel = z <= 1e-280
                                ? q.alpha[i] * (log_z - std::numbers::ln2) -
                                      std::lgamma(q.alpha[i] + 1.0)
                                : specfun::detail::log_bessel_i_scaled(q.alpha[i], z);
        log_g += 0.5 * std::log(xy) + z + log_bessel;
    }
    if (log_g < -700.0) {
        if (saturated) *saturated = true;
        return 0.0;
    }
    return std::exp(log_g);
}

/// Truncated eigenfunction series for G_t with a geometric tail bound.
inline SeriesValue heat_kernel_series(const KernelQuery& q, int K) {
    q.validate();
    double offset = detail::lambda_offset(q.alpha, q.dim());
    auto s = detail::shell_sums(q, K);
    CompensatedSum acc;
    for (int n = 0; n <= K; ++n)
        acc.add(std::exp(-q.t * (4.0 * n + offset)) * s[static_cast<size_t>(n)]);
    double base = detail::shell_base(q, K);
    return {acc.value(), 2.0 * base * detail::heat_tail_factor(q.t, offset, q.dim(), K)};
}

/// Truncated series for p_{t,m} with a tail bound.
inline SeriesValue patm_series(const KernelQuery& q, int K) {
    q.validate();
    double offset = detail::lambda_offset(q.alpha, q.dim());
    auto s = detail::shell_sums(q, K);
    CompensatedSum acc;
    for (int n = 0; n <= K; ++n) {
        double u = q.t * std::sqrt(4.0 * n + offset);
        acc.add(std::pow(u, q.m) * std::exp(-u) * s[static_cast<size_t>(n)]);
    }
    double base = detail::shell_base(q, K);
    return {acc.value(), 2.0 * base * detail::patm_tail_factor(q.t, q.m, offset, q.dim(), K)};
}

namespace detail {

// Octave-panel quadrature of g over [a, inf), Gauss nodes per panel, stopping
// once two consecutive octaves contribute nothing at the accumulated scale.
template <typename Fn>
double integrate_octaves(Fn&& g, double a, int nodes_per_octave = 16, int max_octaves = 90) {
    static thread_local std::vector<double> gl_nodes, gl_weights;
    static thread_local int cached_n = 0;
    if (cached_n != nodes_per_octave) {
        numerics::gauss_legendre(nodes_per_octave, gl_nodes, gl_weights);
        cached_n = nodes_per_octave;
    }
    CompensatedSum acc;
    int quiet = 0;
    for (int oct = 0; oct < max_octaves; ++oct) {
        double lo = a * std::ldexp(1.0, oct), hi = a * std::ldexp(1.0, oct + 1);
        double half = 0.5 * (hi - lo), mid = 0.5 * (lo + hi);
        double panel = 0.0;
        for (int j = 0; j < nodes_per_octave; ++j)
            panel += half * gl_weights[static_cast<size_t>(j)] *
                     g(mid + half * gl_nodes[static_cast<size_t>(j)]);
        acc.add(panel);
        double scale = std::max(std::abs(acc.value()), 1e-300);
        quiet = std::abs(panel) <= 1e-16 * scale ? quiet + 1 : 0;
        if (quiet >= 2) return acc.value();
    }
    throw refusal_error("integrate_octaves: tail not resolved within the octave budget");
}

// d^j/dt^j e^{-t^2/4u} = (-1)^j (4u)^{-j/2} H_j(t/(2 sqrt(u))) e^{-t^2/4u}.
inline double gaussian_t_derivative(int j, double t, double u) {
    double e = t * t / (4.0 * u);
    if (e > 745.0) return 0.0;
    double xi = t / (2.0 * std::sqrt(u));
    double h0 = 1.0, h1 = 2.0 * xi;
    double h = (j == 0) ? h0 : h1;
    for (int i = 1; i < j; ++i) {
        double h2 = 2.0 * xi * h1 - 2.0 * i * h0;
        h0 = h1;
        h1 = h2;
        h = h2;
    }
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(4.0 * u, -0.5 * j) * h * std::exp(-e);
}

// Subordination-type integral int_0^inf w(u) G_u(x,y) du, split at u = 1 with
// the substitution u = (t^2+|x-y|^2)/(8w) on (0,1].
template <typename Fn>
double subordination_integral(const KernelQuery& q, Fn&& weight) {
    double c = q.t * q.t + dist2(q.x, q.y);
    KernelQuery qu = q;
    auto integrand = [&](double u) {
        qu.t = u;
        return weight(u) * heat_kernel_closed(qu);
    };
    double left = integrate_octaves(
        [&](double w) {
            double u = c / (8.0 * w);
            return u <= 1.0 ? integrand(u) * c / (8.0 * w * w) : 0.0;
        },
        c / 8.0);
    double right = integrate_octaves(integrand, 1.0);
    return left + right;
}

}  // namespace detail

/// Poisson kernel by subordination of the closed-form heat kernel.
inline double poisson_kernel_subordination(const KernelQuery& q) {
    q.validate();
    if (q.m != 0)
        throw std::domain_error("poisson_kernel_subordination: defined for m = 0");
    if (!q.alpha.is_kernel_safe())
        throw std::domain_error("poisson_kernel_subordination: alpha must be kernel safe");
    // Subordination constant: int_0^inf u^{-3/2} e^{-A/u - Bu} du =
    // sqrt(pi/A) e^{-2 sqrt(AB)} with A = t^2/4 gives the 1/(2 sqrt(pi)).
    double v = detail::subordination_integral(
        q, [&](double u) { return q.t * std::exp(-q.t * q.t / (4.0 * u)) * std::pow(u, -1.5); });
    return v / (2.0 * std::sqrt(std::numbers::pi));
}

/// p_{t,m} by the Gaussian-derivative representation: independent of the
/// series route, shares only the closed-form heat kernel.
inline double patm_integral(const KernelQuery& q) {
    q.validate();
    if (!q.alpha.is_kernel_safe())
        throw std::domain_error("patm_integral: alpha must be kernel safe");
    double v = detail::subordination_integral(q, [&](double u) {
        return detail::gaussian_t_derivative(q.m + 1, q.t, u) * std::pow(u, -0.5);
    });
    double sign = (q.m % 2 == 0) ? -1.0 : 1.0;  // (-1)^{m+1}
    return sign * std::pow(q.t, q.m) * v / std::sqrt(std::numbers::pi);
}

/// G_t(x,y) divided by the Gaussian bound shape
/// e^{-dt} e^{-|x-y|^2/2} (t > 1) or t^{-d/2} e^{-|x-y|^2/(4t)} (t <= 1).
inline double gaussian_bound_ratio(double t, std::span<const double> x,
                                   std::span<const double> y, const AlphaIndex& alpha) {
    if (!alpha.is_kernel_safe())
        throw std::domain_error("gaussian_bound_ratio: alpha must be kernel safe");
    KernelQuery q{t, 0, Point(x.begin(), x.end()), Point(y.begin(), y.end()), alpha};
    q.validate();
    int d = q.dim();
    double r2 = dist2(x, y);
    double log_bound = t > 1.0 ? -d * t - 0.5 * r2 : -0.5 * d * std::log(t) - 0.25 * r2 / t;
    double s2t = 2.0 * t;
    double log_s = detail::log_sinh(s2t);
    double coth = 1.0 / std::tanh(s2t);
    double log_g = -d * log_s - 0.5 * coth * (norm2sq(q.x) + norm2sq(q.y));
    for (int i = 0; i < d; ++i) {
        double xy = q.x[static_cast<size_t>(i)] * q.y[static_cast<size_t>(i)];
        double log_z = std::log(xy) - log_s;
        double z = std::exp(log_z);
        double log_bessel = z <= 1e-280 ? alpha[i] * (log_z - std::numbers::ln2) -
                                              std::lgamma(alpha[i] + 1.0)
                                        : specfun::detail::log_bessel_i_scaled(alpha[i], z);
        log_g += 0.5 * std::log(xy) + z + log_bessel;
    }
    return std::exp(log_g - log_bound);
}

/// |p_{t,m}(x,y)| (t+|x-y|)^{d+m} / t^m, the shape of the polynomial decay
/// bound for m >= 1. The kernel value comes from the series route with the
/// truncation chosen so its certified tail is negligible.
inline double decay_bound_ratio(const KernelQuery& q, double rel_tail = 1e-6) {
    q.validate();
    if (q.m < 1) throw std::domain_error("decay_bound_ratio: requires m >= 1");
    if (!q.alpha.is_kernel_safe())
        throw std::domain_error("decay_bound_ratio: alpha must be kernel safe");
    int K = 64;
    SeriesValue sv = patm_series(q, K);
    while (sv.tail_bound > rel_tail * std::max(std::abs(sv.value), 1e-300) && K < (1 << 21)) {
        K *= 2;
        sv = patm_series(q, K);
    }
    double shape = std::pow(q.t + std::sqrt(dist2(q.x, q.y)), q.dim() + q.m) /
                   std::pow(q.t, q.m);
    return std::abs(sv.value) * shape;
}

// ---------------------------------------------------------------------------
// Bulk series evaluation over a lattice of queries sharing (alpha, t, m).
// ---------------------------------------------------------------------------

/// Evaluates p_{t,m}(x,y) for every pair of lattice points at a fixed
/// truncation K. Per-point basis tables are shared across pairs; in d = 2
/// the shell convolution is folded into a cached correlation per axis-2
/// pair, which is the same sum sum_{j1,j2} theta_{j1+j2} T1_{j1} T2_{j2}
/// evaluated with FFTs.
class LatticeSeriesEvaluator {
  public:
    /// axis_points: the per-axis lattice (shared by x and y coordinates).
    LatticeSeriesEvaluator(const AlphaIndex& alpha, std::span<const double> axis_points,
                           double t, int m, int K)
        : alpha_(alpha), d_(alpha.dim()), pts_(axis_points.begin(), axis_points.end()),
          t_(t), m_(m), K_(K) {
        if (d_ < 1 || d_ > 2)
            throw std::domain_error("LatticeSeriesEvaluator: supports d in {1,2}");
        offset_ = detail::lambda_offset(alpha_, d_);
        std::size_t P = pts_.size();
        phi_.resize(static_cast<size_t>(d_));
        for (int ax = 0; ax < d_; ++ax) {
            phi_[static_cast<size_t>(ax)].resize(P);
            for (std::size_t i = 0; i < P; ++i)
                phi_[static_cast<size_t>(ax)][i] =
                    specfun::phi_axis_table(K, alpha_[ax], pts_[i]);
        }
        theta_.resize(static_cast<size_t>(K) + 1);
        for (int n = 0; n <= K; ++n) theta_[static_cast<size_t>(n)] = theta(n);
        if (d_ == 2) build_correlations();
        tail_factor_ = detail::patm_tail_factor(t_, m_, offset_, d_, K_);
    }

    /// Kernel value + certified tail for x = (pts[ix..]), y = (pts[iy..]).
    SeriesValue at(std::span<const std::size_t> ix, std::span<const std::size_t> iy) const {
        std::size_t P = pts_.size();
        const auto& x1 = phi_[0][ix[0]];
        const auto& y1 = phi_[0][iy[0]];
        double value, base1 = 0.0;
        if (d_ == 1) {
            CompensatedSum s;
            for (int n = 0; n <= K_; ++n) {
                double prod = x1[static_cast<size_t>(n)] * y1[static_cast<size_t>(n)];
                base1 = std::max(base1, std::abs(prod));
                s.add(theta_[static_cast<size_t>(n)] * prod);
            }
            return {s.value(), 2.0 * base1 * tail_factor_};
        }
        const auto& c2 = corr_[ix[1] * P + iy[1]];
        const auto& x2 = phi_[1][ix[1]];
        const auto& y2 = phi_[1][iy[1]];
        double s = 0.0, base2 = 0.0;
        for (int j = 0; j <= K_; ++j) {
            double prod = x1[static_cast<size_t>(j)] * y1[static_cast<size_t>(j)];
            base1 = std::max(base1, std::abs(prod));
            base2 = std::max(base2,
                             std::abs(x2[static_cast<size_t>(j)] * y2[static_cast<size_t>(j)]));
            s += prod * c2[static_cast<size_t>(j)];
        }
        value = s;
        return {value, 2.0 * base1 * base2 * tail_factor_};
    }

  private:
    double theta(long n) const {
        double u = t_ * std::sqrt(4.0 * static_cast<double>(n) + offset_);
        return std::pow(u, m_) * std::exp(-u);
    }

    void build_correlations() {
        std::size_t P = pts_.size();
        std::size_t K1 = static_cast<size_t>(K_) + 1;
        std::vector<double> theta_row(2 * K1 - 1);
        for (std::size_t s = 0; s < theta_row.size(); ++s)
            theta_row[s] = theta(static_cast<long>(s));
        corr_.resize(P * P);
        std::vector<double> rev(K1);
        for (std::size_t i = 0; i < P; ++i) {
            for (std::size_t j = 0; j < P; ++j) {
                for (std::size_t n = 0; n < K1; ++n)
                    rev[K1 - 1 - n] = phi_[1][i][n] * phi_[1][j][n];
                auto conv = detail::convolve(theta_row, rev);
                // C_j = sum_i theta_{i+j} T2_i = conv[j + K]
                corr_[i * P + j].assign(conv.begin() + static_cast<long>(K_),
                                        conv.begin() + static_cast<long>(K_) +
                                            static_cast<long>(K1));
            }
        }
    }

    AlphaIndex alpha_;
    int d_;
    std::vector<double> pts_;
    double t_;
    int m_;
    int K_;
    double offset_ = 0.0;
    double tail_factor_ = 0.0;
    std::vector<double> theta_;
    std::vector<std::vector<std::vector<double>>> phi_;  // [axis][point] -> table
    std::vector<std::vector<double>> corr_;              // [i*P+j] -> correlation row
};

/// Smallest truncation whose certified tail (with unit shell base) stays
/// below abs_target.
inline int choose_series_degree(double t, int m, double offset, int d, double abs_target) {
    int K = 64;
    while (K < (1 << 21) &&
           2.0 * detail::patm_tail_factor(t, m, offset, d, K) > abs_target)
        K *= 2;
    return K;
}

}  // namespace lagspaces::kernels
