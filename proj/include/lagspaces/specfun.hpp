#pragma once

// Laguerre polynomials and Laguerre functions of Hermite / convolution type,
// their L^2 normalization constants, and the scaled modified Bessel function
// e^{-z} I_nu(z). Everything here is pure and reentrant.
//
// One-dimensional building blocks, for k in N, a > -1, x > 0:
//   phi_k^a(x) = c_{k,a} L_k^a(x^2) x^{a+1/2} e^{-x^2/2}
//   ell_k^a(x) = c_{k,a} L_k^a(x^2) e^{-x^2/2}
//   c_{k,a}    = (2 Gamma(k+1) / Gamma(k+a+1))^{1/2}
// d-dimensional versions are coordinate products.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagspaces/common.hpp"

namespace lagspaces::specfun {

/// Laguerre polynomial L_k^a(x) by the three-term recurrence
///   (k+1) L_{k+1} = (2k+1+a-x) L_k - (k+a) L_{k-1},  L_0 = 1, L_1 = 1+a-x.
inline double laguerre_polynomial(int k, double a, double x) {
    if (!(a > -1.0)) throw std::domain_error("laguerre_polynomial: requires a > -1");
    if (k < 0) throw std::domain_error("laguerre_polynomial: requires k >= 0");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 + a - x;
    for (int j = 1; j < k; ++j) {
        double next = ((2.0 * j + 1.0 + a - x) * cur - (j + a) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Row L_0^a(x) .. L_kmax^a(x) in one recurrence pass.
inline std::vector<double> laguerre_row(int kmax, double a, double x) {
    if (!(a > -1.0)) throw std::domain_error("laguerre_row: requires a > -1");
    std::vector<double> row(static_cast<size_t>(kmax) + 1);
    row[0] = 1.0;
    if (kmax == 0) return row;
    row[1] = 1.0 + a - x;
    for (int j = 1; j < kmax; ++j)
        row[static_cast<size_t>(j) + 1] =
            ((2.0 * j + 1.0 + a - x) * row[static_cast<size_t>(j)] -
             (j + a) * row[static_cast<size_t>(j) - 1]) /
            (j + 1.0);
    return row;
}

/// c_{k,a} = sqrt(2 k! / Gamma(k+a+1)), via log-gamma differences.
inline double norm_const(int k, double a) {
    if (!(a > -1.0)) throw std::domain_error("norm_const: requires a > -1");
    if (k < 0) throw std::domain_error("norm_const: requires k >= 0");
    return std::exp(0.5 * (std::numbers::ln2 + std::lgamma(k + 1.0) - std::lgamma(k + a + 1.0)));
}

/// Row c_{0,a} .. c_{kmax,a}; the ratio recurrence avoids repeated lgamma calls.
inline std::vector<double> norm_const_row(int kmax, double a) {
    std::vector<double> row(static_cast<size_t>(kmax) + 1);
    row[0] = norm_const(0, a);
    for (int k = 0; k < kmax; ++k)
        row[static_cast<size_t>(k) + 1] = row[static_cast<size_t>(k)] * std::sqrt((k + 1.0) / (k + 1.0 + a));
    return row;
}

namespace detail {

// One axis of phi in sign/log form. x > 0.
inline SignedLog phi_axis_log(int k, double a, double x) {
    double L = laguerre_polynomial(k, a, x * x);
    if (L == 0.0) return {};
    double log_abs = 0.5 * (std::numbers::ln2 + std::lgamma(k + 1.0) - std::lgamma(k + a + 1.0)) +
                     std::log(std::abs(L)) + (a + 0.5) * std::log(x) - 0.5 * x * x;
    return {log_abs, L > 0 ? 1 : -1};
}

inline SignedLog ell_axis_log(int k, double a, double x) {
    double L = laguerre_polynomial(k, a, x * x);
    if (L == 0.0) return {};
    double log_abs = 0.5 * (std::numbers::ln2 + std::lgamma(k + 1.0) - std::lgamma(k + a + 1.0)) +
                     std::log(std::abs(L)) - 0.5 * x * x;
    return {log_abs, L > 0 ? 1 : -1};
}

}  // namespace detail

/// phi_k^alpha(x) in sign/log form; safe for large |k| and |x| where the raw
/// product of powers and exponentials would over- or underflow.
inline SignedLog phi_eval_log(const MultiIndex& k, const AlphaIndex& alpha,
                              std::span<const double> x) {
    if (k.dim() != alpha.dim() || static_cast<size_t>(k.dim()) != x.size())
        throw std::domain_error("phi_eval: dimension mismatch");
    SignedLog acc{0.0, 1};
    for (int i = 0; i < k.dim(); ++i) {
        double xi = x[static_cast<size_t>(i)];
        if (xi < 0.0) throw std::domain_error("phi_eval: coordinates must be positive");
        if (xi == 0.0) {
            // Continuous limit 0 when the power factor vanishes; otherwise the
            // point is outside the domain.
            if (alpha[i] + 0.5 > 0.0) return {};
            throw std::domain_error("phi_eval: boundary point with alpha_i <= -1/2");
        }
        acc = acc * detail::phi_axis_log(k[i], alpha[i], xi);
        if (acc.sign == 0) return {};
    }
    return acc;
}

inline double phi_eval(const MultiIndex& k, const AlphaIndex& alpha, std::span<const double> x) {
    return phi_eval_log(k, alpha, x).value();
}

/// ell_k^alpha(x); continuous up to the boundary, so x_i = 0 yields the limit.
inline double ell_eval(const MultiIndex& k, const AlphaIndex& alpha, std::span<const double> x) {
    if (k.dim() != alpha.dim() || static_cast<size_t>(k.dim()) != x.size())
        throw std::domain_error("ell_eval: dimension mismatch");
    SignedLog acc{0.0, 1};
    for (int i = 0; i < k.dim(); ++i) {
        double xi = x[static_cast<size_t>(i)];
        if (xi < 0.0) throw std::domain_error("ell_eval: coordinates must be nonnegative");
        acc = acc * (xi == 0.0 ? signed_log(norm_const(k[i], alpha[i]))
                               : detail::ell_axis_log(k[i], alpha[i], xi));
        if (acc.sign == 0) return 0.0;
    }
    return acc.value();
}

/// Table phi_0^a(x) .. phi_kmax^a(x) for one axis, plain arithmetic. Intended
/// for grid sweeps with moderate x where no scaling trouble can occur.
inline std::vector<double> phi_axis_table(int kmax, double a, double x) {
    std::vector<double> row = laguerre_row(kmax, a, x * x);
    std::vector<double> c = norm_const_row(kmax, a);
    double pref = std::pow(x, a + 0.5) * std::exp(-0.5 * x * x);
    for (int k = 0; k <= kmax; ++k) row[static_cast<size_t>(k)] *= c[static_cast<size_t>(k)] * pref;
    return row;
}

// ---------------------------------------------------------------------------
// Scaled modified Bessel function e^{-z} I_nu(z)
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kBesselCrossover = 30.0;

// log(e^{-z} I_nu(z)) by the ascending series, valid for nu > -1, z >= 0.
// I_nu(z) = (z/2)^nu / Gamma(nu+1) * S,  S = sum_j (z^2/4)^j / (j! (nu+1)_j).
// S stays below ~e^z, so plain doubles suffice for z <= ~600; a rescaling
// guard keeps the loop valid beyond that.
inline double log_bessel_series(double nu, double z) {
    double q = 0.25 * z * z;
    double term = 1.0, s = 1.0, log_offset = 0.0;
    for (int j = 0; j < 2000000; ++j) {
        term *= q / ((j + 1.0) * (nu + j + 1.0));
        s += term;
        if (term < 1e-18 * s) break;
        if (s > 1e250) {
            s *= 1e-250;
            term *= 1e-250;
            log_offset += 250.0 * std::numbers::ln10;
        }
    }
    return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) + std::log(s) + log_offset - z;
}

// log(e^{-z} I_nu(z)) by the large-argument expansion
//   e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(nu) / z^k,
//   a_k(nu) = prod_{i=1..k} (mu - (2i-1)^2) / (k! 8^k),  mu = 4 nu^2.
// Truncated at the smallest term.
inline double log_bessel_asymptotic(double nu, double z) {
    double mu = 4.0 * nu * nu;
    double term = 1.0, s = 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
        double next = -term * (mu - lagspaces::sq(2.0 * k + 1.0)) / ((k + 1.0) * 8.0 * z);
        if (std::abs(next) >= best) break;  // divergence onset
        best = std::abs(next);
        term = next;
        s += term;
        if (std::abs(term) < 1e-18 * std::abs(s)) break;
    }
    if (!(s > 0.0)) return log_bessel_series(nu, z);
    return -0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(s);
}

/// log(e^{-z} I_nu(z)) for nu > -1, z >= 0. Returns -inf for the genuine zero
/// (z = 0, nu > 0) and +inf for the z -> 0 blow-up at nu < 0.
inline double log_bessel_i_scaled(double nu, double z) {
    if (!(nu > -1.0)) throw std::domain_error("bessel: requires nu > -1");
    if (z < 0.0) throw std::domain_error("bessel: requires z >= 0");
    if (z == 0.0) {
        if (nu > 0.0) return -std::numeric_limits<double>::infinity();
        if (nu == 0.0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    if (z <= 1e-280)  // leading term only; avoids (z/2)^nu underflow games
        return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) - z;
    return z <= kBesselCrossover ? log_bessel_series(nu, z) : log_bessel_asymptotic(nu, z);
}

}  // namespace detail

/// e^{-z} I_nu(z). Power series up to z = 30, uniform asymptotic expansion
/// beyond; the two branches agree to ~1e-12 across the overlap window.
inline double bessel_i_scaled(double nu, double z) {
    if (!(nu >= -0.5)) throw std::domain_error("bessel_i_scaled: requires nu >= -1/2");
    double lg = detail::log_bessel_i_scaled(nu, z);
    return std::isinf(lg) && lg > 0 ? std::numeric_limits<double>::infinity() : std::exp(lg);
}

}  // namespace lagspaces::specfun
