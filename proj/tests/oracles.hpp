#pragma once

// Independent oracles used by the test suites. These deliberately avoid the
// library's evaluation paths: explicit Rodrigues-type sums, long-double
// series, closed forms, and brute-force enumerations.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace oracles {

/// Laguerre polynomial by the explicit Rodrigues/Leibniz expansion
///   L_k^a(x) = sum_{i=0..k} (-1)^i C(k+a, k-i) x^i / i!
/// in long double.
inline long double laguerre_rodrigues(int k, long double a, long double x) {
    long double sum = 0.0L;
    for (int i = 0; i <= k; ++i) {
        // C(k+a, k-i) = prod_{j=1..k-i} (a+i+j) / (k-i)!
        long double binom = 1.0L;
        for (int j = 1; j <= k - i; ++j) binom *= (a + i + j) / j;
        long double xpow = 1.0L, fact = 1.0L;
        for (int j = 1; j <= i; ++j) {
            xpow *= x;
            fact *= j;
        }
        sum += (i % 2 == 0 ? 1.0L : -1.0L) * binom * xpow / fact;
    }
    return sum;
}

/// c_{k,a} = sqrt(2 k! / Gamma(k+a+1)) in long double.
inline long double norm_const_ld(int k, long double a) {
    long double fact = 1.0L;
    for (int j = 1; j <= k; ++j) fact *= j;
    return std::sqrt(2.0L * fact / std::tgammal(k + a + 1.0L));
}

/// e^{-z} I_nu(z) by a 200-term ascending series in long double.
inline long double bessel_i_scaled_series_ld(long double nu, long double z) {
    long double q = 0.25L * z * z;
    long double term = 1.0L, s = 1.0L;
    for (int j = 0; j < 200; ++j) {
        term *= q / ((j + 1.0L) * (nu + j + 1.0L));
        s += term;
    }
    return std::exp(nu * std::log(0.5L * z) - std::lgammal(nu + 1.0L) - z) * s;
}

/// Heat kernel of the 1-d harmonic oscillator -d^2/dx^2 + x^2 (Mehler form).
inline long double mehler_kernel(long double t, long double x, long double y) {
    long double s = std::sinh(2.0L * t);
    long double c = std::cosh(2.0L * t);
    return std::exp(-((x * x + y * y) * c - 2.0L * x * y) / (2.0L * s)) /
           std::sqrt(2.0L * std::numbers::pi_v<long double> * s);
}

/// Even-reflected Mehler kernel: the alpha = -1/2, d = 1 heat kernel.
inline long double mehler_even(long double t, long double x, long double y) {
    return mehler_kernel(t, x, y) + mehler_kernel(t, x, -y);
}

/// (1/|Q|) int_Q |f|^r over a sampled uniform grid, midpoint rule; f given as
/// samples at (i+1/2)h on (0, B]. Cube [lo, hi) in sample coordinates.
struct GridFunction1D {
    std::vector<double> samples;
    double h = 0.0;
    double at(int i) const {
        return (i >= 0 && i < static_cast<int>(samples.size())) ? samples[static_cast<size_t>(i)]
                                                                : 0.0;
    }
};

/// Brute-force uncentered r-maximal value at sample index ix over all cubes
/// [a*h, b*h) with integer endpoints (a < b), clipped to a search window.
inline double maximal_bruteforce_1d(const GridFunction1D& f, double r, int ix, int window) {
    double best = 0.0;
    int n = static_cast<int>(f.samples.size());
    for (int a = ix - window; a <= ix; ++a) {
        for (int b = ix + 1; b <= ix + 1 + window; ++b) {
            double sum = 0.0;
            for (int i = a; i < b; ++i) sum += std::pow(std::abs(f.at(i)), r);
            double avg = sum / (b - a);  // h cancels between integral and |Q|
            best = std::max(best, std::pow(avg, 1.0 / r));
        }
    }
    (void)n;
    return best;
}

}  // namespace oracles
