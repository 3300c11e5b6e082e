#pragma once

// Coefficient-decay diagnostics: the norm families
//   q_N(f) = sup_k (1+|k|)^N |c_k|,
//   p_r(f) = sum_n (n+1)^r (sum_{|k|=n} c_k^2)^{1/2},
// the two proof inequalities tying them together, and a decay probe that
// classifies sampled functions by the slope of their coefficient decay.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagspaces/spectral.hpp"

namespace lagspaces::schwartz {

inline double q_norm(const spectral::CoeffField& f, int N) {
    double best = 0.0;
    for (const auto& e : f.entries())
        best = std::max(best, std::pow(1.0 + e.k.length(), N) * std::abs(e.c));
    return best;
}

inline double p_norm(const spectral::CoeffField& f, double r) {
    if (!(r > 0.0)) throw std::domain_error("p_norm: requires r > 0");
    return spectral::shell_p_norm(f, r);
}

struct NormEquivalenceReport {
    // q_N <= p_{N+(d-1)/2}, constant 1
    double q_side_lhs = 0.0;
    double q_side_rhs = 0.0;
    double q_side_ratio = 0.0;
    // p_N <= (pi^2/6) q_{ceil(N)+d+1}
    double p_side_lhs = 0.0;
    double p_side_rhs = 0.0;
    double p_side_ratio = 0.0;
};

/// Evaluates both domination inequalities between the norm families on a
/// concrete field. Ratios are lhs/rhs with the 0/0 convention ratio = 0.
inline NormEquivalenceReport norm_equivalence_check(const spectral::CoeffField& f, int N) {
    NormEquivalenceReport rep;
    int d = f.dim();
    rep.q_side_lhs = q_norm(f, N);
    rep.q_side_rhs = p_norm(f, N + 0.5 * (d - 1));
    rep.q_side_ratio = rep.q_side_rhs == 0.0 ? 0.0 : rep.q_side_lhs / rep.q_side_rhs;
    rep.p_side_lhs = p_norm(f, N);
    double pi2_6 = lagspaces::sq(std::numbers::pi) / 6.0;
    rep.p_side_rhs = pi2_6 * q_norm(f, N + d + 1);
    rep.p_side_ratio = rep.p_side_rhs == 0.0 ? 0.0 : rep.p_side_lhs / rep.p_side_rhs;
    return rep;
}

struct DecayReport {
    std::vector<double> alpha;
    int K = 0;
    std::vector<int> ladder;       // degree prefixes the slopes were fitted on
    std::vector<double> slopes;    // d log(shell norm) / d log(1+n)
    std::string verdict;           // "super_polynomial" or "polynomial"

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"alpha", alpha}, {"K", K}, {"ladder", ladder}, {"slopes", slopes}, {"verdict", verdict}};
    }
};

/// Expands x^{alpha+1/2} g(x) and fits log(shell l2 norm) against log(1+n)
/// over growing degree prefixes. Smooth multi-even g should show slopes that
/// keep steepening; a kink at the boundary pins them at a finite power.
template <typename Fn>
DecayReport saficharac_probe(Fn&& g, const AlphaIndex& alpha, int K,
                             const numerics::QuadGrid& grid) {
    auto f = [&](const Point& x) {
        double power = 1.0;
        for (int i = 0; i < alpha.dim(); ++i)
            power *= std::pow(x[static_cast<size_t>(i)], alpha[i] + 0.5);
        return power * g(x);
    };
    spectral::CoeffField coeffs = spectral::analyze(f, K, alpha, grid);

    std::map<int, double> shell_sq;
    double peak_sq = 0.0;
    for (const auto& e : coeffs.entries()) shell_sq[e.k.length()] += e.c * e.c;
    for (const auto& [n, ss] : shell_sq) peak_sq = std::max(peak_sq, ss);
    // shells at the quadrature noise floor would flatten the fit
    double floor_sq = peak_sq * 1e-26;

    DecayReport rep;
    rep.alpha = alpha.values;
    rep.K = K;
    for (int prefix : {K / 4, K / 2, 3 * K / 4, K}) {
        // least-squares slope of log(shell norm) vs log(1+n), n in (prefix/2, prefix]
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int n = prefix / 2; n <= prefix; ++n) {
            auto it = shell_sq.find(n);
            if (it == shell_sq.end() || it->second < floor_sq) continue;
            double lx = std::log(1.0 + n), ly = 0.5 * std::log(it->second);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
        }
        if (cnt < 2) continue;
        rep.ladder.push_back(prefix);
        rep.slopes.push_back((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
    }
    bool steepening = rep.slopes.size() >= 2;
    for (std::size_t i = 1; i < rep.slopes.size(); ++i)
        steepening = steepening && rep.slopes[i] < rep.slopes[i - 1] + 1e-9;
    rep.verdict = (steepening && !rep.slopes.empty() && rep.slopes.back() < -6.0)
                      ? "super_polynomial"
                      : "polynomial";
    return rep;
}

}  // namespace lagspaces::schwartz
