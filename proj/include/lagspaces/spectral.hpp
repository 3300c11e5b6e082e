#pragma once

// Finite spectral calculus for the operator L_alpha = -Delta + |x|^2 +
// sum_i (alpha_i^2 - 1/4)/x_i^2 on (0,inf)^d, whose eigenfunctions are the
// Laguerre functions of Hermite type:
//   L_alpha phi_k = lambda_{|k|} phi_k,  lambda_n = 4n + 2|alpha| + 2d.
// Functions and distributions are modeled as finite coefficient fields
// sum_k c_k phi_k^alpha; every operator here acts diagonally on them.

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagspaces/common.hpp"
#include "lagspaces/numerics.hpp"
#include "lagspaces/specfun.hpp"

namespace lagspaces::spectral {

/// lambda_n = 4n + 2|alpha| + 2d.
inline double eigenvalue(int n, const AlphaIndex& alpha, int d) {
    if (alpha.dim() != d) throw std::domain_error("eigenvalue: dimension mismatch");
    return 4.0 * n + 2.0 * alpha.total() + 2.0 * d;
}

/// Finite expansion sum c_k phi_k^alpha. Entries are kept sorted in
/// lexicographic k order; the field is immutable after construction apart
/// from whole-value assignment.
class CoeffField {
  public:
    struct Entry {
        MultiIndex k;
        double c;
    };

    CoeffField() = default;
    CoeffField(AlphaIndex alpha, int d) : alpha_(std::move(alpha)), d_(d) {
        if (alpha_.dim() != d_) throw std::domain_error("CoeffField: dimension mismatch");
    }

    const AlphaIndex& alpha() const { return alpha_; }
    int dim() const { return d_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    void set(const MultiIndex& k, double c) {
        if (k.dim() != d_) throw std::domain_error("CoeffField::set: index dimension mismatch");
        auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                                   [](const Entry& e, const MultiIndex& kk) { return e.k < kk; });
        if (it != entries_.end() && it->k == k)
            it->c = c;
        else
            entries_.insert(it, Entry{k, c});
    }

    double coefficient(const MultiIndex& k) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                                   [](const Entry& e, const MultiIndex& kk) { return e.k < kk; });
        return (it != entries_.end() && it->k == k) ? it->c : 0.0;
    }

    /// Largest |k| present, or -1 for the zero field.
    int degree() const {
        int K = -1;
        for (const auto& e : entries_) K = std::max(K, e.k.length());
        return K;
    }

    double l2_norm() const {
        CompensatedSum s;
        for (const auto& e : entries_) s.add(e.c * e.c);
        return std::sqrt(s.value());
    }

    /// Entry-wise map c_k -> factor(|k|) * c_k.
    template <typename Fn>
    CoeffField mapped_by_shell(Fn&& factor) const {
        CoeffField out(alpha_, d_);
        out.entries_ = entries_;
        for (auto& e : out.entries_) e.c *= factor(e.k.length());
        return out;
    }

    CoeffField operator+(const CoeffField& other) const {
        CoeffField out = *this;
        for (const auto& e : other.entries_) out.set(e.k, out.coefficient(e.k) + e.c);
        return out;
    }
    CoeffField operator-(const CoeffField& other) const {
        CoeffField out = *this;
        for (const auto& e : other.entries_) out.set(e.k, out.coefficient(e.k) - e.c);
        return out;
    }
    CoeffField operator*(double c) const {
        CoeffField out = *this;
        for (auto& e : out.entries_) e.c *= c;
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["alpha"] = alpha_.values;
        j["d"] = d_;
        auto entries = nlohmann::json::array();
        for (const auto& e : entries_) entries.push_back({e.k.values, e.c});
        j["entries"] = entries;
        return j;
    }

    static CoeffField from_json(const nlohmann::json& j) {
        CoeffField f(AlphaIndex(j.at("alpha").get<std::vector<double>>()), j.at("d").get<int>());
        for (const auto& e : j.at("entries"))
            f.set(MultiIndex(e.at(0).get<std::vector<int>>()), e.at(1).get<double>());
        return f;
    }

  private:
    AlphaIndex alpha_;
    int d_ = 0;
    std::vector<Entry> entries_;
};

/// Parameter bundle for the function-space estimators:
/// r0 = min(1,p,q) and m0 = d + max(sigma,0) + floor(d(1/r0 - 1)) + 1.
struct SpaceParams {
    double sigma = 0.0;
    double p = 2.0;  // in (0, inf]
    double q = 2.0;  // in (0, inf]
    int m = 0;
    int M = 0;
    int N = 0;
    int d = 1;

    double r0() const { return std::min({1.0, p, q}); }
    double m0() const {
        return d + std::max(sigma, 0.0) + std::floor(d * (1.0 / r0() - 1.0)) + 1.0;
    }
    bool norm_admissible() const { return m > m0(); }
    /// Synthesis-direction regime for the Besov-type sequence bound.
    bool molecule_regime_besov() const {
        return M > std::max(d / r0() - sigma, static_cast<double>(m)) &&
               N > d * (1.0 / r0() - 1.0) && m > std::max(sigma, 0.0) + N + d;
    }
    /// Same with the stronger N needed on the Triebel-Lizorkin side.
    bool molecule_regime_tl() const {
        return M > std::max(d / r0() - sigma, static_cast<double>(m)) &&
               N > d * (2.0 / r0() - 1.0) && m > std::max(sigma, 0.0) + N + d;
    }
};

inline double synthesize(const CoeffField& f, std::span<const double> x) {
    CompensatedSum s;
    for (const auto& e : f.entries())
        s.add(e.c * specfun::phi_eval(e.k, f.alpha(), x));
    return s.value();
}

/// Per-axis table of phi values on a quadrature grid: basis(axis, k, node).
/// Shared by analyze, the norm estimators and the molecular construction.
class BasisTable {
  public:
    BasisTable(const AlphaIndex& alpha, int kmax, const numerics::QuadGrid& grid)
        : d_(alpha.dim()), kmax_(kmax), n_axis_(grid.axis_size()) {
        values_.resize(static_cast<size_t>(d_));
        for (int i = 0; i < d_; ++i) {
            auto& tab = values_[static_cast<size_t>(i)];
            tab.resize(static_cast<size_t>(kmax + 1) * n_axis_);
            for (std::size_t nidx = 0; nidx < n_axis_; ++nidx) {
                auto col = specfun::phi_axis_table(kmax, alpha[i], grid.axis().nodes[nidx]);
                for (int k = 0; k <= kmax; ++k)
                    tab[static_cast<size_t>(k) * n_axis_ + nidx] = col[static_cast<size_t>(k)];
            }
        }
    }

    int kmax() const { return kmax_; }
    double operator()(int axis, int k, std::size_t node) const {
        return values_[static_cast<size_t>(axis)][static_cast<size_t>(k) * n_axis_ + node];
    }
    /// phi_k^alpha at the tensor node with the given per-axis indices.
    double phi(const MultiIndex& k, std::span<const std::size_t> node) const {
        double v = 1.0;
        for (int i = 0; i < d_; ++i) v *= (*this)(i, k[i], node[static_cast<size_t>(i)]);
        return v;
    }

  private:
    int d_;
    int kmax_;
    std::size_t n_axis_;
    std::vector<std::vector<double>> values_;
};

/// Coefficients c_k = <f, phi_k> for |k| <= K by quadrature.
template <typename Fn>
CoeffField analyze(Fn&& f, int K, const AlphaIndex& alpha, const numerics::QuadGrid& grid) {
    if (alpha.dim() != grid.dim()) throw std::domain_error("analyze: dimension mismatch");
    BasisTable basis(alpha, K, grid);
    auto ks = multi_indices_up_to(grid.dim(), K);

    // Evaluate f once per node, then contract against each phi_k.
    std::size_t total = grid.total_nodes();
    std::vector<double> fw(total);
    {
        std::size_t flat = 0;
        grid.for_each_node([&](const Point& x, std::span<const std::size_t>, double w) {
            double v = f(x);
            if (!std::isfinite(v)) throw quadrature_error("analyze: non-finite sample");
            fw[flat++] = w * v;
        });
    }
    std::vector<double> coeffs(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        CompensatedSum s;
        std::size_t flat = 0;
        grid.for_each_node([&](const Point&, std::span<const std::size_t> node, double) {
            s.add(fw[flat++] * basis.phi(ks[i], node));
        });
        coeffs[i] = s.value();
    });
    CoeffField out(alpha, grid.dim());
    for (std::size_t i = 0; i < ks.size(); ++i) out.set(ks[i], coeffs[i]);
    return out;
}

/// m(L): entry-wise c_k -> m_fn(lambda_{|k|}) c_k.
inline CoeffField apply_multiplier(const std::function<double(double)>& m_fn,
                                   const CoeffField& f) {
    return f.mapped_by_shell(
        [&](int n) { return m_fn(eigenvalue(n, f.alpha(), f.dim())); });
}

/// P_{t,m} = (t sqrt(L))^m e^{-t sqrt(L)}.
inline CoeffField poisson_apply(double t, int m, const CoeffField& f) {
    if (!(t > 0.0)) throw std::domain_error("poisson_apply: requires t > 0");
    return f.mapped_by_shell([&](int n) {
        double u = t * std::sqrt(eigenvalue(n, f.alpha(), f.dim()));
        return std::pow(u, m) * std::exp(-u);
    });
}

/// Shell-wise l2 profile norm p_r(f) = sum_n (n+1)^r (sum_{|k|=n} c_k^2)^{1/2}.
inline double shell_p_norm(const CoeffField& f, double r) {
    std::map<int, double> shells;
    for (const auto& e : f.entries()) shells[e.k.length()] += e.c * e.c;
    CompensatedSum s;
    for (const auto& [n, ss] : shells) s.add(std::pow(n + 1.0, r) * std::sqrt(ss));
    return s.value();
}

struct LimitProfile {
    std::vector<double> t;
    std::vector<double> p_norm;     // p_r of P_{t,m} f, or of (I - P_t) f for m = 0
    bool vanishes_small_t = false;  // profile decreasing toward the small-t end
    bool vanishes_large_t = false;  // profile decreasing toward the large-t end
};

/// Profile of the coefficient norm along t. For m >= 1 the profile of
/// P_{t,m} f must vanish at both ends; for m = 0 the profile of (I - P_t) f
/// must vanish as t -> 0+.
inline LimitProfile limit_profile(const CoeffField& f, int m, std::span<const double> t_list,
                                  double r = 1.0) {
    LimitProfile out;
    for (double t : t_list) {
        double v;
        if (m == 0) {
            CoeffField g = f.mapped_by_shell([&](int n) {
                return 1.0 - std::exp(-t * std::sqrt(eigenvalue(n, f.alpha(), f.dim())));
            });
            v = shell_p_norm(g, r);
        } else {
            v = shell_p_norm(poisson_apply(t, m, f), r);
        }
        out.t.push_back(t);
        out.p_norm.push_back(v);
    }
    auto decreasing_head = [&] {
        return out.p_norm.size() < 2 || out.p_norm.front() <= out.p_norm[1];
    };
    auto decreasing_tail = [&] {
        std::size_t n = out.p_norm.size();
        return n < 2 || out.p_norm[n - 1] <= out.p_norm[n - 2];
    };
    out.vanishes_small_t = decreasing_head();
    out.vanishes_large_t = (m >= 1) ? decreasing_tail() : true;
    return out;
}

}  // namespace lagspaces::spectral
