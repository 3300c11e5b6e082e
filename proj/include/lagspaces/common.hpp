#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lagspaces {

using Point = std::vector<double>;

/// Multi-index k in N^d.
struct MultiIndex {
    std::vector<int> values;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> v) : values(std::move(v)) {}
    MultiIndex(std::initializer_list<int> v) : values(v) {}

    int dim() const { return static_cast<int>(values.size()); }
    int length() const { return std::accumulate(values.begin(), values.end(), 0); }
    int operator[](int i) const { return values[static_cast<size_t>(i)]; }

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Laguerre-type multi-index alpha in (-1,inf)^d.
struct AlphaIndex {
    enum class Validity { general, kernel_safe, space_admissible };

    std::vector<double> values;

    AlphaIndex() = default;
    explicit AlphaIndex(std::vector<double> v) : values(std::move(v)) { check(); }
    AlphaIndex(std::initializer_list<double> v) : values(v) { check(); }

    int dim() const { return static_cast<int>(values.size()); }
    double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }

    bool is_kernel_safe() const {
        return std::all_of(values.begin(), values.end(), [](double a) { return a >= -0.5; });
    }
    // [-1/2,inf)^d minus the open box (-1/2,1/2)^d.
    bool is_space_admissible() const {
        if (!is_kernel_safe()) return false;
        return std::any_of(values.begin(), values.end(),
                           [](double a) { return a == -0.5 || a >= 0.5; });
    }
    Validity classify() const {
        if (is_space_admissible()) return Validity::space_admissible;
        if (is_kernel_safe()) return Validity::kernel_safe;
        return Validity::general;
    }

  private:
    void check() const {
        for (double a : values)
            if (!(a > -1.0)) throw std::domain_error("AlphaIndex: components must exceed -1");
    }
};

struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a precondition or an unresolved-tail situation forbids an answer.
struct refusal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sign + log-magnitude representation of a real number.
struct SignedLog {
    double log_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;  // 0 encodes exact zero

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

    friend SignedLog operator*(const SignedLog& a, const SignedLog& b) {
        if (a.sign == 0 || b.sign == 0) return {};
        return {a.log_abs + b.log_abs, a.sign * b.sign};
    }
};

inline SignedLog signed_log(double x) {
    if (x == 0.0) return {};
    return {std::log(std::abs(x)), x > 0 ? 1 : -1};
}

/// Neumaier compensated accumulator; summation order is the caller's contract.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// splitmix64: tiny deterministic generator, identical on every platform.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Uniform integer in [0,n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

  private:
    std::uint64_t state_;
};

namespace runtime {

inline std::atomic<int>& thread_count_storage() {
    static std::atomic<int> n{0};
    return n;
}
inline void set_thread_count(int n) { thread_count_storage().store(n); }
inline int thread_count() {
    int n = thread_count_storage().load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace runtime

/// Static-partition parallel map. Workers fill disjoint index ranges, so results
/// are bitwise independent of the thread count; reduce afterwards in index order.
/// The first worker exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int threads = std::min<int>(runtime::thread_count(), static_cast<int>(n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::size_t chunk = (n + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
    for (int t = 0; t < threads; ++t) {
        std::size_t lo = static_cast<size_t>(t) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &error, &failed] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// 17 significant digits, enough to round-trip a double exactly.
inline std::string sig17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double sq(double x) { return x * x; }

inline double dist2(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - y[i]);
    return s;
}

inline double norm2sq(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// Enumerate all k in N^d with |k| <= K, lexicographic order.
inline std::vector<MultiIndex> multi_indices_up_to(int d, int K) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<size_t>(d), 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == d - 1) {
            for (int v = 0; v <= remaining; ++v) {
                cur[static_cast<size_t>(pos)] = v;
                out.push_back(MultiIndex{cur});
            }
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[static_cast<size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    if (d > 0) rec(rec, 0, K);
    return out;
}

}  // namespace lagspaces
