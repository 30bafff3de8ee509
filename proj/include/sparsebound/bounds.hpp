#pragma once

// Closed-form lower bounds on the minimax risk
//
//     M*(A) = inf_xhat sup_{x k-sparse} E[ (1/n) ||xhat(y) - x||^2 ],
//     y = A x + z,  z ~ N(0, sigma^2 I),
//
// together with the exact known-support risk, brute-force support
// enumeration, the noise-folding reduction for y = A (x + w), and the two
// reference rates (averaging oracle and the l1 rate) used for comparison.
// Logarithms are natural throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>

#include "sparsebound/errors.hpp"
#include "sparsebound/linalg.hpp"

namespace sparsebound {

// A risk that is either a finite non-negative number or unbounded (some
// k-column submatrix is rank deficient).
class RiskValue {
public:
    static RiskValue finite(double v) { return RiskValue(v, false); }
    static RiskValue unbounded() { return RiskValue(0.0, true); }

    bool is_unbounded() const noexcept { return unbounded_; }
    bool is_finite() const noexcept { return !unbounded_; }

    double value() const {
        if (unbounded_) throw precondition_error("RiskValue: value() on an unbounded risk");
        return value_;
    }

    friend bool operator==(const RiskValue&, const RiskValue&) = default;

private:
    RiskValue(double v, bool u) : value_(v), unbounded_(u) {}
    double value_ = 0.0;
    bool unbounded_ = false;
};

enum class NoiseKind { measurement, signal };

struct NoiseModel {
    NoiseKind kind = NoiseKind::measurement;
    double sigma = 1.0;

    NoiseModel(NoiseKind k, double s) : kind(k), sigma(s) {
        detail::require(s > 0.0 && std::isfinite(s), "NoiseModel: sigma must be positive");
    }
};

struct FanoClosedForm {
    double value = 0.0;
    bool vacuous = false;
};

struct SupportRisk {
    RiskValue value = RiskValue::finite(0.0);
    IndexSet support;
};

struct WhitenedDesign {
    DenseMatrix Vstar;  // m' x n, orthonormal rows
    std::size_t rank = 0;
};

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

namespace detail {

inline void require_sparsity(std::size_t k, std::size_t n) {
    require(k >= 1 && k <= n, "sparsity k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                                  ", n=" + std::to_string(n) + ")");
}

inline void require_sigma(double sigma) {
    require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and non-negative");
}

// Requirements of the random packing construction: k even and k < n/2.
inline void require_packing_regime(std::size_t n, std::size_t k) {
    require(k >= 2 && k % 2 == 0, "packing construction requires k even (k=" + std::to_string(k) + ")");
    require(2 * k < n, "packing construction requires k < n/2 (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
}

}  // namespace detail

// C(n, k) as an exact integer, saturating at `cap + 1`.
inline std::size_t binomial_saturating(std::size_t n, std::size_t k, std::size_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    // C(n, i) = C(n, i-1) * (n - i + 1) / i stays integral at every step.
    __extension__ using wide = unsigned __int128;
    wide c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * (n - i + 1) / i;
        if (c > cap) return cap + 1;
    }
    return static_cast<std::size_t>(c);
}

inline double log_binomial(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// k sigma^2 / ||A||_F^2; unbounded when A = 0.
inline RiskValue bound_simple(const DenseMatrix& A, std::size_t k, double sigma) {
    detail::require_sparsity(k, A.cols());
    detail::require_sigma(sigma);
    const double fro = frobenius_norm_sq(A);
    if (fro == 0.0) return RiskValue::unbounded();
    return RiskValue::finite(static_cast<double>(k) * sigma * sigma / fro);
}

// sigma^2 ((k/4) ln(n/k) - 2) / (32 (1 + beta) ||A||_F^2), clamped to zero and
// flagged vacuous when the numerator is non-positive. Asymptotically this is
// k sigma^2 ln(n/k) / (128 ||A||_F^2).
inline FanoClosedForm bound_fano_closed(double frobenius_sq, std::size_t n, std::size_t k, double sigma,
                                        double beta) {
    detail::require_packing_regime(n, k);
    detail::require(beta >= 0.0 && std::isfinite(beta), "bound_fano_closed: beta must be non-negative");
    detail::require(frobenius_sq > 0.0 && std::isfinite(frobenius_sq),
                    "bound_fano_closed: ||A||_F^2 must be positive");
    detail::require_sigma(sigma);
    const double kd = static_cast<double>(k);
    const double numerator = kd / 4.0 * std::log(static_cast<double>(n) / kd) - 2.0;
    if (numerator <= 0.0) return {0.0, true};
    return {sigma * sigma * numerator / (32.0 * (1.0 + beta) * frobenius_sq), false};
}

// Exact minimax risk when the support T is known:
// (sigma^2 / n) * sum_i 1 / lambda_i(A_T^T A_T).
inline RiskValue oracle_support_risk(const DenseMatrix& A, std::span<const std::size_t> T, double sigma,
                                     std::size_t n) {
    detail::require_sigma(sigma);
    detail::require(n >= 1, "oracle_support_risk: n must be positive");
    const DenseMatrix AT = column_submatrix(A, T);
    if (AT.cols() > AT.rows()) return RiskValue::unbounded();
    const auto eig = sym_eigen(gram_columns(AT));
    const double lambda_max = eig.eigenvalues.back();
    if (lambda_max <= 0.0) return RiskValue::unbounded();
    const double floor = std::max(gram_eigen_floor(AT.cols()), kRankTolerance * kRankTolerance) * lambda_max;
    double sum_inv = 0.0;
    for (double lambda : eig.eigenvalues) {
        if (lambda <= floor) return RiskValue::unbounded();
        sum_inv += 1.0 / lambda;
    }
    return RiskValue::finite(sigma * sigma / static_cast<double>(n) * sum_inv);
}

// Maximum of oracle_support_risk over every support of size k, enumerated in
// lexicographic order. Ties keep the lexicographically smallest support.
inline SupportRisk minimax_supports_bruteforce(const DenseMatrix& A, std::size_t k, double sigma,
                                               std::size_t cap = kDefaultEnumerationCap) {
    const std::size_t n = A.cols();
    detail::require_sparsity(k, n);
    detail::require_sigma(sigma);
    const std::size_t count = binomial_saturating(n, k, cap);
    detail::require(count <= cap, "minimax_supports_bruteforce: C(" + std::to_string(n) + "," +
                                      std::to_string(k) + ") exceeds the enumeration cap " +
                                      std::to_string(cap));

    IndexSet T(k);
    std::iota(T.begin(), T.end(), std::size_t{0});
    SupportRisk best{RiskValue::finite(-1.0), {}};
    while (true) {
        const RiskValue r = oracle_support_risk(A, T, sigma, n);
        if (r.is_unbounded()) return {r, T};
        if (r.value() > best.value.value()) best = {r, T};

        // Next combination in lexicographic order.
        std::size_t i = k;
        while (i > 0 && T[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++T[i - 1];
        for (std::size_t j = i; j < k; ++j) T[j] = T[j - 1] + 1;
    }
    return best;
}

// k^2 sigma^2 / (n ||A_T0||_F^2) where T0 holds the k columns of smallest
// norm (ties by index). Lies between bound_simple and the brute-force value.
inline SupportRisk worst_columns_bound(const DenseMatrix& A, std::size_t k, double sigma) {
    const std::size_t n = A.cols();
    detail::require_sparsity(k, n);
    detail::require_sigma(sigma);
    Vector col_norm(n, 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto row = A.row(i);
        for (std::size_t j = 0; j < n; ++j) col_norm[j] += row[j] * row[j];
    }
    IndexSet order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return col_norm[a] < col_norm[b]; });
    IndexSet T0(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(T0.begin(), T0.end());
    double fro_T0 = 0.0;
    for (std::size_t j : T0) fro_T0 += col_norm[j];
    if (fro_T0 == 0.0) return {RiskValue::unbounded(), T0};
    const double kd = static_cast<double>(k);
    return {RiskValue::finite(kd * kd * sigma * sigma / (static_cast<double>(n) * fro_T0)), T0};
}

// (k sigma^2 / m)(k / n): risk of measuring each support coefficient m/k
// times and averaging.
inline double averaging_oracle_risk(std::size_t n, std::size_t k, std::size_t m, double sigma) {
    detail::require_sparsity(k, n);
    detail::require(m >= 1 && m % k == 0, "averaging_oracle_risk: k must divide m");
    detail::require_sigma(sigma);
    const double kd = static_cast<double>(k);
    return kd * sigma * sigma / static_cast<double>(m) * (kd / static_cast<double>(n));
}

// C0 k sigma^2 ln(n) / m. A comparison curve for l1 estimators, not a bound.
inline double dantzig_reference_rate(std::size_t n, std::size_t k, std::size_t m, double sigma, double C0 = 1.0) {
    detail::require(n >= 1 && k >= 1 && m >= 1 && sigma > 0.0 && C0 > 0.0,
                    "dantzig_reference_rate: arguments must be positive");
    return C0 * static_cast<double>(k) * sigma * sigma * std::log(static_cast<double>(n)) / static_cast<double>(m);
}

// For y = A (x + w): applying Sigma^{-1} U^T leaves y' = V^T x + V^T w with
// noise covariance sigma^2 I, so the measurement-noise bounds apply to V^T.
inline WhitenedDesign whiten_noise_folding(const DenseMatrix& A, double sigma) {
    detail::require_sigma(sigma);
    const ReducedSvd svd = reduced_svd(A);
    detail::require(svd.rank > 0, "whiten_noise_folding: matrix is zero");
    return {svd.V.transpose(), svd.rank};
}

}  // namespace sparsebound
