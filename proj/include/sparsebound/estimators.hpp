#pragma once

// Concrete estimators for y = A x + z and a seeded Monte Carlo harness that
// measures their normalized risk (1/n) ||xhat - x||^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/packing.hpp"
#include "sparsebound/random.hpp"

namespace sparsebound {

// An estimator could not produce an estimate for one trial (rank-deficient
// support, Lasso non-convergence).
class estimator_failure : public numerical_error {
public:
    explicit estimator_failure(const std::string& what) : numerical_error(what) {}
};

// Estimators see the design, the observation, and the true support. Only
// oracle estimators look at the support.
using EstimatorFn =
    std::function<Vector(const DenseMatrix& A, std::span<const double> y, std::span<const std::size_t> true_support)>;

struct NamedEstimator {
    std::string name;
    EstimatorFn fn;
};

struct RiskEstimate {
    std::string estimator;
    double mean_risk = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t failures = 0;
};

struct LassoOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10'000;
    bool record_objective = false;
};

struct LassoResult {
    Vector x;
    std::size_t cycles = 0;
    bool converged = false;
    Vector objective;  // after each cycle, when requested
};

// Least squares restricted to T, zero elsewhere. Solved through the
// eigendecomposition of A_T^T A_T.
inline SparseVector oracle_ls(const DenseMatrix& A, std::span<const std::size_t> T, std::span<const double> y) {
    detail::require(y.size() == A.rows(), "oracle_ls: observation length must equal rows of A");
    const DenseMatrix AT = column_submatrix(A, T);
    IndexSet support(T.begin(), T.end());
    std::sort(support.begin(), support.end());
    if (AT.cols() > AT.rows()) throw estimator_failure("oracle_ls: support larger than number of measurements");

    const auto eig = sym_eigen(gram_columns(AT));
    const double lambda_max = eig.eigenvalues.back();
    const double floor = std::max(gram_eigen_floor(AT.cols()), kRankTolerance * kRankTolerance) * lambda_max;
    if (lambda_max <= 0.0 || eig.eigenvalues.front() <= floor) {
        throw estimator_failure("oracle_ls: A_T is rank deficient");
    }
    const Vector b = matvec_transposed(AT, y);
    const std::size_t k = AT.cols();
    Vector coef(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double proj = 0.0;
        for (std::size_t r = 0; r < k; ++r) proj += eig.eigenvectors(r, j) * b[r];
        proj /= eig.eigenvalues[j];
        for (std::size_t r = 0; r < k; ++r) coef[r] += eig.eigenvectors(r, j) * proj;
    }
    return {A.cols(), std::move(support), std::move(coef)};
}

// m x n design measuring each index of T exactly m/k times: rows are standard
// basis vectors in ascending T order, repeats contiguous.
inline DenseMatrix averaging_design(std::size_t n, std::size_t k, std::size_t m, std::span<const std::size_t> T) {
    detail::require(k >= 1 && m >= 1 && m % k == 0, "averaging_design: k must divide m");
    detail::require(T.size() == k, "averaging_design: |T| must equal k");
    IndexSet sorted(T.begin(), T.end());
    std::sort(sorted.begin(), sorted.end());
    detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() && sorted.back() < n,
                    "averaging_design: T must be duplicate-free indices below n");
    DenseMatrix D(m, n);
    const std::size_t reps = m / k;
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t r = 0; r < reps; ++r) D(t * reps + r, sorted[t]) = 1.0;
    return D;
}

inline double soft_threshold(double v, double thr) {
    if (v > thr) return v - thr;
    if (v < -thr) return v + thr;
    return 0.0;
}

inline double lasso_objective(const DenseMatrix& A, std::span<const double> y, std::span<const double> x,
                              double lambda) {
    const Vector Ax = matvec(A, x);
    double rss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) rss += (y[i] - Ax[i]) * (y[i] - Ax[i]);
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    return 0.5 * rss + lambda * l1;
}

// Cyclic coordinate descent for (1/2) ||y - A x||^2 + lambda ||x||_1 with an
// incrementally maintained residual. Stops when no coordinate moves by more
// than tol in a full cycle. Zero columns keep coefficient 0.
inline LassoResult lasso_cd(const DenseMatrix& A, std::span<const double> y, double lambda,
                            const LassoOptions& opts = {}) {
    detail::require(lambda > 0.0 && std::isfinite(lambda), "lasso_cd: lambda must be positive");
    detail::require(y.size() == A.rows(), "lasso_cd: observation length must equal rows of A");
    const std::size_t m = A.rows();
    const std::size_t n = A.cols();
    const DenseMatrix At = A.transpose();
    Vector col_sq(n);
    for (std::size_t j = 0; j < n; ++j) col_sq[j] = norm_sq(At.row(j));

    LassoResult res;
    res.x.assign(n, 0.0);
    Vector r(y.begin(), y.end());
    for (res.cycles = 0; res.cycles < opts.max_iter && !res.converged;) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (col_sq[j] == 0.0) continue;
            auto a = At.row(j);
            const double rho = res.x[j] + dot(a, r) / col_sq[j];
            const double next = soft_threshold(rho, lambda / col_sq[j]);
            const double delta = next - res.x[j];
            if (delta == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) r[i] -= delta * a[i];
            res.x[j] = next;
            max_change = std::max(max_change, std::abs(delta));
        }
        ++res.cycles;
        if (opts.record_objective) res.objective.push_back(lasso_objective(A, y, res.x, lambda));
        res.converged = max_change <= opts.tol;
    }
    return res;
}

// 2 sigma sqrt(2 ln n) * max column norm.
inline double default_lasso_lambda(const DenseMatrix& A, double sigma) {
    double max_col = 0.0;
    const DenseMatrix At = A.transpose();
    for (std::size_t j = 0; j < At.rows(); ++j) max_col = std::max(max_col, norm_sq(At.row(j)));
    return 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(A.cols()))) * std::sqrt(max_col);
}

// Oracle least squares on a fixed support, or on the true support when
// `support` is empty.
inline NamedEstimator make_oracle_ls(IndexSet support = {}) {
    return {"oracle-ls", [support = std::move(support)](const DenseMatrix& A, std::span<const double> y,
                                                        std::span<const std::size_t> truth) {
                const std::span<const std::size_t> T = support.empty() ? truth : std::span(support);
                return oracle_ls(A, T, y).to_dense();
            }};
}

inline NamedEstimator make_lasso(double lambda, LassoOptions opts = {}) {
    return {"lasso", [lambda, opts](const DenseMatrix& A, std::span<const double> y, std::span<const std::size_t>) {
                auto res = lasso_cd(A, y, lambda, opts);
                if (!res.converged) throw estimator_failure("lasso_cd: no convergence");
                return std::move(res.x);
            }};
}

inline NamedEstimator make_zero_estimator() {
    return {"zero", [](const DenseMatrix& A, std::span<const double>, std::span<const std::size_t>) {
                return Vector(A.cols(), 0.0);
            }};
}

// Failures beyond this fraction of trials abort the run.
inline constexpr double kMaxFailureFraction = 0.01;

namespace detail {

// Runs trial(t, rng) -> risk for t = 0..trials-1 with rng seeded from
// (seed, t), accumulating in trial order.
template <class Trial>
RiskEstimate run_trials(const std::string& name, std::size_t trials, std::uint64_t seed, Trial&& trial) {
    require(trials >= 2, "Monte Carlo runs need at least 2 trials");
    RiskEstimate est;
    est.estimator = name;
    est.trials = trials;
    est.seed = seed;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Engine rng = make_stream(seed, t);
        try {
            const double risk = trial(rng);
            sum += risk;
            sum_sq += risk * risk;
        } catch (const estimator_failure&) {
            ++est.failures;
        }
    }
    if (static_cast<double>(est.failures) >= kMaxFailureFraction * static_cast<double>(trials)) {
        throw numerical_error("estimator '" + name + "' failed on " + std::to_string(est.failures) + " of " +
                              std::to_string(trials) + " trials");
    }
    const double ok = static_cast<double>(trials - est.failures);
    est.mean_risk = sum / ok;
    const double var = std::max(0.0, (sum_sq - ok * est.mean_risk * est.mean_risk) / (ok - 1.0));
    est.std_error = std::sqrt(var / ok);
    return est;
}

inline double normalized_error(std::span<const double> xhat, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (xhat[i] - x[i]) * (xhat[i] - x[i]);
    return s / static_cast<double>(x.size());
}

inline double estimate_once(const DenseMatrix& A, const NamedEstimator& est, const SparseVector& x, double sigma,
                            Engine& rng) {
    Vector y = apply(A, x);
    if (sigma > 0.0) {
        const Vector z = gaussian_vector(rng, y.size(), sigma);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += z[i];
    }
    const Vector xhat = est.fn(A, y, x.support);
    require(xhat.size() == A.cols(), "estimator returned a vector of the wrong length");
    return normalized_error(xhat, x.to_dense());
}

}  // namespace detail

// Risk at a fixed signal: noise for trial t comes from stream (seed, t).
inline RiskEstimate mc_risk(const DenseMatrix& A, const NamedEstimator& est, const SparseVector& x_true,
                            double sigma, std::size_t trials, std::uint64_t seed) {
    detail::require(x_true.n == A.cols(), "mc_risk: signal dimension must equal columns of A");
    detail::require_sigma(sigma);
    return detail::run_trials(est.name, trials, seed,
                              [&](Engine& rng) { return detail::estimate_once(A, est, x_true, sigma, rng); });
}

// Bayes risk with x uniform on the packing rescaled by 4 sqrt(n M). For
// M < M_cert no estimator can get this below M.
inline RiskEstimate packing_bayes_risk(const DenseMatrix& A, const PackingSet& P, double M, const NamedEstimator& est,
                                       double sigma, std::size_t trials, std::uint64_t seed) {
    detail::require(P.scale == 1.0, "packing_bayes_risk: packing must be at unit scale");
    detail::require(P.size() >= 1 && P.n == A.cols(), "packing_bayes_risk: packing dimension must equal columns of A");
    detail::require(M > 0.0 && std::isfinite(M), "packing_bayes_risk: M must be positive");
    detail::require_sigma(sigma);
    const double c = 4.0 * std::sqrt(static_cast<double>(P.n) * M);
    std::vector<SparseVector> scaled;
    scaled.reserve(P.size());
    for (const auto& x : P.points) scaled.push_back(x.scaled(c));
    return detail::run_trials(est.name, trials, seed, [&](Engine& rng) {
        std::uniform_int_distribution<std::size_t> pick(0, scaled.size() - 1);
        const SparseVector& x = scaled[pick(rng)];
        return detail::estimate_once(A, est, x, sigma, rng);
    });
}

// k-sparse signal with uniformly random support and entries +-amplitude.
inline SparseVector random_sign_signal(std::size_t n, std::size_t k, double amplitude, Engine& rng) {
    detail::require_sparsity(k, n);
    IndexSet idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    SparseVector x{n, IndexSet(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k)), Vector(k)};
    std::sort(x.support.begin(), x.support.end());
    std::bernoulli_distribution coin(0.5);
    for (double& v : x.values) v = coin(rng) ? amplitude : -amplitude;
    return x;
}

// Risk averaged over fresh random sign signals of the given amplitude.
inline RiskEstimate random_signal_risk(const DenseMatrix& A, const NamedEstimator& est, std::size_t k,
                                       double amplitude, double sigma, std::size_t trials, std::uint64_t seed) {
    detail::require_sigma(sigma);
    return detail::run_trials(est.name, trials, seed, [&](Engine& rng) {
        const SparseVector x = random_sign_signal(A.cols(), k, amplitude, rng);
        return detail::estimate_once(A, est, x, sigma, rng);
    });
}

}  // namespace sparsebound
