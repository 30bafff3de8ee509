#pragma once

// Random packing sets of k-sparse sign vectors.
//
// Points are drawn uniformly from the universe
//
//     U = { x in {0, +1/sqrt(k), -1/sqrt(k)}^n : ||x||_0 = k },
//
// and a candidate is kept only if its squared distance to every point already
// accepted is at least 1/2. The module also measures the empirical second
// moment Q against I/n (reported as beta = n ||Q - I/n||), evaluates the
// probability bounds that make such a set exist, and tabulates the matrix
// Bernstein tail against simulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/random.hpp"

namespace sparsebound {

struct SparseVector {
    std::size_t n = 0;
    IndexSet support;  // sorted, duplicate-free
    Vector values;     // aligned with support

    Vector to_dense() const {
        Vector d(n, 0.0);
        for (std::size_t i = 0; i < support.size(); ++i) d[support[i]] = values[i];
        return d;
    }

    SparseVector scaled(double c) const {
        SparseVector s = *this;
        for (double& v : s.values) v *= c;
        return s;
    }

    double norm_sq() const { return sparsebound::norm_sq(values); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

// ||a - b||^2 by merging the two sorted supports.
inline double squared_distance(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.support.size() || j < b.support.size()) {
        double d;
        if (j == b.support.size() || (i < a.support.size() && a.support[i] < b.support[j])) {
            d = a.values[i++];
        } else if (i == a.support.size() || b.support[j] < a.support[i]) {
            d = -b.values[j++];
        } else {
            d = a.values[i++] - b.values[j++];
        }
        s += d * d;
    }
    return s;
}

// a - b as a sparse vector over the union of the supports.
inline SparseVector difference(const SparseVector& a, const SparseVector& b) {
    detail::require(a.n == b.n, "difference: dimension mismatch");
    SparseVector d{a.n, {}, {}};
    std::size_t p = 0;
    std::size_t q = 0;
    while (p < a.support.size() || q < b.support.size()) {
        if (q == b.support.size() || (p < a.support.size() && a.support[p] < b.support[q])) {
            d.support.push_back(a.support[p]);
            d.values.push_back(a.values[p++]);
        } else if (p == a.support.size() || b.support[q] < a.support[p]) {
            d.support.push_back(b.support[q]);
            d.values.push_back(-b.values[q++]);
        } else {
            d.support.push_back(a.support[p]);
            d.values.push_back(a.values[p++] - b.values[q++]);
        }
    }
    return d;
}

// A x for sparse x.
inline Vector apply(const DenseMatrix& A, const SparseVector& x) {
    detail::require(x.n == A.cols(), "apply: dimension mismatch");
    Vector y(A.rows(), 0.0);
    for (std::size_t r = 0; r < A.rows(); ++r) {
        auto row = A.row(r);
        double s = 0.0;
        for (std::size_t i = 0; i < x.support.size(); ++i) s += row[x.support[i]] * x.values[i];
        y[r] = s;
    }
    return y;
}

struct PackingSet {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<SparseVector> points;
    double scale = 1.0;
    double measured_min_dist_sq = 0.0;
    double measured_beta = 0.0;
    std::uint64_t seed = 0;
    std::size_t redraws = 0;  // rejected candidates during construction

    std::size_t size() const noexcept { return points.size(); }
};

struct MomentSummary {
    Vector mu;
    DenseMatrix Q;
    double beta_measured = 0.0;
};

// Universe points are spaced in multiples of 1/k; the slack absorbs rounding
// in 1/sqrt(k)^2.
inline constexpr double kDistanceSlack = 1e-12;
inline constexpr double kMinSeparationSq = 0.5;

// The universe is defined for any 1 <= k <= n; only the packing needs k even
// and 2k < n.
inline SparseVector universe_sample(std::size_t n, std::size_t k, Engine& rng) {
    detail::require(k >= 1 && k <= n, "universe_sample: need 1 <= k <= n");
    IndexSet idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    SparseVector x{n, IndexSet(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k)), Vector(k)};
    std::sort(x.support.begin(), x.support.end());
    const double mag = std::sqrt(1.0 / static_cast<double>(k));
    std::bernoulli_distribution coin(0.5);
    for (double& v : x.values) v = coin(rng) ? mag : -mag;
    return x;
}

// ceil((n/k)^(k/4)).
inline std::size_t lemma_size(std::size_t n, std::size_t k) {
    detail::require_packing_regime(n, k);
    const double exact = std::pow(static_cast<double>(n) / static_cast<double>(k), static_cast<double>(k) / 4.0);
    detail::require(exact < 9.0e15, "lemma_size: (n/k)^(k/4) is too large to materialize");
    const double nearest = std::round(exact);
    if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(exact));
}

inline double verify_min_distance(const PackingSet& P) {
    detail::require(P.size() >= 2, "verify_min_distance: need at least two points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = i + 1; j < P.size(); ++j) best = std::min(best, squared_distance(P.points[i], P.points[j]));
    return best;
}

inline MomentSummary empirical_moments(const PackingSet& P) {
    detail::require(P.size() >= 1, "empirical_moments: empty packing");
    const std::size_t n = P.n;
    MomentSummary out{Vector(n, 0.0), DenseMatrix(n, n), 0.0};
    for (const auto& x : P.points) {
        for (std::size_t a = 0; a < x.support.size(); ++a) {
            out.mu[x.support[a]] += x.values[a];
            for (std::size_t b = 0; b < x.support.size(); ++b)
                out.Q(x.support[a], x.support[b]) += x.values[a] * x.values[b];
        }
    }
    const double count = static_cast<double>(P.size());
    for (double& v : out.mu) v /= count;
    DenseMatrix deviation(n, n);
    const double s2 = P.scale * P.scale;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            out.Q(i, j) /= count;
            deviation(i, j) = out.Q(i, j) - (i == j ? s2 / static_cast<double>(n) : 0.0);
        }
    out.beta_measured = static_cast<double>(n) * operator_norm_sym(deviation) / s2;
    return out;
}

// Max entrywise gap between (1/N^2) sum_ij (x_i - x_j)(x_i - x_j)^T, summed
// pair by pair, and 2 (Q - mu mu^T) from the moments.
inline double scatter_identity_check(const PackingSet& P) {
    detail::require(P.size() >= 2, "scatter_identity_check: need at least two points");
    const std::size_t n = P.n;
    DenseMatrix lhs(n, n);
    for (std::size_t i = 0; i < P.size(); ++i) {
        for (std::size_t j = 0; j < P.size(); ++j) {
            if (i == j) continue;
            const SparseVector d = difference(P.points[i], P.points[j]);
            const auto& idx = d.support;
            const auto& val = d.values;
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t c = 0; c < idx.size(); ++c) lhs(idx[r], idx[c]) += val[r] * val[c];
        }
    }
    const double count_sq = static_cast<double>(P.size()) * static_cast<double>(P.size());
    const auto moments = empirical_moments(P);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double rhs = 2.0 * (moments.Q(i, j) - moments.mu[i] * moments.mu[j]);
            worst = std::max(worst, std::abs(lhs(i, j) / count_sq - rhs));
        }
    return worst;
}

// Returns P with every point multiplied by c.
inline PackingSet rescaled(const PackingSet& P, double c) {
    detail::require(c > 0.0 && std::isfinite(c), "rescaled: factor must be positive");
    PackingSet out = P;
    for (auto& x : out.points) x = x.scaled(c);
    out.scale *= c;
    out.measured_min_dist_sq *= c * c;
    return out;
}

inline constexpr std::size_t kDefaultAttemptsPerPoint = 100;

// Draws points from the universe, rejecting and redrawing any candidate that
// falls within squared distance 1/2 of an accepted point. Fails once more than
// `max_attempts` candidates have been rejected (default 100 * size).
inline PackingSet build_packing(std::size_t n, std::size_t k, std::size_t size, std::uint64_t seed,
                                std::size_t max_attempts = 0) {
    detail::require_packing_regime(n, k);
    detail::require(size >= 2, "build_packing: size must be at least 2");
    if (max_attempts == 0) max_attempts = kDefaultAttemptsPerPoint * size;

    Engine rng = make_stream(seed, 0);
    PackingSet P;
    P.n = n;
    P.k = k;
    P.seed = seed;
    P.points.reserve(size);
    while (P.points.size() < size) {
        SparseVector candidate = universe_sample(n, k, rng);
        const bool separated = std::all_of(P.points.begin(), P.points.end(), [&](const SparseVector& x) {
            return squared_distance(candidate, x) >= kMinSeparationSq - kDistanceSlack;
        });
        if (separated) {
            P.points.push_back(std::move(candidate));
        } else if (++P.redraws > max_attempts) {
            throw numerical_error("build_packing: exhausted " + std::to_string(max_attempts) +
                                  " redraws after accepting " + std::to_string(P.points.size()) + " of " +
                                  std::to_string(size) + " points");
        }
    }
    P.measured_min_dist_sq = verify_min_distance(P);
    P.measured_beta = empirical_moments(P).beta_measured;
    return P;
}

// Union bound on the probability that `size` independent universe draws
// violate the separation: size^2/2 * C(n,k/2)/C(n,k) * (sqrt(3)/2)^k.
inline double p1_bound(std::size_t n, std::size_t k, std::size_t size) {
    detail::require_packing_regime(n, k);
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double log_value = 2.0 * std::log(static_cast<double>(size)) - std::log(2.0) +
                             log_binomial(nd, kd / 2.0) - log_binomial(nd, kd) + kd * std::log(std::sqrt(3.0) / 2.0);
    return std::exp(log_value);
}

// 2n exp(-beta^2 size / (4n)): bound on the probability that
// ||Q - I/n|| exceeds beta/n.
inline double p2_bound(std::size_t n, std::size_t size, double beta) {
    detail::require(beta > 0.0, "p2_bound: beta must be positive");
    const double nd = static_cast<double>(n);
    return 2.0 * nd * std::exp(-beta * beta * static_cast<double>(size) / (4.0 * nd));
}

// Smallest beta with p2_bound(n, size, beta) <= 1/2.
inline double beta_min(std::size_t n, std::size_t size) {
    detail::require(size >= 1 && n >= 1, "beta_min: size and n must be positive");
    const double nd = static_cast<double>(n);
    return std::sqrt(4.0 * nd * std::log(4.0 * nd) / static_cast<double>(size));
}

// Matrix Bernstein tail 2n exp(-t^2 / (4 rho^2)), valid for t in [0, 2 rho^2].
inline double bernstein_tail(std::size_t n, double rho_sq, double t) {
    detail::require(rho_sq > 0.0, "bernstein_tail: rho^2 must be positive");
    detail::require(t >= 0.0 && t <= 2.0 * rho_sq, "bernstein_tail: t outside [0, 2 rho^2]");
    return 2.0 * static_cast<double>(n) * std::exp(-t * t / (4.0 * rho_sq));
}

struct BernsteinRow {
    double t = 0.0;
    double empirical = 0.0;  // fraction of repetitions with ||sum X_i|| >= t
    double std_error = 0.0;  // binomial standard error of `empirical`
    double analytic = 0.0;
};

struct BernsteinStudy {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t size = 0;
    std::size_t reps = 0;
    double rho_sq = 0.0;
    std::vector<BernsteinRow> rows;
    // Per-draw statistics of X = x x^T - I/n over reps * size draws.
    std::size_t draws = 0;
    double max_term_norm = 0.0;
    std::size_t term_norm_violations = 0;  // draws with ||X|| > 1
    DenseMatrix mean_X, stderr_X;
    DenseMatrix mean_X_sq, stderr_X_sq;
};

inline constexpr std::size_t kBernsteinGridPoints = 5;

// Repeatedly draws `size` universe points, forms sum_i (x_i x_i^T - I/n) and
// records how often its operator norm reaches each t on the grid
// 2 rho^2 * j / 5, j = 1..5, with rho^2 = size (n - 1) / n^2.
inline BernsteinStudy bernstein_empirical(std::size_t n, std::size_t k, std::size_t size, std::size_t reps,
                                          std::uint64_t seed) {
    detail::require_packing_regime(n, k);
    detail::require(size >= 1 && reps >= 2, "bernstein_empirical: need size >= 1 and reps >= 2");
    const double nd = static_cast<double>(n);

    BernsteinStudy st;
    st.n = n;
    st.k = k;
    st.size = size;
    st.reps = reps;
    st.rho_sq = static_cast<double>(size) * (nd - 1.0) / (nd * nd);
    for (std::size_t j = 1; j <= kBernsteinGridPoints; ++j) {
        BernsteinRow row;
        row.t = 2.0 * st.rho_sq * static_cast<double>(j) / static_cast<double>(kBernsteinGridPoints);
        row.analytic = bernstein_tail(n, st.rho_sq, row.t);
        st.rows.push_back(row);
    }

    DenseMatrix sum_X(n, n), sum_X2(n, n), sum_Xsq(n, n), sum_Xsq2(n, n);
    std::vector<std::size_t> exceed(st.rows.size(), 0);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Engine rng = make_stream(seed, rep);
        DenseMatrix total(n, n);
        for (std::size_t d = 0; d < size; ++d) {
            const Vector x = universe_sample(n, k, rng).to_dense();
            DenseMatrix X(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) X(i, j) = x[i] * x[j] - (i == j ? 1.0 / nd : 0.0);
            const double term_norm = operator_norm_sym(X);
            st.max_term_norm = std::max(st.max_term_norm, term_norm);
            if (term_norm > 1.0) ++st.term_norm_violations;
            const DenseMatrix Xsq = multiply(X, X);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    total(i, j) += X(i, j);
                    sum_X(i, j) += X(i, j);
                    sum_X2(i, j) += X(i, j) * X(i, j);
                    sum_Xsq(i, j) += Xsq(i, j);
                    sum_Xsq2(i, j) += Xsq(i, j) * Xsq(i, j);
                }
        }
        const double total_norm = operator_norm_sym(total);
        for (std::size_t g = 0; g < st.rows.size(); ++g)
            if (total_norm >= st.rows[g].t) ++exceed[g];
    }

    const double r = static_cast<double>(reps);
    for (std::size_t g = 0; g < st.rows.size(); ++g) {
        const double p = static_cast<double>(exceed[g]) / r;
        st.rows[g].empirical = p;
        st.rows[g].std_error = std::sqrt(p * (1.0 - p) / r);
    }

    st.draws = reps * size;
    const double dn = static_cast<double>(st.draws);
    auto finish = [&](const DenseMatrix& s, const DenseMatrix& s2, DenseMatrix& mean, DenseMatrix& se) {
        mean = DenseMatrix(n, n);
        se = DenseMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double m = s(i, j) / dn;
                const double var = std::max(0.0, (s2(i, j) - dn * m * m) / (dn - 1.0));
                mean(i, j) = m;
                se(i, j) = std::sqrt(var / dn);
            }
    };
    finish(sum_X, sum_X2, st.mean_X, st.stderr_X);
    finish(sum_Xsq, sum_Xsq2, st.mean_X_sq, st.stderr_X_sq);
    return st;
}

}  // namespace sparsebound
