#pragma once

// All lower bounds and reference rates for one (A, k, noise model) instance.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/fano.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/packing.hpp"

namespace sparsebound {

struct ReportOptions {
    double beta = 0.0;  // beta for the closed-form bound
    double C0 = 1.0;    // constant in the l1 reference rate
    std::size_t enumeration_cap = kDefaultEnumerationCap;
    // Certificate from this packing when set; otherwise build one of lemma
    // size with `packing_seed` when `build_certificate` is true.
    std::optional<PackingSet> packing;
    bool build_certificate = false;
    std::uint64_t packing_seed = 0;
};

struct BoundReport {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    double sigma = 1.0;
    NoiseKind noise = NoiseKind::measurement;
    std::optional<std::size_t> whitened_rank;  // signal-noise model only

    RiskValue bound_simple = RiskValue::finite(0.0);
    SupportRisk worst_columns;
    std::optional<FanoClosedForm> bound_fano_closed;  // empty outside k even, k < n/2
    double beta_used = 0.0;
    std::optional<FanoCertificate> certificate;
    std::optional<SupportRisk> bruteforce;  // empty above the enumeration cap
    RiskValue best_lower_bound = RiskValue::finite(0.0);
    double reference_ds_rate = 0.0;
    std::optional<double> reference_oracle_rate;  // empty unless k divides m
};

namespace detail {

inline bool packing_regime(std::size_t n, std::size_t k) { return k >= 2 && k % 2 == 0 && 2 * k < n; }

}  // namespace detail

// Evaluates every applicable bound. For the signal-noise model the design is
// first replaced by V^T from its reduced SVD.
inline BoundReport full_report(const DenseMatrix& A, std::size_t k, const NoiseModel& noise,
                               const ReportOptions& opts = {}) {
    detail::require(!A.empty(), "full_report: empty matrix");
    detail::require_sparsity(k, A.cols());

    BoundReport r;
    r.n = A.cols();
    r.m = A.rows();
    r.k = k;
    r.sigma = noise.sigma;
    r.noise = noise.kind;
    r.beta_used = opts.beta;

    DenseMatrix design = A;
    if (noise.kind == NoiseKind::signal) {
        auto w = whiten_noise_folding(A, noise.sigma);
        design = std::move(w.Vstar);
        r.whitened_rank = w.rank;
    }
    const double sigma = noise.sigma;

    r.bound_simple = bound_simple(design, k, sigma);
    r.worst_columns = worst_columns_bound(design, k, sigma);

    const double fro = frobenius_norm_sq(design);
    if (detail::packing_regime(r.n, k) && fro > 0.0) {
        r.bound_fano_closed = bound_fano_closed(fro, r.n, k, sigma, opts.beta);
    }
    if (binomial_saturating(r.n, k, opts.enumeration_cap) <= opts.enumeration_cap) {
        r.bruteforce = minimax_supports_bruteforce(design, k, sigma, opts.enumeration_cap);
    }
    if (opts.packing) {
        detail::require(opts.packing->n == r.n, "full_report: packing dimension does not match the matrix");
        r.certificate = certificate(design, *opts.packing, sigma);
    } else if (opts.build_certificate && detail::packing_regime(r.n, k)) {
        const PackingSet P = build_packing(r.n, k, lemma_size(r.n, k), opts.packing_seed);
        r.certificate = certificate(design, P, sigma);
    }

    // The best bound is unbounded if any bound is; else the largest finite,
    // non-vacuous one.
    std::vector<RiskValue> candidates{r.bound_simple, r.worst_columns.value};
    if (r.bruteforce) candidates.push_back(r.bruteforce->value);
    if (r.bound_fano_closed && !r.bound_fano_closed->vacuous)
        candidates.push_back(RiskValue::finite(r.bound_fano_closed->value));
    if (r.certificate && !r.certificate->vacuous) candidates.push_back(RiskValue::finite(r.certificate->M_cert));
    double best = 0.0;
    bool unbounded = false;
    for (const auto& c : candidates) {
        if (c.is_unbounded()) {
            unbounded = true;
        } else {
            best = std::max(best, c.value());
        }
    }
    r.best_lower_bound = unbounded ? RiskValue::unbounded() : RiskValue::finite(best);

    r.reference_ds_rate = dantzig_reference_rate(r.n, k, r.m, sigma, opts.C0);
    if (r.m % k == 0) r.reference_oracle_rate = averaging_oracle_risk(r.n, k, r.m, sigma);
    return r;
}

}  // namespace sparsebound
