#pragma once

// Lower bounds against a working l1 estimator on Gaussian designs, one row
// per number of measurements m.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsebound/bounds.hpp"
#include "sparsebound/estimators.hpp"
#include "sparsebound/random.hpp"
#include "sparsebound/report.hpp"

namespace sparsebound {

struct CompareOptions {
    // Signal amplitudes, in units of sigma * sqrt(n/m) (the per-coefficient
    // noise level of an N(0, 1/n) design). The Lasso risk is the worst over
    // these levels. The top level sits near the default Lasso threshold
    // 2 sqrt(2 ln n) noise units; above it the risk enters the shrinkage-bias
    // plateau, which grows faster than 1/m when m is close to k log n.
    std::vector<double> amplitude_levels{1.0, 2.0, 4.0, 8.0};
    double C0 = 1.0;
};

struct CompareRow {
    std::size_t m = 0;
    BoundReport report;
    RiskValue lower_bound = RiskValue::finite(0.0);
    std::optional<FanoCertificate> certificate;
    RiskEstimate lasso;            // worst amplitude level
    double lasso_amplitude = 0.0;  // amplitude attaining it
    std::optional<double> oracle_rate;
    double ds_rate = 0.0;
};

// Seeds for the pieces of one row; distinct streams per m.
inline std::uint64_t design_seed(std::uint64_t seed, std::size_t m) { return stream_seed(seed, 2 * m); }
inline std::uint64_t row_packing_seed(std::uint64_t seed, std::size_t m) { return stream_seed(seed, 2 * m + 1); }

// Draws A with i.i.d. N(0, 1/n) entries, reports its bounds (with a Fano
// certificate from a lemma-size packing when k is even and k < n/2), and
// measures the worst-case Lasso risk over random sign signals.
inline CompareRow compare_row(std::size_t n, std::size_t k, std::size_t m, double sigma, std::size_t trials,
                              std::uint64_t seed, const CompareOptions& opts = {}) {
    detail::require(sigma > 0.0, "compare: sigma must be positive");
    detail::require(m >= 1, "compare: m must be positive");
    const DenseMatrix A = gaussian_matrix(m, n, 1.0 / static_cast<double>(n), design_seed(seed, m));

    CompareRow row;
    row.m = m;
    ReportOptions ropts;
    ropts.C0 = opts.C0;
    ropts.build_certificate = true;
    ropts.packing_seed = row_packing_seed(seed, m);
    row.report = full_report(A, k, NoiseModel(NoiseKind::measurement, sigma), ropts);
    row.lower_bound = row.report.best_lower_bound;
    row.certificate = row.report.certificate;
    row.oracle_rate = row.report.reference_oracle_rate;
    row.ds_rate = row.report.reference_ds_rate;

    const auto lasso = make_lasso(default_lasso_lambda(A, sigma));
    const double unit = sigma * std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    bool first = true;
    for (std::size_t level = 0; level < opts.amplitude_levels.size(); ++level) {
        const double amplitude = opts.amplitude_levels[level] * unit;
        const auto est = random_signal_risk(A, lasso, k, amplitude, sigma, trials, stream_seed(design_seed(seed, m), level + 1));
        if (first || est.mean_risk > row.lasso.mean_risk) {
            row.lasso = est;
            row.lasso_amplitude = amplitude;
            first = false;
        }
    }
    return row;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need at least two matching points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace sparsebound
