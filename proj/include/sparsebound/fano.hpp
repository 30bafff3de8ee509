#pragma once

// Per-matrix lower bound on the minimax risk from a packing set.
//
// Put x uniformly on a packing P whose points are pairwise at squared distance
// >= 1/2, rescaled by c = 4 sqrt(n M). The rescaled points are separated by
// c^2 / 2 = 8 n M, so any estimator with risk <= M identifies the true point
// with error probability <= 1/2 and Fano's inequality gives
//
//     (1/2) ln|P| - 1 <= I(x; y) <= (1/|P|^2) sum_ij KL(P_i, P_j)
//                                  = c^2 S / sigma^2 = 16 n M S / sigma^2,
//
// where S = (1/(2|P|^2)) sum_ij ||A (x_i - x_j)||^2 is the pairwise energy of
// the unit-scale packing. Any M below
//
//     M_cert = sigma^2 ((1/2) ln|P| - 1) / (16 n S)
//
// contradicts this, so M*(A) >= M_cert. Replacing S by its worst case
// (1 + beta) ||A||_F^2 / n recovers bound_fano_closed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/packing.hpp"

namespace sparsebound {

struct FanoCertificate {
    std::size_t n = 0;
    std::size_t size = 0;
    std::uint64_t packing_seed = 0;
    double S_bar = 0.0;
    double entropy_term = 0.0;  // (1/2) ln|P| - 1
    double M_cert = 0.0;
    double sigma = 1.0;
    bool vacuous = true;
};

struct CertificateComparison {
    FanoCertificate certificate;
    FanoClosedForm closed_form;  // evaluated with beta = measured beta of the packing
    // Packing at least as large as (n/k)^(k/4), where M_cert >= closed form must hold.
    bool comparable = false;
};

inline constexpr double kEnergyAgreementTol = 1e-9;

// KL divergence between N(A x_i, sigma^2 I) and N(A x_j, sigma^2 I).
inline double gaussian_kl(const DenseMatrix& A, const SparseVector& xi, const SparseVector& xj, double sigma) {
    detail::require(sigma > 0.0, "gaussian_kl: sigma must be positive");
    detail::require(xi.n == A.cols() && xj.n == A.cols(), "gaussian_kl: dimension mismatch");
    const Vector diff = apply(A, difference(xi, xj));
    return norm_sq(diff) / (2.0 * sigma * sigma);
}

namespace detail {

inline std::vector<Vector> images(const DenseMatrix& A, const PackingSet& P) {
    require(P.n == A.cols(), "packing dimension n=" + std::to_string(P.n) + " does not match matrix columns " +
                                 std::to_string(A.cols()));
    std::vector<Vector> out;
    out.reserve(P.size());
    for (const auto& x : P.points) out.push_back(apply(A, x));
    return out;
}

// sum over ordered pairs i != j of ||A x_i - A x_j||^2.
inline double pair_sum(const std::vector<Vector>& img) {
    double total = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
        for (std::size_t j = 0; j < img.size(); ++j) {
            if (i == j) continue;
            double s = 0.0;
            for (std::size_t r = 0; r < img[i].size(); ++r) {
                const double d = img[i][r] - img[j][r];
                s += d * d;
            }
            total += s;
        }
    return total;
}

}  // namespace detail

// Upper bound on I(x; y) for x uniform on P: the average pairwise KL.
inline double mutual_info_upper(const DenseMatrix& A, const PackingSet& P, double sigma) {
    detail::require(P.size() >= 2, "mutual_info_upper: need at least two points");
    detail::require(sigma > 0.0, "mutual_info_upper: sigma must be positive");
    const double count = static_cast<double>(P.size());
    return detail::pair_sum(detail::images(A, P)) / (2.0 * sigma * sigma) / (count * count);
}

// S = (1/(2|P|^2)) sum_ij ||A (x_i - x_j)||^2 for a unit-scale packing,
// cross-checked against tr(A^T A Q) - ||A mu||^2.
inline double pairwise_energy(const DenseMatrix& A, const PackingSet& P) {
    detail::require(P.size() >= 2, "pairwise_energy: need at least two points");
    detail::require(P.scale == 1.0, "pairwise_energy: packing must be at unit scale");
    const auto img = detail::images(A, P);
    const double count = static_cast<double>(P.size());
    const double direct = detail::pair_sum(img) / (2.0 * count * count);

    const auto moments = empirical_moments(P);
    const DenseMatrix G = gram_columns(A);
    double trace_GQ = 0.0;
    for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < G.cols(); ++j) trace_GQ += G(i, j) * moments.Q(i, j);
    const double via_moments = trace_GQ - norm_sq(matvec(A, moments.mu));

    const double tol = kEnergyAgreementTol * std::max(std::abs(direct), std::abs(via_moments)) +
                       1e-12 * frobenius_norm_sq(A);
    if (std::abs(direct - via_moments) > tol) {
        throw numerical_error("pairwise_energy: direct sum " + std::to_string(direct) +
                              " disagrees with moment identity " + std::to_string(via_moments));
    }
    return direct;
}

inline FanoCertificate certificate(const DenseMatrix& A, const PackingSet& P, double sigma) {
    detail::require(sigma > 0.0, "certificate: sigma must be positive");
    detail::require(P.size() >= 2, "certificate: need at least two points");
    detail::require(P.scale == 1.0, "certificate: packing must be at unit scale");
    detail::require(verify_min_distance(P) >= kMinSeparationSq - kDistanceSlack,
                    "certificate: packing points are not separated by squared distance 1/2");

    FanoCertificate c;
    c.n = P.n;
    c.size = P.size();
    c.packing_seed = P.seed;
    c.sigma = sigma;
    c.S_bar = pairwise_energy(A, P);
    c.entropy_term = 0.5 * std::log(static_cast<double>(P.size())) - 1.0;
    c.vacuous = !(c.entropy_term > 0.0 && c.S_bar > 0.0);
    c.M_cert = c.vacuous ? 0.0 : sigma * sigma * c.entropy_term / (16.0 * static_cast<double>(P.n) * c.S_bar);
    return c;
}

// The certificate next to the closed form with the packing's measured beta.
// When the packing is at least the lemma size the certificate can only be
// sharper (S <= tr(A^T A Q) <= ||A||_F^2 (1 + beta) / n); a violation there
// is a numerical bug and throws.
inline CertificateComparison certificate_vs_closed_form(const DenseMatrix& A, const PackingSet& P, double sigma) {
    CertificateComparison out;
    out.certificate = certificate(A, P, sigma);
    out.closed_form = bound_fano_closed(frobenius_norm_sq(A), P.n, P.k, sigma, P.measured_beta);
    const double kd = static_cast<double>(P.k);
    const double design_size = std::pow(static_cast<double>(P.n) / kd, kd / 4.0);
    out.comparable = static_cast<double>(P.size()) >= design_size * (1.0 - 1e-12);
    if (out.comparable && !out.closed_form.vacuous &&
        out.certificate.M_cert < out.closed_form.value * (1.0 - 1e-12)) {
        throw numerical_error("certificate_vs_closed_form: certificate " + std::to_string(out.certificate.M_cert) +
                              " fell below the closed form " + std::to_string(out.closed_form.value));
    }
    return out;
}

}  // namespace sparsebound
