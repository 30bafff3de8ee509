#include <gtest/gtest.h>

#include <cmath>
#include <tuple>

#include "oracles.hpp"
#include "sparsebound/bounds.hpp"
#include "sparsebound/random.hpp"

using namespace sparsebound;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(BoundSimple, Examples) {
    EXPECT_DOUBLE_EQ(bound_simple(DenseMatrix::identity(6), 2, 1.0).value(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(bound_simple(DenseMatrix::identity(4).scaled(2.0), 1, 1.0).value(), 0.0625);
    EXPECT_DOUBLE_EQ(bound_simple(DenseMatrix{{1, 2}, {3, 4}}, 1, 2.0).value(), 4.0 / 30.0);
}

TEST(BoundSimple, ZeroMatrixUnboundedAndRangeErrors) {
    EXPECT_TRUE(bound_simple(DenseMatrix(3, 5), 2, 1.0).is_unbounded());
    EXPECT_THROW(bound_simple(DenseMatrix::identity(3), 0, 1.0), precondition_error);
    EXPECT_THROW(bound_simple(DenseMatrix::identity(3), 4, 1.0), precondition_error);
}

TEST(BoundFanoClosed, Examples) {
    const auto b = bound_fano_closed(100.0, 1024, 4, 1.0, 0.0);
    EXPECT_FALSE(b.vacuous);
    // (ln 256 - 2) / 3200
    EXPECT_NEAR(b.value, 1.1078679513998631e-3, 1e-15);

    const auto v = bound_fano_closed(17.0, 8, 2, 1.0, 0.0);
    EXPECT_TRUE(v.vacuous);
    EXPECT_EQ(v.value, 0.0);
}

TEST(BoundFanoClosed, AsymptoticConstantIsOneOver128) {
    const std::tuple<std::size_t, std::size_t, double, double> cases[] = {{1024, 4, 100.0, 1.0}, {4096, 8, 37.5, 0.3}, {200, 6, 12.0, 2.0}};
    for (auto [n, k, fro, sigma] : cases) {
        const auto b = bound_fano_closed(fro, n, k, sigma, 0.0);
        ASSERT_FALSE(b.vacuous);
        const double asym = static_cast<double>(k) * sigma * sigma * std::log(static_cast<double>(n) / static_cast<double>(k)) / (128.0 * fro);
        const double offset = -2.0 * sigma * sigma / (32.0 * fro);
        EXPECT_LE(rel(b.value - asym, offset), 1e-12);
    }
}

TEST(BoundFanoClosed, BetaShrinksBound) {
    const auto b0 = bound_fano_closed(100.0, 1024, 4, 1.0, 0.0);
    const auto b1 = bound_fano_closed(100.0, 1024, 4, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(b1.value, b0.value / 2.0);
}

TEST(BoundFanoClosed, Preconditions) {
    EXPECT_THROW(bound_fano_closed(1.0, 64, 3, 1.0, 0.0), precondition_error);
    EXPECT_THROW(bound_fano_closed(1.0, 8, 4, 1.0, 0.0), precondition_error);
    EXPECT_THROW(bound_fano_closed(1.0, 64, 4, 1.0, -0.1), precondition_error);
    EXPECT_THROW(bound_fano_closed(0.0, 64, 4, 1.0, 0.0), precondition_error);
}

TEST(OracleSupportRisk, Examples) {
    const DenseMatrix Q{{1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}};
    EXPECT_DOUBLE_EQ(oracle_support_risk(Q, IndexSet{0, 3}, 1.0, 4).value(), 0.5);

    DenseMatrix A(2, 8);
    A(0, 0) = 2.0;
    A(1, 1) = 0.5;
    EXPECT_NEAR(oracle_support_risk(A, IndexSet{0, 1}, 1.0, 8).value(), 0.53125, 1e-15);

    EXPECT_TRUE(oracle_support_risk(A, IndexSet{0, 2}, 1.0, 8).is_unbounded());
}

TEST(OracleSupportRisk, MoreColumnsThanRowsIsUnbounded) {
    const DenseMatrix A = gaussian_matrix(2, 5, 1.0, 1);
    EXPECT_TRUE(oracle_support_risk(A, IndexSet{0, 1, 2}, 1.0, 5).is_unbounded());
}

TEST(OracleSupportRisk, DuplicateColumnsUnbounded) {
    const DenseMatrix A{{1, 1, 0}, {2, 2, 1}, {3, 3, 0}};
    EXPECT_TRUE(oracle_support_risk(A, IndexSet{0, 1}, 1.0, 3).is_unbounded());
}

TEST(OracleSupportRisk, MatchesInverseTraceOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DenseMatrix A = gaussian_matrix(10, 15, 0.5, seed);
        const IndexSet T{1, 4, 7, 13};
        EXPECT_LE(rel(oracle_support_risk(A, T, 1.3, 15).value(), oracle::known_support_risk(A, T, 1.3)), 1e-10);
    }
}

TEST(Bruteforce, Examples) {
    const auto r = minimax_supports_bruteforce(DenseMatrix::diagonal(Vector{1, 2, 3}), 1, 1.0);
    EXPECT_NEAR(r.value.value(), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(r.support, IndexSet{0});

    const auto id = minimax_supports_bruteforce(DenseMatrix::identity(7), 3, 1.0);
    EXPECT_NEAR(id.value.value(), 3.0 / 7.0, 1e-15);
    EXPECT_EQ(id.support, (IndexSet{0, 1, 2}));  // all tie; lexicographically smallest

    DenseMatrix Z = DenseMatrix::identity(4);
    Z(2, 2) = 0.0;
    const auto u = minimax_supports_bruteforce(Z, 1, 1.0);
    EXPECT_TRUE(u.value.is_unbounded());
    EXPECT_EQ(u.support, IndexSet{2});
}

TEST(Bruteforce, MatchesTwoByTwoClosedForm) {
    // For k = 2, sum 1/lambda = tr(G^{-1}) = (g11 + g22) / det(G).
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DenseMatrix A = gaussian_matrix(6, 8, 1.0, 300 + seed);
        double best = -1.0;
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) {
                const auto G = oracle::support_gram(A, IndexSet{i, j});
                const double v = (G(0, 0) + G(1, 1)) / (G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0)) / 8.0;
                best = std::max(best, v);
            }
        EXPECT_LE(rel(minimax_supports_bruteforce(A, 2, 1.0).value.value(), best), 1e-10);
    }
}

TEST(Bruteforce, CapExceeded) {
    EXPECT_THROW(minimax_supports_bruteforce(DenseMatrix::identity(30), 10, 1.0), precondition_error);
    EXPECT_THROW(minimax_supports_bruteforce(DenseMatrix::identity(10), 3, 1.0, 100), precondition_error);
}

TEST(BinomialSaturating, SmallValuesAndSaturation) {
    EXPECT_EQ(binomial_saturating(12, 2, 1000), 66u);
    EXPECT_EQ(binomial_saturating(64, 4, 1'000'000), 635376u);
    EXPECT_EQ(binomial_saturating(256, 4, 1'000'000), 1'000'001u);
}

TEST(WorstColumns, Examples) {
    const auto a = worst_columns_bound(DenseMatrix::identity(6), 2, 1.0);
    EXPECT_NEAR(a.value.value(), 1.0 / 3.0, 1e-15);
    const auto b = worst_columns_bound(DenseMatrix::diagonal(Vector{1, 2, 3}), 1, 1.0);
    EXPECT_EQ(b.support, IndexSet{0});
    EXPECT_NEAR(b.value.value(), 1.0 / 3.0, 1e-15);
}

TEST(AveragingOracle, Examples) {
    EXPECT_NEAR(averaging_oracle_risk(10, 2, 8, 1.0), 0.05, 1e-15);
    EXPECT_NEAR(averaging_oracle_risk(10, 2, 2, 1.0), 0.2, 1e-15);
    EXPECT_NEAR(averaging_oracle_risk(10, 2, 8, 2.0), 0.2, 1e-15);
    EXPECT_THROW(averaging_oracle_risk(10, 3, 8, 1.0), precondition_error);
}

TEST(DantzigReferenceRate, Examples) {
    EXPECT_NEAR(dantzig_reference_rate(256, 4, 64, 1.0, 1.0), 4.0 * std::log(256.0) / 64.0, 1e-15);
    EXPECT_NEAR(dantzig_reference_rate(256, 4, 64, 1.0), 0.34657359027997264, 1e-15);
    EXPECT_DOUBLE_EQ(dantzig_reference_rate(100, 3, 40, 1.5), 2.0 * dantzig_reference_rate(100, 3, 80, 1.5));
}

TEST(Whitening, DiagonalDesign) {
    const auto w = whiten_noise_folding(DenseMatrix{{2, 0, 0}, {0, 3, 0}}, 1.0);
    ASSERT_EQ(w.rank, 2u);
    for (std::size_t r = 0; r < 2; ++r) EXPECT_EQ(w.Vstar(r, 2), 0.0);
    EXPECT_NEAR(std::abs(w.Vstar(0, 1)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(w.Vstar(1, 0)), 1.0, 1e-14);
}

TEST(Whitening, DuplicateRowsAndZeroMatrix) {
    EXPECT_EQ(whiten_noise_folding(DenseMatrix{{1, 2, 3}, {1, 2, 3}}, 1.0).rank, 1u);
    EXPECT_THROW(whiten_noise_folding(DenseMatrix(2, 3), 1.0), precondition_error);
}

TEST(Whitening, OrthonormalRowsAndRankBound) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DenseMatrix A = gaussian_matrix(6, 14, 3.0, seed);
        const auto w = whiten_noise_folding(A, 1.0);
        const DenseMatrix VVt = multiply(w.Vstar, w.Vstar.transpose());
        for (std::size_t i = 0; i < w.rank; ++i)
            for (std::size_t j = 0; j < w.rank; ++j) EXPECT_NEAR(VVt(i, j), i == j ? 1.0 : 0.0, 1e-9);
        for (std::size_t k : {1, 2, 3}) {
            EXPECT_GE(bound_simple(w.Vstar, k, 0.7).value(), static_cast<double>(k) * 0.49 / 6.0 * (1.0 - 1e-12));
        }
    }
}

// Properties over random matrices.

TEST(BoundProperties, JensenChainOnSupports) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const DenseMatrix A = gaussian_matrix(9, 12, 1.0, 1000 + seed);
        const IndexSet T{(seed % 4), 5, 6 + seed % 6};
        const double k = static_cast<double>(T.size());
        const double fro_T = frobenius_norm_sq(column_submatrix(A, T));
        const double sum_inv = oracle_support_risk(A, T, 1.0, 1).value();
        EXPECT_GE(sum_inv, k * k / fro_T * (1.0 - 1e-12));
    }
}

TEST(BoundProperties, Ordering) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const DenseMatrix A = gaussian_matrix(8, 10, 1.0, 2000 + seed);
        for (std::size_t k : {1, 2, 3}) {
            const double simple = bound_simple(A, k, 1.0).value();
            const double worst = worst_columns_bound(A, k, 1.0).value.value();
            const double brute = minimax_supports_bruteforce(A, k, 1.0).value.value();
            EXPECT_LE(simple, worst * (1.0 + 1e-12));
            EXPECT_LE(worst, brute * (1.0 + 1e-12));
        }
    }
}

TEST(BoundProperties, ScaleAndSigmaCovariance) {
    const DenseMatrix A = gaussian_matrix(10, 16, 1.0, 77);
    const IndexSet T{2, 9, 11};
    for (double c : {0.5, 3.0, 10.0}) {
        const DenseMatrix cA = A.scaled(c);
        const double c2 = c * c;
        EXPECT_LE(rel(bound_simple(cA, 3, 1.0).value() * c2, bound_simple(A, 3, 1.0).value()), 1e-12);
        EXPECT_LE(rel(worst_columns_bound(cA, 3, 1.0).value.value() * c2, worst_columns_bound(A, 3, 1.0).value.value()),
                  1e-12);
        EXPECT_LE(rel(oracle_support_risk(cA, T, 1.0, 16).value() * c2, oracle_support_risk(A, T, 1.0, 16).value()),
                  1e-12);
        EXPECT_LE(rel(minimax_supports_bruteforce(cA, 2, 1.0).value.value() * c2,
                      minimax_supports_bruteforce(A, 2, 1.0).value.value()),
                  1e-12);

        const double s = c;  // reuse the same factors for sigma
        EXPECT_LE(rel(bound_simple(A, 3, s).value(), s * s * bound_simple(A, 3, 1.0).value()), 1e-12);
        EXPECT_LE(rel(oracle_support_risk(A, T, s, 16).value(), s * s * oracle_support_risk(A, T, 1.0, 16).value()),
                  1e-12);
        EXPECT_LE(rel(minimax_supports_bruteforce(A, 2, s).value.value(),
                      s * s * minimax_supports_bruteforce(A, 2, 1.0).value.value()),
                  1e-12);
    }
}
