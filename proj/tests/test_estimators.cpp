#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparsebound/bounds.hpp"
#include "sparsebound/estimators.hpp"
#include "sparsebound/fano.hpp"

using namespace sparsebound;

namespace {

SparseVector signal(std::size_t n, IndexSet support, Vector values) { return {n, std::move(support), std::move(values)}; }

}  // namespace

TEST(OracleLs, NoiselessRecovery) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DenseMatrix A = gaussian_matrix(12, 30, 1.0, seed);
        const auto x = signal(30, {2, 11, 19, 27}, {1.5, -0.25, 3.0, 0.7});
        const Vector y = apply(A, x);
        const auto xhat = oracle_ls(A, x.support, y);
        EXPECT_EQ(xhat.support, x.support);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(xhat.values[i], x.values[i], 1e-9);
    }
}

TEST(OracleLs, OrthonormalSupportIsProjection) {
    const DenseMatrix A = DenseMatrix::identity(5);
    const Vector y{0.3, -1.0, 2.0, 4.0, 5.0};
    const auto xhat = oracle_ls(A, IndexSet{1, 3}, y);
    EXPECT_NEAR(xhat.values[0], -1.0, 1e-15);
    EXPECT_NEAR(xhat.values[1], 4.0, 1e-15);
}

TEST(OracleLs, MatchesNormalEquationsOracle) {
    const DenseMatrix A = gaussian_matrix(10, 20, 1.0, 42);
    const IndexSet T{0, 5, 9};
    Engine rng = make_stream(1, 0);
    const Vector y = gaussian_vector(rng, 10, 1.0);
    const auto G = oracle::support_gram(A, T);
    Vector b(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t r = 0; r < 10; ++r) b[j] += A(r, T[j]) * y[r];
    const Vector ref = oracle::solve(G, b);
    const auto xhat = oracle_ls(A, T, y);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(xhat.values[j], ref[j], 1e-10);
}

TEST(OracleLs, RankDeficientFails) {
    const DenseMatrix A{{1, 1, 0}, {2, 2, 1}};
    EXPECT_THROW(oracle_ls(A, IndexSet{0, 1}, Vector{1.0, 2.0}), estimator_failure);
    EXPECT_THROW(oracle_ls(A, IndexSet{0, 1, 2}, Vector{1.0, 2.0}), estimator_failure);
}

TEST(AveragingDesign, Construction) {
    const DenseMatrix D = averaging_design(4, 2, 4, IndexSet{2, 0});
    EXPECT_EQ(D, (DenseMatrix{{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 1, 0}}));
    EXPECT_THROW(averaging_design(4, 3, 4, IndexSet{0, 1, 2}), precondition_error);
    EXPECT_THROW(averaging_design(4, 2, 4, IndexSet{1, 1}), precondition_error);
}

TEST(AveragingDesign, OracleEqualsSampleMeans) {
    const DenseMatrix D = averaging_design(10, 2, 8, IndexSet{1, 6});
    const Vector y{1.0, 2.0, 3.5, -0.5, 10.0, 11.0, 12.0, 13.5};
    const auto xhat = oracle_ls(D, IndexSet{1, 6}, y);
    EXPECT_NEAR(xhat.values[0], 1.5, 1e-12);
    EXPECT_NEAR(xhat.values[1], 11.625, 1e-12);
}

TEST(SoftThreshold, Examples) {
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
    EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

TEST(LassoCd, OrthonormalDesignIsSoftThreshold) {
    const Vector y{3.0, -0.2, -2.5, 0.9};
    const auto res = lasso_cd(DenseMatrix::identity(4), y, 1.0);
    ASSERT_TRUE(res.converged);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(res.x[i], soft_threshold(y[i], 1.0), 1e-12);
}

TEST(LassoCd, LargeLambdaGivesZero) {
    const DenseMatrix A = gaussian_matrix(8, 15, 1.0, 3);
    Engine rng = make_stream(3, 1);
    const Vector y = gaussian_vector(rng, 8, 1.0);
    double max_corr = 0.0;
    for (double c : matvec_transposed(A, y)) max_corr = std::max(max_corr, std::abs(c));
    const auto res = lasso_cd(A, y, max_corr);
    for (double v : res.x) EXPECT_EQ(v, 0.0);
}

TEST(LassoCd, SmallLambdaSolvesSquareSystem) {
    const DenseMatrix A = gaussian_matrix(6, 6, 1.0, 17);
    const Vector y{1.0, -2.0, 0.5, 3.0, 0.0, 1.5};
    LassoOptions opts;
    opts.tol = 1e-13;
    opts.max_iter = 200000;
    const auto res = lasso_cd(A, y, 1e-10, opts);
    ASSERT_TRUE(res.converged);
    const Vector ref = oracle::solve(A, y);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(res.x[i], ref[i], 1e-6 * (1.0 + std::abs(ref[i])));
}

TEST(LassoCd, ObjectiveMonotoneAndKkt) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DenseMatrix A = gaussian_matrix(20, 50, 1.0 / 50.0, seed);
        Engine rng = make_stream(seed, 9);
        Engine sig = make_stream(seed, 10);
        const auto x = random_sign_signal(50, 4, 2.0, sig);
        Vector y = apply(A, x);
        const Vector z = gaussian_vector(rng, 20, 0.1);
        for (std::size_t i = 0; i < 20; ++i) y[i] += z[i];
        const double lambda = default_lasso_lambda(A, 0.1);

        LassoOptions opts;
        opts.record_objective = true;
        opts.tol = 1e-12;
        opts.max_iter = 100000;
        const auto res = lasso_cd(A, y, lambda, opts);
        ASSERT_TRUE(res.converged);
        const double start = lasso_objective(A, y, Vector(50, 0.0), lambda);
        EXPECT_LE(res.objective.front(), start + 1e-12);
        for (std::size_t c = 1; c < res.objective.size(); ++c)
            EXPECT_LE(res.objective[c], res.objective[c - 1] + 1e-12 * std::abs(res.objective[c - 1]));

        const Vector Ax = matvec(A, res.x);
        Vector r(20);
        for (std::size_t i = 0; i < 20; ++i) r[i] = y[i] - Ax[i];
        const Vector g = matvec_transposed(A, r);
        for (std::size_t j = 0; j < 50; ++j) {
            EXPECT_LE(std::abs(g[j]), lambda + 1e-6);
            if (res.x[j] != 0.0) {
                EXPECT_NEAR(g[j], lambda * (res.x[j] > 0 ? 1.0 : -1.0), 1e-6);
            }
        }
    }
}

TEST(LassoCd, ZeroColumnsStayZero) {
    DenseMatrix A = gaussian_matrix(5, 6, 1.0, 2);
    for (std::size_t i = 0; i < 5; ++i) A(i, 3) = 0.0;
    const auto res = lasso_cd(A, Vector{1, 2, 3, 4, 5}, 0.01);
    EXPECT_EQ(res.x[3], 0.0);
}

TEST(LassoCd, NonConvergenceFlagged) {
    const DenseMatrix A = gaussian_matrix(10, 20, 1.0, 4);
    LassoOptions opts;
    opts.max_iter = 1;
    const auto res = lasso_cd(A, Vector(10, 1.0), 0.01, opts);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.cycles, 1u);
}

TEST(DefaultLassoLambda, Formula) {
    const DenseMatrix A{{3, 0}, {4, 1}};
    EXPECT_NEAR(default_lasso_lambda(A, 0.5), 2.0 * 0.5 * std::sqrt(2.0 * std::log(2.0)) * 5.0, 1e-14);
}

TEST(McRisk, NoiselessOracleIsExact) {
    const DenseMatrix A = gaussian_matrix(10, 20, 1.0, 5);
    const auto x = signal(20, {1, 8}, {2.0, -1.0});
    const auto est = mc_risk(A, make_oracle_ls(), x, 0.0, 10, 1);
    EXPECT_LE(est.mean_risk, 1e-18);
}

TEST(McRisk, OracleMatchesClosedForm) {
    const DenseMatrix A = gaussian_matrix(8, 16, 1.0, 6);
    const IndexSet T{3, 7, 12};
    const auto x = signal(16, T, {1.0, 1.0, -1.0});
    const auto est = mc_risk(A, make_oracle_ls(), x, 0.5, 20000, 2);
    EXPECT_NEAR(est.mean_risk, oracle::known_support_risk(A, T, 0.5), 3.0 * est.std_error);
}

TEST(McRisk, DoublingSigmaQuadruples) {
    const DenseMatrix A = gaussian_matrix(8, 16, 1.0, 7);
    const auto x = signal(16, {0, 4}, {1.0, -2.0});
    // Same seed: the noise draws are identical up to the factor 2.
    const auto a = mc_risk(A, make_oracle_ls(), x, 1.0, 2000, 3);
    const auto b = mc_risk(A, make_oracle_ls(), x, 2.0, 2000, 3);
    EXPECT_NEAR(b.mean_risk, 4.0 * a.mean_risk, 1e-10 * b.mean_risk);
}

TEST(McRisk, Reproducible) {
    const DenseMatrix A = gaussian_matrix(8, 16, 1.0, 8);
    const auto x = signal(16, {0, 4}, {1.0, -2.0});
    const auto lasso = make_lasso(0.3);
    const auto a = mc_risk(A, lasso, x, 1.0, 200, 5);
    const auto b = mc_risk(A, lasso, x, 1.0, 200, 5);
    EXPECT_EQ(a.mean_risk, b.mean_risk);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.estimator, "lasso");
    EXPECT_EQ(a.trials, 200u);
    EXPECT_EQ(a.seed, 5u);
}

TEST(McRisk, FailureThreshold) {
    // A fixed rank-deficient support fails every trial.
    const DenseMatrix A{{1, 1, 0}, {2, 2, 1}};
    const auto x = signal(3, {0}, {1.0});
    EXPECT_THROW(mc_risk(A, make_oracle_ls(IndexSet{0, 1}), x, 1.0, 100, 0), numerical_error);

    // Occasional failures below 1% are excluded and counted.
    int calls = 0;
    NamedEstimator flaky{"flaky", [&calls](const DenseMatrix& M, std::span<const double>, std::span<const std::size_t>) {
                             if (++calls % 200 == 0) throw estimator_failure("flaky");
                             return Vector(M.cols(), 0.0);
                         }};
    const auto est = mc_risk(DenseMatrix::identity(3), flaky, x, 1.0, 1000, 0);
    EXPECT_EQ(est.failures, 5u);
    EXPECT_NEAR(est.mean_risk, 1.0 / 3.0, 1e-12);
}

TEST(McRisk, AveragingDesignRisk) {
    const IndexSet T{1, 6};
    const DenseMatrix D = averaging_design(10, 2, 8, T);
    const auto x = signal(10, T, {0.5, -2.0});
    const auto est = mc_risk(D, make_oracle_ls(), x, 1.0, 20000, 11);
    EXPECT_NEAR(est.mean_risk, averaging_oracle_risk(10, 2, 8, 1.0), 3.0 * est.std_error);
}

TEST(PackingBayesRisk, ZeroEstimatorIsSixteenM) {
    const auto P = build_packing(64, 4, 16, 1);
    const auto est = packing_bayes_risk(gaussian_matrix(16, 64, 1.0, 1), P, 1e-3, make_zero_estimator(), 1.0, 50, 2);
    EXPECT_NEAR(est.mean_risk, 16e-3, 1e-15);
    EXPECT_LE(est.std_error, 1e-15);
}

TEST(PackingBayesRisk, NoiselessOracleIsZero) {
    const auto P = build_packing(64, 4, 16, 1);
    const auto est = packing_bayes_risk(gaussian_matrix(16, 64, 1.0, 1), P, 1e-3, make_oracle_ls(), 0.0, 50, 2);
    EXPECT_LE(est.mean_risk, 1e-18);
}

TEST(PackingBayesRisk, BelowCertificateRiskExceedsM) {
    const DenseMatrix A = gaussian_matrix(32, 64, 1.0 / 64.0, 12);
    const auto P = build_packing(64, 4, lemma_size(64, 4), 12);
    const auto cert = certificate(A, P, 1.0);
    ASSERT_FALSE(cert.vacuous);
    const double M = 0.9 * cert.M_cert;
    for (const auto& est : {make_oracle_ls(), make_lasso(default_lasso_lambda(A, 1.0)), make_zero_estimator()}) {
        const auto r = packing_bayes_risk(A, P, M, est, 1.0, 3000, 4);
        EXPECT_GT(r.mean_risk - M, 3.0 * r.std_error) << est.name;
    }
}

TEST(PackingBayesRisk, Preconditions) {
    const auto P = build_packing(64, 4, 16, 1);
    const DenseMatrix A = gaussian_matrix(16, 64, 1.0, 1);
    EXPECT_THROW(packing_bayes_risk(A, rescaled(P, 2.0), 1e-3, make_zero_estimator(), 1.0, 10, 0), precondition_error);
    EXPECT_THROW(packing_bayes_risk(A, P, 0.0, make_zero_estimator(), 1.0, 10, 0), precondition_error);
    EXPECT_THROW(packing_bayes_risk(A, P, 1e-3, make_zero_estimator(), 1.0, 1, 0), precondition_error);
}

TEST(RandomSignSignal, Shape) {
    Engine rng = make_stream(0, 0);
    const auto x = random_sign_signal(30, 5, 2.5, rng);
    EXPECT_EQ(x.support.size(), 5u);
    EXPECT_TRUE(std::is_sorted(x.support.begin(), x.support.end()));
    for (double v : x.values) EXPECT_EQ(std::abs(v), 2.5);
}
