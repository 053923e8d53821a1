#include "opinionlab/analysis.hpp"
#include "opinionlab/dynamics.hpp"
#include "opinionlab/error.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace opinionlab;

namespace {

// Largest real part of the finite-difference Jacobian at the origin, in
// zero-sum coordinates.
double numeric_growth(const ModelParams& p) {
    const System sys{p, std::nullopt, std::nullopt};
    const ReducedCoordinates rc(sys);
    const Eigen::MatrixXd j =
        finite_difference_jacobian([&](const Eigen::VectorXd& y) { return rc.field(y); },
                                   Eigen::VectorXd::Zero(rc.dimension()));
    return Eigen::EigenSolver<Eigen::MatrixXd>(j, false).eigenvalues().real().maxCoeff();
}

double bisect_zero_crossing(const ModelParams& p, double lo, double hi) {
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (numeric_growth(p.with_u(mid)) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Threshold, PathDisagreementClosedForm) {
    const AdjacencySpec a = build_graph(GraphKind::path, 3);
    const RegimePrediction r = critical_attention({1.0, 0.0, 1.0, 0.0, -1.0, 0.0}, a);
    EXPECT_EQ(r.regime, Regime::disagreement);
    EXPECT_NEAR(r.u_star, 1.0 / (1.0 + std::sqrt(2.0)), 1e-12);
    EXPECT_TRUE(r.hypotheses_ok);
    EXPECT_GT(r.pattern_vector(0), 0.0);
    EXPECT_LT(r.pattern_vector(1), 0.0);
}

TEST(Threshold, AgreementUsesLargestEigenvalue) {
    const AdjacencySpec a = build_graph(GraphKind::cycle, 6, 0.5);
    const RegimePrediction r = critical_attention({1.0, 0.0, 2.0, 0.0, 1.0, 0.0}, a);
    EXPECT_EQ(r.regime, Regime::agreement);
    EXPECT_NEAR(r.u_star, 1.0 / 3.0, 1e-12);
    EXPECT_TRUE((r.pattern_vector.array() > 0.0).all());
}

TEST(Threshold, RefusesEqualCouplingsAndReportsFailedHypotheses) {
    const AdjacencySpec a = build_graph(GraphKind::path, 4);
    EXPECT_THROW(critical_attention({1.0, 0.0, 0.5, 0.0, 0.7, 0.7}, a), HypothesisError);

    // All-to-all disagreement: lambda_min = -1 has multiplicity n - 1.
    const RegimePrediction r = critical_attention({1.0, 0.0, 1.0, 0.0, -1.0, 0.0}, build_graph(GraphKind::all_to_all, 4));
    EXPECT_FALSE(r.hypotheses_ok);
    EXPECT_FALSE(r.diagnostics.empty());

    // alpha - beta + lambda (gamma - delta) <= 0: no threshold.
    const RegimePrediction none = critical_attention({1.0, 0.0, -5.0, 0.0, 1.0, 0.0}, a);
    EXPECT_TRUE(std::isinf(none.u_star));
    EXPECT_FALSE(none.hypotheses_ok);

    const ModelParams het = ModelParams::make(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0),
                                              Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(),
                                              Eigen::MatrixXd::Zero(2, 2));
    EXPECT_THROW(critical_attention(het), HypothesisError);
    EXPECT_THROW(critical_attention_general(het), HypothesisError);
}

TEST(Threshold, AnalyticMatchesNumericalJacobianCrossing) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kind(0, 4), nsz(3, 6), msz(2, 4);
    std::uniform_real_distribution<double> w(0.3, 1.5);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 5; ++trial) {
        const GraphKind k = std::array{GraphKind::path, GraphKind::cycle, GraphKind::star, GraphKind::wheel,
                                       GraphKind::all_to_all}[kind(rng)];
        const int n = std::max(nsz(rng), 4);
        const HomogeneousGains g{w(rng), 0.0, w(rng) - 0.5, 0.2 * w(rng), (trial % 2 ? 1.0 : -1.0) * w(rng), 0.1};
        const AdjacencySpec a = build_graph(k, n, w(rng));
        const RegimePrediction pr = critical_attention(g, a);
        if (!pr.hypotheses_ok) continue;
        const ModelParams p = ModelParams::homogeneous(a, msz(rng), g);
        const double u_num = bisect_zero_crossing(p, 0.0, 4.0 * pr.u_star);
        EXPECT_NEAR(u_num, pr.u_star, 1e-6) << to_string(k) << " n=" << n;
        ++checked;
    }
    EXPECT_EQ(checked, 5);
}

TEST(Threshold, GeneralFormula) {
    Eigen::Matrix3d G;
    G << 0, 0.5, 0, 0.2, 0, 0.3, 0, 0.4, 0;
    const ModelParams p = ModelParams::make(Eigen::Vector3d::Constant(2.0), Eigen::Vector3d::Constant(0.5),
                                            Eigen::Vector3d(0.1, 0.3, 0.2), Eigen::Vector3d::Zero(), G,
                                            Eigen::Matrix3d::Zero(), Eigen::MatrixXd::Zero(3, 3));
    Eigen::Matrix3d lin = G;
    lin.diagonal() += Eigen::Vector3d(0.1, 0.3, 0.2);
    const auto roots = oracle::polynomial_roots(oracle::characteristic_polynomial(oracle::to_mat(lin)));
    double top = -1e300;
    for (const auto& r : roots) top = std::max(top, r.real());
    EXPECT_NEAR(critical_attention_general(p), 2.0 / top, 1e-10);
    EXPECT_NEAR(origin_growth_rate(p), -2.0 + 0.5 * top, 1e-10);
}

TEST(Classification, Labels) {
    Eigen::MatrixXd z(3, 2);
    z << 0.5, -0.5, 0.5, -0.5, 0.5, -0.5;
    StateClassification c = classify_state(z, 0.3);
    EXPECT_TRUE(c.agreement);
    EXPECT_TRUE(c.consensus);
    EXPECT_FALSE(c.dissensus);
    EXPECT_FALSE(c.neutral);

    z << 0.5, -0.5, -0.25, 0.25, -0.25, 0.25;
    c = classify_state(z, 0.3);
    EXPECT_FALSE(c.agreement);
    EXPECT_TRUE(c.dissensus);
    EXPECT_TRUE(c.strong[0]);
    EXPECT_TRUE(c.strong[1]);  // row norm 0.354
    EXPECT_EQ(c.sign_matrix(1, 0), -1);

    c = classify_state(Eigen::MatrixXd::Constant(3, 2, 1e-5), 0.3);
    EXPECT_TRUE(c.neutral);
    EXPECT_THROW(classify_state(z, 0.0), ParameterError);

    const Partition cells = opinion_clusters(z, 1e-6);
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_EQ(cells[1], (std::vector<int>{1, 2}));
}

TEST(Unfolding, BranchFollowsInputProjection) {
    const SpectralSummary s = spectral_extrema(build_graph(GraphKind::path, 3));
    const Unfolding up = unfolding_direction(Eigen::Vector3d(0.1, 0.0, 0.0), s, Regime::disagreement);
    EXPECT_GT(up.inner, 0.0);
    EXPECT_EQ(up.branch_sign, 1);
    EXPECT_EQ(unfolding_direction(Eigen::Vector3d(0.0, 0.1, 0.0), s, Regime::disagreement).branch_sign, -1);
    EXPECT_EQ(unfolding_direction(Eigen::Vector3d::Zero(), s, Regime::disagreement).branch_sign, 0);
    EXPECT_THROW(unfolding_direction(Eigen::Vector2d::Zero(), s, Regime::agreement), DimensionError);
}

TEST(Clusters, ConditionAndReduction) {
    const Partition cells{{0, 1}, {2, 3, 4}};
    const AdjacencySpec a = block_graph(cells, -1.0, -2.0);
    const ModelParams p = ModelParams::homogeneous(a, 2, {1.0, 0.5, 0.0, 0.0, 1.0, 0.0});
    const ClusterCondition cc = check_cluster_condition(p, cells);
    ASSERT_EQ(cc.margin.size(), 2u);
    // -d + u max(0, alpha - alpha_tilde) with alpha_tilde = -1: -1 + 0.5.
    EXPECT_DOUBLE_EQ(cc.margin[0], -0.5);
    EXPECT_TRUE(cc.all());

    const ModelParams bad = ModelParams::homogeneous(a, 2, {1.0, 2.0, 0.0, 0.0, 1.0, 0.0});
    EXPECT_FALSE(check_cluster_condition(bad, cells).all());
    EXPECT_DOUBLE_EQ(check_cluster_condition(bad, cells).margin[0], 1.0);

    const ModelParams red = reduce_clusters(p, cells);
    ASSERT_EQ(red.n_agents(), 2);
    EXPECT_DOUBLE_EQ(red.alpha(0), -1.0);
    EXPECT_DOUBLE_EQ(red.alpha(1), -2.0);
    EXPECT_DOUBLE_EQ(red.Gamma(0, 1), -6.0);
    EXPECT_DOUBLE_EQ(red.Gamma(1, 0), -4.0);

    // On the cluster manifold the reduced field is the cluster average of the full field.
    Eigen::MatrixXd zc(2, 2);
    zc << 0.7, -0.7, -0.3, 0.3;
    Eigen::MatrixXd z(5, 2);
    for (int i = 0; i < 5; ++i) z.row(i) = zc.row(i < 2 ? 0 : 1);
    const Eigen::MatrixXd full = cluster_average(vector_field(z, p), cells);
    EXPECT_LT((full - vector_field(zc, red)).cwiseAbs().maxCoeff(), 1e-14);

    Eigen::MatrixXd gam = a.entries();
    gam(0, 2) = -3.0;
    const ModelParams nonuniform = ModelParams::make(p.d, p.u, p.alpha, p.beta, gam, p.Delta, p.b_raw);
    EXPECT_THROW(check_cluster_condition(nonuniform, cells), HypothesisError);
}

TEST(Symmetry, EquivarianceResiduals) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    auto samples = [&](int n, int m) {
        std::vector<Eigen::MatrixXd> out;
        for (int s = 0; s < 5; ++s) {
            Eigen::MatrixXd z(n, m);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) z(i, j) = g(rng);
            out.push_back(project_rows(z));
        }
        return out;
    };
    const HomogeneousGains gains{1.0, 1.1, 0.4, 0.2, 0.8, -0.3};
    const ModelParams all = ModelParams::homogeneous(build_graph(GraphKind::all_to_all, 5), 3, gains);
    EXPECT_LT(equivariance_residual(all, {1, 0, 2, 3, 4}, {2, 1, 0}, samples(5, 3)), 1e-12);
    const ModelParams cyc = ModelParams::homogeneous(build_graph(GraphKind::cycle, 6), 3, gains);
    EXPECT_LT(equivariance_residual(cyc, {1, 2, 3, 4, 5, 0}, {0, 1, 2}, samples(6, 3)), 1e-12);
    const ModelParams path = ModelParams::homogeneous(build_graph(GraphKind::path, 5), 3, gains);
    EXPECT_GT(equivariance_residual(path, {1, 2, 3, 4, 0}, {0, 1, 2}, samples(5, 3)), 1e-3);
    EXPECT_THROW(permute_state(Eigen::MatrixXd::Zero(3, 2), {0, 0, 1}, {0, 1}), ParameterError);
}

TEST(Symmetry, ClosedFormLambdas) {
    for (int n : {3, 4, 5, 6, 7}) {
        const SpectralSummary s = spectral_extrema(build_graph(GraphKind::cycle, n));
        EXPECT_NEAR(predict_symmetric_lambda(GraphKind::cycle, n, Regime::agreement), s.lambda_max, 1e-12);
        EXPECT_NEAR(predict_symmetric_lambda(GraphKind::cycle, n, Regime::disagreement), s.lambda_min, 1e-12);
        const SpectralSummary t = spectral_extrema(build_graph(GraphKind::all_to_all, n));
        EXPECT_NEAR(predict_symmetric_lambda(GraphKind::all_to_all, n, Regime::agreement), t.lambda_max, 1e-12);
        EXPECT_NEAR(predict_symmetric_lambda(GraphKind::all_to_all, n, Regime::disagreement), t.lambda_min, 1e-12);
    }
    EXPECT_THROW(predict_symmetric_lambda(GraphKind::path, 4, Regime::agreement), ParameterError);
}
