#include "opinionlab/dynamics.hpp"
#include "opinionlab/error.hpp"
#include "opinionlab/model.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <random>

using namespace opinionlab;

namespace {

Eigen::MatrixXd random_state(std::mt19937_64& rng, int n, int m, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd z(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) z(i, j) = g(rng);
    return project_rows(z);
}

ModelParams random_general(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    Eigen::VectorXd d(n), u(n), alpha(n), beta(n);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n), D = Eigen::MatrixXd::Zero(n, n), b(n, m);
    for (int i = 0; i < n; ++i) {
        d(i) = pos(rng);
        u(i) = pos(rng);
        alpha(i) = w(rng);
        beta(i) = w(rng);
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            G(i, k) = w(rng);
            D(i, k) = w(rng);
        }
        for (int j = 0; j < m; ++j) b(i, j) = w(rng);
    }
    return ModelParams::make(d, u, alpha, beta, G, D, b, SaturationSpec::asymmetric_logistic(0.7, 1.4),
                             SaturationSpec::odd_tanh(1.5));
}

}  // namespace

TEST(OpinionState, Validation) {
    EXPECT_THROW(OpinionState(Eigen::MatrixXd::Zero(3, 1)), DimensionError);
    Eigen::MatrixXd z(1, 3);
    z << 0.5, 0.2, 0.0;
    EXPECT_THROW(OpinionState{z}, ParameterError);
    z << 0.5, -0.2, -0.3;
    EXPECT_NO_THROW(OpinionState{z});
    const OpinionState lifted = OpinionState::from_two_option(Eigen::Vector3d(0.1, -0.2, 0.3));
    EXPECT_DOUBLE_EQ(lifted.z()(1, 0), -0.2);
    EXPECT_DOUBLE_EQ(lifted.z()(1, 1), 0.2);
}

TEST(OpinionState, TangentProjection) {
    const Eigen::VectorXd v = Eigen::Vector3d(1.0, 2.0, 6.0);
    const Eigen::VectorXd p = project_tangent(v);
    EXPECT_NEAR(p.sum(), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(p(0), -2.0);
    const Eigen::MatrixXd rows = project_rows(Eigen::MatrixXd::Ones(2, 4));
    EXPECT_EQ(rows.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Field, NeutralPointWithoutInputs) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        ModelParams p = random_general(rng, 2 + trial % 5, 2 + trial % 3);
        p = p.with_inputs(Eigen::MatrixXd::Zero(p.n_agents(), p.n_options()));
        const Eigen::MatrixXd f = vector_field(Eigen::MatrixXd::Zero(p.n_agents(), p.n_options()), p);
        EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
    }
    const ModelParams h = ModelParams::homogeneous(build_graph(GraphKind::cycle, 5), 3, {1.0, 0.7, 0.3, 0.1, 1.0, 0.2});
    EXPECT_EQ(vector_field(Eigen::MatrixXd::Zero(5, 3), h).norm(), 0.0);
}

TEST(Field, InputsMoveTheOrigin) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 3);
    b(2, 0) = 0.3;
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::path, 4), 3, {1.0, 0.5, 0.2, 0.0, 1.0, 0.0}, b);
    const Eigen::MatrixXd f = vector_field(Eigen::MatrixXd::Zero(4, 3), p);
    EXPECT_GT(f.norm(), 0.0);
    EXPECT_NEAR(f(2, 0), 0.2, 1e-15);
    EXPECT_NEAR(f(2, 1), -0.1, 1e-15);

    // A uniform (non-relative) input is invisible.
    const ModelParams q = p.with_inputs(Eigen::MatrixXd::Constant(4, 3, 0.8));
    EXPECT_EQ(vector_field(Eigen::MatrixXd::Zero(4, 3), q).norm(), 0.0);
}

TEST(Field, MatchesNaiveTensorSum) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 6, m = 2 + trial % 4;
        const ModelParams p = random_general(rng, n, m);
        const Eigen::MatrixXd z = random_state(rng, n, m, 1.5);
        auto gain = [&](int i, int k, int j, int l) {
            if (j == l) return k == i ? p.alpha(i) : p.Gamma(i, k);
            return k == i ? p.beta(i) : p.Delta(i, k);
        };
        const Eigen::MatrixXd expect =
            oracle::tensor_field(z, gain, p.d, p.u, p.b, [&](double y) { return p.s1(y); },
                                 [&](double y) { return p.s2(y); });
        const Eigen::MatrixXd f = vector_field(z, p);
        EXPECT_LT((f - expect).cwiseAbs().maxCoeff(), 1e-13);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(f.row(i).sum(), 0.0, 1e-14);

        const Eigen::MatrixXd ft = vector_field_tensor(OpinionState(z), AdjacencyTensor::from_params(p), p.d, p.u,
                                                       p.b, p.s1, p.s2);
        EXPECT_EQ((ft - f).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Field, TwoOptionReductionMatchesLift) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    const AdjacencySpec a = build_graph(GraphKind::wheel, 6, 0.7);
    TwoOptionParams tp = TwoOptionParams::homogeneous(a, {1.0, 0.8, 0.4, 0.3, -0.6, 0.5});
    tp.s1 = SaturationSpec::asymmetric_logistic(0.6, 1.3);
    tp.s2 = SaturationSpec::asymmetric_logistic(1.1, 0.9);
    for (int i = 0; i < 6; ++i) tp.b(i) = 0.1 * g(rng);
    const ModelParams gp = tp.to_general();
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd x(6);
        for (int i = 0; i < 6; ++i) x(i) = g(rng);
        const Eigen::VectorXd fx = vector_field_two_option(x, tp);
        const Eigen::MatrixXd fz = vector_field(OpinionState::from_two_option(x), gp);
        EXPECT_LT((fz.col(0) - fx).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((fz.col(1) + fx).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Field, LinearSignedConsensus) {
    Eigen::MatrixXd a(3, 3);
    a << 0, 1, -2, 1, 0, 0, -2, 0, 0;
    const Eigen::VectorXd x = Eigen::Vector3d(1.0, 2.0, -1.0);
    const Eigen::VectorXd f = altafini_field(x, a);
    // Hand values: row 0: 1*2 + (-2)(-1) - 3*1 = 1; row 1: 1 - 2 = -1; row 2: -2 - 2*(-1) = 0.
    EXPECT_DOUBLE_EQ(f(0), 1.0);
    EXPECT_DOUBLE_EQ(f(1), -1.0);
    EXPECT_DOUBLE_EQ(f(2), 0.0);
    EXPECT_THROW(altafini_field(Eigen::Vector2d::Zero(), a), DimensionError);
}

TEST(Jacobian, OriginFormulaMatchesFiniteDifferences) {
    const AdjacencySpec a = build_graph(GraphKind::star, 4, 0.8);
    const ModelParams p = ModelParams::homogeneous(a, 3, {1.2, 0.9, 0.5, 0.2, 0.7, -0.4});
    const OriginJacobian oj = jacobian_at_origin(p);
    const int n = 4, m = 3;
    VectorFunction f = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd z(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) z(i, j) = v(i * m + j);
        const Eigen::MatrixXd out = vector_field(z, p);
        Eigen::VectorXd r(n * m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) r(i * m + j) = out(i, j);
        return r;
    };
    const Eigen::MatrixXd fd = finite_difference_jacobian(f, Eigen::VectorXd::Zero(n * m));
    EXPECT_LT((fd - oj.J).cwiseAbs().maxCoeff(), 1e-8);

    // Spectrum on V: -d + u(alpha - beta) + u lambda_i(A) (gamma - delta).
    const auto ev = oracle::jacobi_eigenvalues(oracle::to_mat(a.entries()));
    const double top = -1.2 + 0.9 * 0.3 + 0.9 * 1.1 * ev.back();
    EXPECT_NEAR(oj.max_real_on_V, top, 1e-12);
}

TEST(Jacobian, RequiresHomogeneousScalarsAndNoInputs) {
    const AdjacencySpec a = build_graph(GraphKind::path, 3);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 2);
    b(0, 0) = 0.1;
    const ModelParams withb = ModelParams::homogeneous(a, 2, {1.0, 0.5, 1.0, 0.0, -1.0, 0.0}, b);
    EXPECT_THROW(jacobian_at_origin(withb), HypothesisError);
    const ModelParams het = ModelParams::homogeneous(a, 2, {}).with_u(Eigen::Vector3d(0.1, 0.2, 0.3));
    EXPECT_THROW(jacobian_at_origin(het), HypothesisError);
}

TEST(Params, Validation) {
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(2);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    EXPECT_THROW(ModelParams::make(-one, one, one, one, zero, zero, zero), ParameterError);
    EXPECT_THROW(ModelParams::make(one, -one, one, one, zero, zero, zero), ParameterError);
    EXPECT_THROW(ModelParams::make(one, one, one, one, Eigen::MatrixXd::Identity(2, 2), zero, zero), ParameterError);
    EXPECT_THROW(ModelParams::make(one, one, one, one, zero, zero, Eigen::MatrixXd::Zero(2, 1)), DimensionError);
    EXPECT_THROW(ModelParams::make(one, Eigen::VectorXd::Ones(3), one, one, zero, zero, zero), DimensionError);
    const ModelParams p = ModelParams::make(one, one, one, one, zero, zero, zero);
    EXPECT_THROW(p.with_u(-0.5), ParameterError);
    EXPECT_THROW(vector_field(Eigen::MatrixXd::Zero(3, 2), p), DimensionError);
}

TEST(Params, HomogeneousBookkeeping) {
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::cycle, 4), 2, {1.0, 0.3, 0.2, 0.0, 1.0, 0.0});
    ASSERT_TRUE(p.gains.has_value());
    EXPECT_TRUE(p.with_u(0.9).gains.has_value());
    EXPECT_DOUBLE_EQ(p.with_u(0.9).gains->u, 0.9);
    EXPECT_FALSE(p.with_u(Eigen::Vector4d(0.1, 0.2, 0.1, 0.1)).gains.has_value());
    Eigen::MatrixXd b(4, 2);
    b << 1, 0, 0, 1, 2, 2, 0, 0;
    const ModelParams q = p.with_inputs(b);
    EXPECT_DOUBLE_EQ(q.b(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(q.b(2, 0), 0.0);
    EXPECT_DOUBLE_EQ(q.b_raw(2, 0), 2.0);
}

TEST(Bounds, SimplexMapAndRadius) {
    Eigen::MatrixXd z(2, 3);
    z << 2.0, -1.0, -1.0, 0.0, 0.5, -0.5;
    const Eigen::MatrixXd s = simplex_map(z, 1.0, 2.0);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-15);
    EXPECT_TRUE((s.array() >= 0.0).all());
    EXPECT_NEAR(s(0, 0), 1.0 / 3.0 + 2.0 / 6.0, 1e-15);
    EXPECT_THROW(simplex_map(z, 0.0, 1.0), ParameterError);

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 2);
    b(1, 0) = 0.4;
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::path, 3), 2, {2.0, 1.5, 1.0, 0.0, 1.0, 0.0}, b);
    // u (k1 + (m-1) k2) + max |b| = 1.5 * 2 + 0.2.
    EXPECT_NEAR(coupling_bound(p), 3.2, 1e-15);
    EXPECT_NEAR(boundedness_radius(p, 0.1), 3 * 2 * 3.2 / 2.0, 1e-14);
    EXPECT_DOUBLE_EQ(boundedness_radius(p, 100.0), 100.0);
}
