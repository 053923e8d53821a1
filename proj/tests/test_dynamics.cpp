#include "opinionlab/dynamics.hpp"
#include "opinionlab/error.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

using namespace opinionlab;

namespace {

// Linear single agent: x' = -x + b, exact solution b + (x0 - b) e^{-t}.
ModelParams decay_model(double b) {
    Eigen::MatrixXd braw(1, 2);
    braw << b, -b;
    return ModelParams::make(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1),
                             Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
                             braw);
}

Eigen::MatrixXd two_option(std::initializer_list<double> x) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    Eigen::Index i = 0;
    for (double e : x) v(i++) = e;
    return lift_two_option(v);
}

}  // namespace

TEST(Integrate, MatchesExactLinearSolution) {
    const ModelParams p = decay_model(0.3);
    const Trajectory tr = integrate(p, two_option({1.0}), 2.0, {0.01});
    const double exact = 0.3 + 0.7 * std::exp(-2.0);
    EXPECT_NEAR(tr.final_state().z(0, 0), exact, 1e-10);
    EXPECT_DOUBLE_EQ(tr.times.back(), 2.0);
    EXPECT_EQ(tr.times.size(), 201u);
}

TEST(Integrate, FourthOrderConvergence) {
    // Nonlinear scalar problem; compare against a very fine reference.
    const AdjacencySpec a = build_graph(GraphKind::path, 3);
    const ModelParams p = ModelParams::homogeneous(a, 2, {1.0, 0.9, 1.0, 0.0, -1.0, 0.0}, two_option({0.1, 0.0, -0.2}));
    const Eigen::MatrixXd z0 = two_option({0.5, -0.3, 0.8});
    const Eigen::MatrixXd ref = integrate(p, z0, 4.0, {0.0005}).final_state().z;
    const double e1 = (integrate(p, z0, 4.0, {0.1}).final_state().z - ref).norm();
    const double e2 = (integrate(p, z0, 4.0, {0.05}).final_state().z - ref).norm();
    const double order = std::log2(e1 / e2);
    EXPECT_GT(order, 3.6);
    EXPECT_LT(order, 4.4);
}

TEST(Integrate, RowSumsStayZero) {
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::wheel, 5), 4, {1.0, 1.3, 0.4, 0.2, 0.6, -0.3});
    Eigen::MatrixXd z0(5, 4);
    z0 << 0.3, -0.1, -0.1, -0.1, 0.0, 0.2, -0.4, 0.2, 0.5, 0.5, -0.5, -0.5, 0.0, 0.0, 0.0, 0.0, -0.9, 0.3, 0.3, 0.3;
    const Trajectory tr = integrate(p, z0, 50.0, {0.02, 7});
    double drift = 0.0;
    for (const auto& s : tr.states) drift = std::max(drift, s.z.rowwise().sum().cwiseAbs().maxCoeff());
    EXPECT_LT(drift, 1e-12);
}

TEST(Integrate, RecordStrideKeepsBoundariesAndFinalState) {
    const ModelParams p = decay_model(0.0);
    const Trajectory tr = integrate(p, two_option({1.0}), 1.05, {0.1, 4});
    // 11 steps; recorded at 0, 4, 8 and the final step.
    ASSERT_EQ(tr.times.size(), 4u);
    EXPECT_DOUBLE_EQ(tr.times.back(), 1.05);
    EXPECT_NEAR(tr.at(0.5).z(0, 0), tr.states[1].z(0, 0), 0.0);
}

TEST(Integrate, ScheduleSwitchesInputsAtEvents) {
    const ModelParams p = decay_model(0.0);
    const System sys{p, std::nullopt, std::nullopt};
    InputSchedule sched = InputSchedule::constant(two_option({1.0}));
    sched.add(1.0, two_option({-1.0}), "flip");
    const Trajectory tr = integrate(sys, initial_state(sys, two_option({0.0})), sched, 3.0, {0.01});
    ASSERT_EQ(tr.events.size(), 2u);
    EXPECT_EQ(tr.events[1].tag, "flip");
    EXPECT_DOUBLE_EQ(tr.events[1].t, 1.0);
    const double x1 = 1.0 - std::exp(-1.0);
    EXPECT_NEAR(tr.at(1.0).z(0, 0), x1, 1e-10);
    const double x3 = -1.0 + (x1 + 1.0) * std::exp(-2.0);
    EXPECT_NEAR(tr.final_state().z(0, 0), x3, 1e-10);

    EXPECT_THROW(sched.add(0.5, two_option({0.2})), ParameterError);
    EXPECT_THROW(sched.add(5.0, two_option({0.2, 0.1})), DimensionError);
}

TEST(Integrate, SteadyStopAndErrors) {
    const ModelParams p = decay_model(0.2);
    IntegrateOptions o{0.01, 1, 1e-8};
    const Trajectory tr = integrate(p, two_option({1.0}), 1000.0, o);
    EXPECT_LT(tr.times.back(), 100.0);
    EXPECT_EQ(tr.events.back().tag, "steady");
    EXPECT_NEAR(tr.final_state().z(0, 0), 0.2, 1e-7);

    EXPECT_THROW(integrate(p, two_option({1.0}), 1.0, {0.0}), ParameterError);
    EXPECT_THROW(integrate(p, two_option({1.0}), -1.0, {0.1}), ParameterError);
    EXPECT_THROW(integrate(p, two_option({1.0, 2.0}), 1.0, {0.1}), DimensionError);
}

TEST(Integrate, DeterministicAcrossRuns) {
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::cycle, 6), 3, {1.0, 0.8, 0.5, 0.1, 0.7, 0.2});
    Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(6, 3);
    z0(0, 0) = 0.2;
    z0(0, 1) = -0.2;
    const Trajectory a = integrate(p, z0, 20.0, {0.05});
    const Trajectory b = integrate(p, z0, 20.0, {0.05});
    EXPECT_EQ((a.final_state().z - b.final_state().z).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Equilibrium, FindsLinearRestPointAndStability) {
    const ModelParams p = decay_model(0.4);
    const System sys{p, std::nullopt, std::nullopt};
    const EquilibriumReport r = find_equilibrium(sys, initial_state(sys, two_option({-2.0})));
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.stable);
    EXPECT_NEAR(r.state.z(0, 0), 0.4, 1e-10);
    EXPECT_LT(r.residual, 1e-10);
    ASSERT_EQ(r.spectrum.size(), 1);
    EXPECT_NEAR(r.spectrum(0).real(), -1.0, 1e-6);
}

TEST(Equilibrium, UnstableOriginPastThreshold) {
    // Three-agent path, d = alpha = 1, gamma = -1: origin loses stability at 1/(1 + sqrt 2).
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::path, 3), 2, {1.0, 0.6, 1.0, 0.0, -1.0, 0.0});
    const System sys{p, std::nullopt, std::nullopt};
    const EquilibriumReport r = find_equilibrium(sys, initial_state(sys, Eigen::MatrixXd::Zero(3, 2)));
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.stable);
    EXPECT_NEAR(r.spectrum.real().maxCoeff(), -1.0 + 0.6 * (1.0 + std::sqrt(2.0)), 1e-6);
}

TEST(Sweep, SinglePointGridAndValidation) {
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::path, 3), 2, {1.0, 0.3, 1.0, 0.0, -1.0, 0.0});
    const System sys{p, std::nullopt, std::nullopt};
    const auto pts = sweep_bifurcation(sys, {0.3}, {Eigen::MatrixXd::Zero(3, 2), two_option({0.1, 0.1, 0.1})});
    ASSERT_EQ(pts.size(), 1u);  // both seeds converge to the origin
    EXPECT_TRUE(pts[0].stable);
    EXPECT_LT(pts[0].state.z.norm(), 1e-8);
    EXPECT_THROW(sweep_bifurcation(sys, {0.5, 0.3}, {Eigen::MatrixXd::Zero(3, 2)}), ParameterError);
}

TEST(Reduced, RoundTripAndField) {
    const ModelParams p = ModelParams::homogeneous(build_graph(GraphKind::star, 4), 3, {1.0, 0.7, 0.3, 0.0, 1.0, 0.0});
    const System sys{p, std::nullopt, std::nullopt};
    const ReducedCoordinates rc(sys);
    EXPECT_EQ(rc.dimension(), 4 * 2);
    Eigen::MatrixXd z(4, 3);
    z << 0.3, -0.1, -0.2, 0.0, 0.4, -0.4, 1.0, -0.5, -0.5, -0.2, 0.1, 0.1;
    SystemState s{z, {}, {}, {}};
    const Eigen::VectorXd y = rc.to_reduced(s);
    EXPECT_LT((rc.from_reduced(y).z - z).cwiseAbs().maxCoeff(), 1e-15);
    const SystemState back = rc.from_reduced(rc.field(y));
    EXPECT_LT((back.z - vector_field(z, p)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Reduced, FiniteDifferenceJacobianOfQuadratic) {
    VectorFunction f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r << x(0) * x(1), x(0) * x(0) - 3.0 * x(1);
        return r;
    };
    const Eigen::MatrixXd j = finite_difference_jacobian(f, Eigen::Vector2d(2.0, -1.0));
    EXPECT_NEAR(j(0, 0), -1.0, 1e-8);
    EXPECT_NEAR(j(0, 1), 2.0, 1e-8);
    EXPECT_NEAR(j(1, 0), 4.0, 1e-8);
    EXPECT_NEAR(j(1, 1), -3.0, 1e-8);
}

TEST(ClusterManifold, HandComputedDistance) {
    Eigen::MatrixXd z(3, 2);
    z << 1.0, -1.0, 0.0, 0.0, 5.0, -5.0;
    // Cell {0, 1}: squared row distance 2, counted once.
    EXPECT_NEAR(distance_to_cluster_manifold(z, {{0, 1}, {2}}), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(distance_to_cluster_manifold(z, {{0}, {1}, {2}}), 0.0);
    EXPECT_THROW(distance_to_cluster_manifold(z, {{0, 1}}), ParameterError);
}

TEST(Parallel, RunsEveryIndexAndPropagatesErrors) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, [&](int i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, [](int i) {
                     if (i == 7) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);

    setenv("OPINIONLAB_THREADS", "1", 1);
    EXPECT_EQ(worker_count(), 1);
    unsetenv("OPINIONLAB_THREADS");
    EXPECT_GE(worker_count(), 1);
}
