#pragma once

#include "opinionlab/feedback.hpp"
#include "opinionlab/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace opinionlab {

/// Opinion model optionally coupled with attention and inter-cluster
/// coupling-gain feedback.
struct System {
    ModelParams model;
    std::optional<AttentionParams> attention;
    std::optional<CouplingFeedbackParams> coupling;

    /// Resolved attention adjacency (abar, or A + I).
    Eigen::MatrixXd attention_matrix() const;
};

struct SystemState {
    Eigen::MatrixXd z;
    /// Present only when the corresponding feedback is active.
    Eigen::VectorXd u, gamma, delta;
};

/// Piecewise-constant inputs. Segment b values are row-centred on insertion.
class InputSchedule {
public:
    struct Segment {
        double t_start;
        Eigen::MatrixXd b;
        Eigen::MatrixXd b_raw;
        std::string tag;
    };

    InputSchedule() = default;
    static InputSchedule constant(const Eigen::MatrixXd& b_raw);
    /// Segment starts must be strictly increasing.
    InputSchedule& add(double t_start, const Eigen::MatrixXd& b_raw, std::string tag = "input");

    bool empty() const { return segments_.empty(); }
    const std::vector<Segment>& segments() const { return segments_; }
    /// Segment active at t (the last with t_start <= t); nullptr before the first.
    const Segment* active(double t) const;

private:
    std::vector<Segment> segments_;
};

/// Two-option input vector b lifted to rows (b_i, -b_i).
Eigen::MatrixXd lift_two_option(const Eigen::VectorXd& b);

struct TrajectoryEvent {
    double t;
    std::string tag;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<TrajectoryEvent> events;

    const SystemState& final_state() const { return states.back(); }
    /// Latest recorded snapshot with time <= t.
    const SystemState& at(double t) const;
};

struct IntegrateOptions {
    double dt = 0.01;
    /// Record every k-th step (event boundaries and the final state are always kept).
    int record_stride = 1;
    /// Stop early once the field max-norm falls below this, provided no
    /// schedule events remain (0 disables).
    double steady_tol = 0.0;
};

/// Full field of the composed system at time-independent inputs b (projected).
void system_field(const System& sys, const SystemState& s, const Eigen::MatrixXd& b, int sigma,
                  SystemState& out);

/// Classical RK4 with steps aligned to every schedule and sigma event. Opinion
/// rows are re-centred after every step. Without a schedule the model's own b
/// is used.
Trajectory integrate(const System& sys, const SystemState& initial, const InputSchedule& schedule,
                     double t_end, const IntegrateOptions& opts = {});

/// Zero-feedback convenience overload.
Trajectory integrate(const ModelParams& p, const Eigen::MatrixXd& z0, double t_end,
                     const IntegrateOptions& opts = {});

/// Initial state with u = u_low and zero gains when those blocks are active.
SystemState initial_state(const System& sys, const Eigen::MatrixXd& z0);

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central differences, one column per coordinate.
Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& x,
                                           double h = 1e-6);

/// Coordinates on V (per-agent orthonormal basis of the zero-sum subspace)
/// plus the feedback variables.
class ReducedCoordinates {
public:
    explicit ReducedCoordinates(const System& sys);
    int dimension() const { return dim_; }
    Eigen::VectorXd to_reduced(const SystemState& s) const;
    SystemState from_reduced(const Eigen::VectorXd& y) const;
    /// The composed field in reduced coordinates, at the model's inputs.
    Eigen::VectorXd field(const Eigen::VectorXd& y) const;

private:
    const System* sys_;
    int n_, m_, dim_;
    bool has_u_, has_gains_;
    Eigen::MatrixXd Q_;
};

enum class StateTag { neutral, agreement, disagreement, unclassified };

struct EquilibriumReport {
    SystemState state;
    double residual = 0.0;
    bool converged = false;
    bool stable = false;
    /// Eigenvalues of the reduced Jacobian.
    Eigen::VectorXcd spectrum;
    StateTag tag = StateTag::unclassified;
};

struct EquilibriumOptions {
    double tol = 1e-10;
    int max_newton = 60;
    /// Integration horizon for the fallback when Newton stalls.
    double fallback_time = 2000.0;
    double dt = 0.01;
};

/// Damped Newton on the reduced field with a finite-difference Jacobian,
/// falling back to long integration. Reports the best iterate either way.
EquilibriumReport find_equilibrium(const System& sys, const SystemState& guess,
                                   const EquilibriumOptions& opts = {});

/// Stability from reduced-Jacobian eigenvalues (all real parts < -1e-7).
bool is_stable_spectrum(const Eigen::VectorXcd& spectrum);

struct BranchPoint {
    double u = 0.0;
    SystemState state;
    bool stable = false;
    double residual = 0.0;
    /// <x, w> with x the first-option column.
    double projection = 0.0;
};

struct SweepOptions {
    EquilibriumOptions equilibrium;
    /// Project onto this vector (empty: no projection).
    Eigen::VectorXd w;
    /// Integrate each seed for this long before Newton (0: Newton from the seed).
    double presettle_time = 0.0;
    double dedup_distance = 1e-6;
};

/// For each u on the grid, converge from every seed, deduplicate, and flag
/// stability. Grid points run in parallel; output is in grid order.
std::vector<BranchPoint> sweep_bifurcation(const System& sys, const std::vector<double>& u_grid,
                                           const std::vector<Eigen::MatrixXd>& seeds,
                                           const SweepOptions& opts = {});

/// sqrt(sum_p 1/2 sum_{i,k in I_p} sum_j (z_ij - z_kj)^2).
double distance_to_cluster_manifold(const Eigen::MatrixXd& z, const Partition& partition);

/// Number of workers: hardware concurrency, capped by OPINIONLAB_THREADS.
int worker_count();
/// Runs body(i) for i in [0, n) on worker_count() threads. Exceptions from
/// workers are rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace opinionlab
