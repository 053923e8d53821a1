#pragma once

#include "opinionlab/graph.hpp"
#include "opinionlab/saturation.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace opinionlab {

/// Stacked agent opinions: row i is agent i's opinion over the options and
/// sums to zero.
class OpinionState {
public:
    /// Throws DimensionError for fewer than two options and ParameterError if
    /// a row sum exceeds 1e-9 in magnitude.
    explicit OpinionState(Eigen::MatrixXd z);
    static OpinionState zeros(int n_agents, int n_options);
    /// Lift of a two-option state x to rows (x_i, -x_i).
    static OpinionState from_two_option(const Eigen::VectorXd& x);

    int n_agents() const { return static_cast<int>(z_.rows()); }
    int n_options() const { return static_cast<int>(z_.cols()); }
    const Eigen::MatrixXd& z() const { return z_; }

private:
    Eigen::MatrixXd z_;
};

/// P0 v = v - mean(v) 1.
Eigen::VectorXd project_tangent(const Eigen::VectorXd& v);
/// Applies project_tangent to every row.
Eigen::MatrixXd project_rows(const Eigen::MatrixXd& m);

/// Scalar gains shared by every agent, with the graph they act through.
struct HomogeneousGains {
    double d = 1.0;
    double u = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
};

struct ModelParams {
    Eigen::VectorXd d, u, alpha, beta;
    Eigen::MatrixXd Gamma, Delta;
    /// Row-centred inputs; b_raw keeps what the caller supplied.
    Eigen::MatrixXd b, b_raw;
    SaturationSpec s1, s2;
    /// Set by the homogeneous constructor; Gamma = gamma A, Delta = delta A.
    std::optional<HomogeneousGains> gains;
    std::optional<AdjacencySpec> graph;

    int n_agents() const { return static_cast<int>(d.size()); }
    int n_options() const { return static_cast<int>(b.cols()); }

    /// Validates shapes and signs and projects b_raw into b.
    static ModelParams make(Eigen::VectorXd d, Eigen::VectorXd u, Eigen::VectorXd alpha,
                            Eigen::VectorXd beta, Eigen::MatrixXd Gamma, Eigen::MatrixXd Delta,
                            Eigen::MatrixXd b_raw, SaturationSpec s1 = SaturationSpec::odd_tanh(),
                            SaturationSpec s2 = SaturationSpec::odd_tanh());
    static ModelParams homogeneous(const AdjacencySpec& a, int n_options, const HomogeneousGains& g,
                                   const Eigen::MatrixXd& b_raw = {},
                                   SaturationSpec s1 = SaturationSpec::odd_tanh(),
                                   SaturationSpec s2 = SaturationSpec::odd_tanh());

    /// Copies with a replaced field; results are revalidated.
    ModelParams with_u(const Eigen::VectorXd& u_new) const;
    ModelParams with_u(double u_new) const;
    ModelParams with_inputs(const Eigen::MatrixXd& b_raw_new) const;

    /// Checks every invariant; throws on violation.
    void validate() const;
    bool is_homogeneous_scalars() const;
};

/// Field of the general model. `u`, `Gamma` and `Delta` may be overridden
/// (feedback dynamics vary them); pass nullptr to use the stored values.
void vector_field_into(const Eigen::MatrixXd& z, const ModelParams& p, Eigen::MatrixXd& out,
                       const Eigen::VectorXd* u = nullptr, const Eigen::MatrixXd* Gamma = nullptr,
                       const Eigen::MatrixXd* Delta = nullptr, const Eigen::MatrixXd* b = nullptr);
Eigen::MatrixXd vector_field(const OpinionState& state, const ModelParams& p);
Eigen::MatrixXd vector_field(const Eigen::MatrixXd& z, const ModelParams& p);

/// Gains A[i][k][j][l] from agent k, option l to agent i, option j.
class AdjacencyTensor {
public:
    AdjacencyTensor(int n_agents, int n_options);
    static AdjacencyTensor from_params(const ModelParams& p);

    int n_agents() const { return n_; }
    int n_options() const { return m_; }
    double& operator()(int i, int k, int j, int l) { return a_[index(i, k, j, l)]; }
    double operator()(int i, int k, int j, int l) const { return a_[index(i, k, j, l)]; }

private:
    std::size_t index(int i, int k, int j, int l) const {
        return ((static_cast<std::size_t>(i) * n_ + k) * m_ + j) * m_ + l;
    }
    int n_, m_;
    std::vector<double> a_;
};

Eigen::MatrixXd vector_field_tensor(const OpinionState& state, const AdjacencyTensor& a,
                                    const Eigen::VectorXd& d, const Eigen::VectorXd& u,
                                    const Eigen::MatrixXd& b, const SaturationSpec& s1,
                                    const SaturationSpec& s2);

/// Scalar-opinion reduction for two options: x_i = z_i1 = -z_i2.
struct TwoOptionParams {
    Eigen::VectorXd d, u, alpha, beta;
    Eigen::MatrixXd Gamma, Delta;
    Eigen::VectorXd b;
    SaturationSpec s1, s2;

    static TwoOptionParams homogeneous(const AdjacencySpec& a, const HomogeneousGains& g,
                                       const Eigen::VectorXd& b = {});
    /// The general-model parameters whose two-option reduction this is.
    ModelParams to_general() const;
    void validate() const;
};

Eigen::VectorXd vector_field_two_option(const Eigen::VectorXd& x, const TwoOptionParams& p);

/// Linear signed consensus x' = -(D - A) x with D = diag(sum_k |a_ik|).
Eigen::VectorXd altafini_field(const Eigen::VectorXd& x, const Eigen::MatrixXd& a);

struct OriginJacobian {
    /// (n N_o) x (n N_o), agent-major ordering.
    Eigen::MatrixXd J;
    /// -d + u(alpha - beta) + u lambda_i(Gamma - Delta), one per agent; each
    /// appears N_o - 1 times on V.
    Eigen::VectorXcd spectrum_on_V;
    double max_real_on_V = 0.0;
};

/// Requires b = 0 and identical d, u, alpha, beta across agents.
OriginJacobian jacobian_at_origin(const ModelParams& p);

/// Bound on |u_i (S1(.) + sum S2(.)) + b_ij| over the whole state space.
double coupling_bound(const ModelParams& p);
/// Radius that trajectories from z0 never leave.
double boundedness_radius(const ModelParams& p, double initial_norm);

/// (r / (N_o R)) Z + r / N_o: maps |z_ij| <= R to a product of simplices of mass r.
Eigen::MatrixXd simplex_map(const Eigen::MatrixXd& z, double r, double R);

}  // namespace opinionlab
