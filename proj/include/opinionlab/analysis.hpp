#pragma once

#include "opinionlab/graph.hpp"
#include "opinionlab/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace opinionlab {

enum class Regime { agreement, disagreement };

std::string_view to_string(Regime r);

struct RegimePrediction {
    double u_star = 0.0;
    Regime regime = Regime::agreement;
    /// Eigenvalue of A the threshold is built from.
    double lambda = 0.0;
    Eigen::VectorXd pattern_vector;
    Eigen::VectorXd centrality_vector;
    bool hypotheses_ok = false;
    std::vector<std::string> diagnostics;
};

/// Homogeneous regime (Gamma = gamma A, Delta = delta A): u_a from lambda_max
/// when gamma > delta, u_d from lambda_min when gamma < delta. gamma == delta
/// is refused with HypothesisError. Spectral hypothesis failures are reported
/// through hypotheses_ok and diagnostics.
RegimePrediction critical_attention(const ModelParams& p);
RegimePrediction critical_attention(const HomogeneousGains& g, const AdjacencySpec& a);

/// Heterogeneous-gain threshold for identical d and u: d / lambda where lambda
/// is the largest real part of diag(alpha - beta) + Gamma - Delta. Throws
/// HypothesisError if lambda <= 0 or d, u differ across agents.
double critical_attention_general(const ModelParams& p);

/// Largest real eigenvalue part of the origin Jacobian restricted to V,
/// -d + u lambda_max(diag(alpha - beta) + Gamma - Delta).
double origin_growth_rate(const ModelParams& p);

struct StateClassification {
    bool agreement = false;
    bool consensus = false;
    bool dissensus = false;
    bool neutral = false;
    /// Per agent: ||Z_i|| >= strong_threshold.
    std::vector<bool> strong;
    /// Per agent/option sign in {-1, 0, 1}; 0 for |z| < tol.
    Eigen::MatrixXi sign_matrix;
};

StateClassification classify_state(const Eigen::MatrixXd& z, double strong_threshold,
                                   double tol = 1e-3);

/// Groups agents whose rows agree within tol (first-seen order).
Partition opinion_clusters(const Eigen::MatrixXd& z, double tol);

struct Unfolding {
    /// <b, w> for the regime's left eigenvector.
    double inner = 0.0;
    /// Sign of the favoured branch along the pattern vector (0 if symmetric).
    int branch_sign = 0;
};

/// b is a two-option input vector (one entry per agent).
Unfolding unfolding_direction(const Eigen::VectorXd& b, const SpectralSummary& summary,
                              Regime regime);

struct ClusterCondition {
    std::vector<bool> holds;
    std::vector<double> margin;
    double worst_margin = 0.0;
    bool all() const;
};

/// Requires parameters homogeneous within clusters and inter-cluster gains
/// constant on blocks; throws HypothesisError otherwise.
ClusterCondition check_cluster_condition(const ModelParams& p, const Partition& partition);

/// Reduced model with one agent per cluster.
ModelParams reduce_clusters(const ModelParams& p, const Partition& partition);

/// Mean opinion row of each cluster.
Eigen::MatrixXd cluster_average(const Eigen::MatrixXd& z, const Partition& partition);

/// (rho Z)_ij = Z_{pi(i), sigma(j)}; returns max over samples of
/// max |rho F(Z) - F(rho Z)|.
double equivariance_residual(const ModelParams& p, const std::vector<int>& agent_perm,
                             const std::vector<int>& option_perm,
                             const std::vector<Eigen::MatrixXd>& samples);

Eigen::MatrixXd permute_state(const Eigen::MatrixXd& z, const std::vector<int>& agent_perm,
                              const std::vector<int>& option_perm);

/// Eigenvalue entering u_a / u_d for all-to-all and cycle graphs.
double predict_symmetric_lambda(GraphKind kind, int n, Regime regime);

}  // namespace opinionlab
