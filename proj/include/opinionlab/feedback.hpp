#pragma once

#include "opinionlab/graph.hpp"
#include "opinionlab/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace opinionlab {

struct AttentionParams {
    double tau_u = 1.0;
    double n_hill = 2.0;
    double y_th = 0.4;
    double u_low = 0.0;
    double u_high = 2.0;
    /// Attention adjacency abar; empty means A + I of the model's graph.
    Eigen::MatrixXd abar;

    /// Positivity and ordering checks (u_high > u_low >= 0).
    void validate() const;
    /// u_high > u_star >= u_low, the window in which attention can both stay
    /// low and trigger opinion formation.
    bool brackets(double u_star) const { return u_high > u_star && u_star >= u_low; }
};

/// u_low + (u_high - u_low) y^n / (y_th^n + y^n); throws for y < 0.
double hill_eval(const AttentionParams& ap, double y);

/// Attention drive y_i = (1/N_o) sum_k sum_l (abar_ik z_kl)^2.
Eigen::VectorXd attention_drive(const Eigen::MatrixXd& z, const Eigen::MatrixXd& abar);

/// du_i/dt = (-u_i + S_u(y_i)) / tau_u.
Eigen::VectorXd attention_field(const Eigen::MatrixXd& z, const Eigen::VectorXd& u,
                                const AttentionParams& ap, const Eigen::MatrixXd& abar);

/// abar = A + I.
Eigen::MatrixXd default_attention_adjacency(const AdjacencySpec& a);

struct CouplingFeedbackParams {
    /// Initial sign; later values come from sigma_switches.
    int sigma = 1;
    double tau_gamma = 1.0, tau_delta = 1.0;
    double gamma_f = 1.0, delta_f = 1.0;
    double g_gamma = 1.0, g_delta = 1.0;
    /// Exactly two clusters.
    Partition partition;
    /// (time, new sigma) pairs, strictly increasing in time.
    std::vector<std::pair<double, int>> sigma_switches;
    /// W(i, k) scales the per-agent gains gamma_i, delta_i into Gamma(i, k),
    /// Delta(i, k). Empty means 1 / N_s for k in the other cluster s.
    Eigen::MatrixXd inter_weights;

    void validate(int n_agents) const;
    int sigma_at(double t) const;
    Eigen::MatrixXd weights(int n_agents) const;
};

struct CouplingRates {
    double dgamma;
    double ddelta;
};

/// tau_gamma gamma' = -gamma + sigma gamma_f tanh(g_gamma x1 x2),
/// tau_delta delta' = -delta - sigma delta_f tanh(g_delta x1 x2).
CouplingRates coupling_field(double gamma_i, double delta_i, double xhat1, double xhat2,
                             const CouplingFeedbackParams& cp, int sigma);

/// Mean of the first-option opinion over each cluster.
std::pair<double, double> cluster_means(const Eigen::MatrixXd& z, const Partition& partition);

/// Cascade bookkeeping shared by the estimator, the Monte-Carlo study and
/// the figure recipes.
struct CascadeOptions {
    double t_end = 500.0;
    double dt = 0.01;
    /// |x_i| at or above this counts as strongly opinionated; <= 0 selects sqrt(y_th).
    double strong_threshold = 0.0;
    /// Stop integrating once the field max-norm drops below this (0 disables).
    double steady_tol = 0.0;
    /// Stop once the cascade criterion has held continuously this long (0 disables).
    double cascade_hold = 0.0;
    /// Initial attention of every agent; negative selects u_low.
    double u0 = -1.0;
};

double effective_strong_threshold(const CascadeOptions& opts, const AttentionParams& ap);

/// At least ceil(N/2) agents with |z_i1| >= threshold.
bool is_cascade(const Eigen::MatrixXd& z, double strong_threshold);

struct CascadeOutcome {
    bool cascade = false;
    Eigen::MatrixXd z_final;
    Eigen::VectorXd u_final;
    double t_final = 0.0;
};

/// Integrates opinions plus attention from the weakly opinionated rest state
/// (z = 0, u = u0 or u_low) with constant two-option input b.
CascadeOutcome run_cascade_trial(const ModelParams& p, const AttentionParams& ap,
                                 const Eigen::VectorXd& b, const CascadeOptions& opts);

struct CascadeThreshold {
    /// Bisection midpoint on input magnitude along the direction.
    double magnitude = 0.0;
    /// |<w_c, b>| at that magnitude.
    double p = 0.0;
    double lo = 0.0, hi = 0.0;
    int trials = 0;
};

/// Bisection on m in b = m * direction until hi - lo <= resolution. Requires
/// a symmetric irreducible graph on p and a straddling bracket.
CascadeThreshold estimate_cascade_threshold(const ModelParams& p, const AttentionParams& ap,
                                            const Eigen::VectorXd& direction, double m_lo,
                                            double m_hi, double resolution,
                                            const CascadeOptions& opts);

struct CascadeStudyOptions {
    int magnitude_bins = 5;
    int alignment_bins = 5;
    double max_magnitude = 0.1;
    int trials = 1000;
    std::uint64_t seed = 1;
    /// Sign applied to w_c when building inputs.
    double orientation = 1.0;
    CascadeOptions cascade;
};

struct CascadeCell {
    int magnitude_bin = 0, alignment_bin = 0;
    double magnitude_lo = 0.0, magnitude_hi = 0.0;
    double alignment_lo = 0.0, alignment_hi = 0.0;
    int trials = 0;
    int cascades = 0;
    double frequency() const { return trials > 0 ? static_cast<double>(cascades) / trials : 0.0; }
};

/// b = m (c s w_c + sqrt(1 - c^2) q) with m and c uniform within each bin and
/// q a random unit vector orthogonal to w_c. Cells in magnitude-major order.
std::vector<CascadeCell> cascade_study(const ModelParams& p, const AttentionParams& ap,
                                       const Eigen::VectorXd& w_c,
                                       const CascadeStudyOptions& opts);

}  // namespace opinionlab
