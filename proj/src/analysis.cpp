#include "opinionlab/analysis.hpp"

#include "opinionlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace opinionlab {

std::string_view to_string(Regime r) {
    return r == Regime::agreement ? "agreement" : "disagreement";
}

RegimePrediction critical_attention(const HomogeneousGains& g, const AdjacencySpec& a) {
    const double coupling = g.gamma - g.delta;
    if (coupling == 0.0) {
        throw HypothesisError(
            "gamma == delta: agreement and disagreement thresholds coincide (mode interaction); "
            "not analysed");
    }
    if (!(g.d > 0.0)) throw ParameterError("d must be positive");

    const SpectralSummary s = spectral_extrema(a);
    RegimePrediction r;
    r.hypotheses_ok = true;
    auto fail = [&](std::string why) {
        r.hypotheses_ok = false;
        r.diagnostics.push_back(std::move(why));
    };

    if (coupling > 0.0) {
        r.regime = Regime::agreement;
        r.lambda = s.lambda_max;
        r.pattern_vector = s.v_max;
        r.centrality_vector = s.w_max;
        if (!s.lambda_max_real) fail("lambda_max is not real");
        if (!s.lambda_max_simple) fail("lambda_max is not simple");
        if (!s.lambda_max_real_part_isolated) fail("another eigenvalue shares Re(lambda_max)");
    } else {
        r.regime = Regime::disagreement;
        r.lambda = s.lambda_min;
        r.pattern_vector = s.v_min;
        r.centrality_vector = s.w_min;
        if (!s.lambda_min_real) fail("lambda_min is not real");
        if (!s.lambda_min_simple) fail("lambda_min is not simple");
        if (!s.lambda_min_real_part_isolated) fail("another eigenvalue shares Re(lambda_min)");
    }
    const double denom = g.alpha - g.beta + r.lambda * coupling;
    if (denom > 0.0) {
        r.u_star = g.d / denom;
    } else {
        r.u_star = std::numeric_limits<double>::infinity();
        std::ostringstream msg;
        msg << "alpha - beta + lambda (gamma - delta) = " << denom << " is not positive";
        fail(msg.str());
    }
    return r;
}

RegimePrediction critical_attention(const ModelParams& p) {
    if (!p.gains || !p.graph) {
        throw HypothesisError("critical_attention needs a homogeneous-regime parameter set");
    }
    return critical_attention(*p.gains, *p.graph);
}

namespace {

double max_real_eigenvalue(const Eigen::MatrixXd& m) {
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().real().maxCoeff();
}

void require_identical_d_u(const ModelParams& p) {
    if (!(p.d.array() == p.d(0)).all() || !(p.u.array() == p.u(0)).all()) {
        throw HypothesisError("threshold needs identical d and u across agents");
    }
}

Eigen::MatrixXd linear_part(const ModelParams& p) {
    Eigen::MatrixXd m = p.Gamma - p.Delta;
    m.diagonal() += p.alpha - p.beta;
    return m;
}

}  // namespace

double critical_attention_general(const ModelParams& p) {
    require_identical_d_u(p);
    const double lambda = max_real_eigenvalue(linear_part(p));
    if (!(lambda > 0.0)) {
        throw HypothesisError("largest real part of diag(alpha - beta) + Gamma - Delta is not positive");
    }
    return p.d(0) / lambda;
}

double origin_growth_rate(const ModelParams& p) {
    require_identical_d_u(p);
    return -p.d(0) + p.u(0) * max_real_eigenvalue(linear_part(p));
}

StateClassification classify_state(const Eigen::MatrixXd& z, double strong_threshold, double tol) {
    if (!(strong_threshold > 0.0) || !(tol > 0.0)) {
        throw ParameterError("classification thresholds must be positive");
    }
    StateClassification c;
    const Eigen::Index n = z.rows(), m = z.cols();
    c.sign_matrix.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            c.sign_matrix(i, j) = std::abs(z(i, j)) < tol ? 0 : (z(i, j) > 0.0 ? 1 : -1);
        }
    }
    c.agreement = true;
    for (Eigen::Index j = 0; j < m && c.agreement; ++j) {
        int seen = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int s = c.sign_matrix(i, j);
            if (s == 0) continue;
            if (seen == 0) {
                seen = s;
            } else if (s != seen) {
                c.agreement = false;
                break;
            }
        }
    }
    c.consensus = true;
    for (Eigen::Index i = 1; i < n; ++i) {
        if ((z.row(i) - z.row(0)).cwiseAbs().maxCoeff() >= tol) c.consensus = false;
    }
    c.dissensus = n > 0 && (z.colwise().mean().cwiseAbs().array() < tol).all();
    c.neutral = n == 0 || z.cwiseAbs().maxCoeff() < tol;
    c.strong.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) c.strong[i] = z.row(i).norm() >= strong_threshold;
    return c;
}

Partition opinion_clusters(const Eigen::MatrixXd& z, double tol) {
    Partition cells;
    for (int i = 0; i < z.rows(); ++i) {
        bool placed = false;
        for (auto& cell : cells) {
            if ((z.row(i) - z.row(cell.front())).cwiseAbs().maxCoeff() < tol) {
                cell.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) cells.push_back({i});
    }
    return cells;
}

Unfolding unfolding_direction(const Eigen::VectorXd& b, const SpectralSummary& summary,
                              Regime regime) {
    const Eigen::VectorXd& v = regime == Regime::agreement ? summary.v_max : summary.v_min;
    const Eigen::VectorXd& w = regime == Regime::agreement ? summary.w_max : summary.w_min;
    if (b.size() != w.size()) throw DimensionError("input and eigenvector sizes differ");
    Unfolding u;
    u.inner = b.dot(w);
    const double vw = v.dot(w);
    const double s = u.inner * vw;
    u.branch_sign = s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
    return u;
}

bool ClusterCondition::all() const {
    return std::all_of(holds.begin(), holds.end(), [](bool h) { return h; });
}

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

struct ClusterGains {
    std::vector<int> cell_of;
    Eigen::VectorXd d, u, alpha_bar, beta_bar, alpha_tilde, beta_tilde;
    Eigen::MatrixXd gamma_tilde, delta_tilde;  // inter-cluster, zero diagonal
    Eigen::MatrixXd b_raw;
};

ClusterGains cluster_gains(const ModelParams& p, const Partition& partition) {
    const int n = p.n_agents();
    const int nc = static_cast<int>(partition.size());
    ClusterGains g;
    g.cell_of = cell_index(partition, n);
    g.d.resize(nc);
    g.u.resize(nc);
    g.alpha_bar.resize(nc);
    g.beta_bar.resize(nc);
    g.alpha_tilde.setZero(nc);
    g.beta_tilde.setZero(nc);
    g.gamma_tilde.setZero(nc, nc);
    g.delta_tilde.setZero(nc, nc);
    g.b_raw.resize(nc, p.n_options());

    auto refuse = [](const std::string& what, int cell) {
        std::ostringstream msg;
        msg << "cluster hypothesis fails: " << what << " differs within cluster " << cell;
        throw HypothesisError(msg.str());
    };

    for (int c = 0; c < nc; ++c) {
        const auto& cell = partition[c];
        const int i0 = cell.front();
        g.d(c) = p.d(i0);
        g.u(c) = p.u(i0);
        g.alpha_bar(c) = p.alpha(i0);
        g.beta_bar(c) = p.beta(i0);
        g.b_raw.row(c) = p.b.row(i0);
        for (int i : cell) {
            if (!close(p.d(i), g.d(c))) refuse("d", c);
            if (!close(p.u(i), g.u(c))) refuse("u", c);
            if (!close(p.alpha(i), g.alpha_bar(c))) refuse("alpha", c);
            if (!close(p.beta(i), g.beta_bar(c))) refuse("beta", c);
            if ((p.b.row(i) - p.b.row(i0)).cwiseAbs().maxCoeff() > 1e-12) refuse("input", c);
        }
        if (cell.size() > 1) {
            g.alpha_tilde(c) = p.Gamma(cell[0], cell[1]);
            g.beta_tilde(c) = p.Delta(cell[0], cell[1]);
            for (int i : cell) {
                for (int k : cell) {
                    if (i == k) continue;
                    if (!close(p.Gamma(i, k), g.alpha_tilde(c))) refuse("intra-cluster gamma", c);
                    if (!close(p.Delta(i, k), g.beta_tilde(c))) refuse("intra-cluster delta", c);
                }
            }
        }
    }
    for (int c = 0; c < nc; ++c) {
        for (int s = 0; s < nc; ++s) {
            if (c == s) continue;
            const double gv = p.Gamma(partition[c].front(), partition[s].front());
            const double dv = p.Delta(partition[c].front(), partition[s].front());
            for (int i : partition[c]) {
                for (int k : partition[s]) {
                    if (!close(p.Gamma(i, k), gv) || !close(p.Delta(i, k), dv)) {
                        std::ostringstream msg;
                        msg << "cluster hypothesis fails: gains from cluster " << s
                            << " to cluster " << c << " are not uniform";
                        throw HypothesisError(msg.str());
                    }
                }
            }
            g.gamma_tilde(c, s) = gv;
            g.delta_tilde(c, s) = dv;
        }
    }
    return g;
}

}  // namespace

ClusterCondition check_cluster_condition(const ModelParams& p, const Partition& partition) {
    const ClusterGains g = cluster_gains(p, partition);
    const double kappa1 = p.s1.max_slope();
    const double kappa2 = p.s2.max_slope();
    ClusterCondition c;
    c.worst_margin = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < static_cast<int>(partition.size()); ++q) {
        // sup over kappa in (0, kappa_max] of a linear function of kappa.
        const double a = g.alpha_bar(q) - g.alpha_tilde(q);
        const double b = g.beta_bar(q) - g.beta_tilde(q);
        const double margin = -g.d(q) + g.u(q) * std::max(0.0, a) * kappa1 +
                              g.u(q) * std::max(0.0, b) * kappa2;
        c.margin.push_back(margin);
        c.holds.push_back(margin < 0.0);
        c.worst_margin = std::max(c.worst_margin, margin);
    }
    return c;
}

ModelParams reduce_clusters(const ModelParams& p, const Partition& partition) {
    const ClusterGains g = cluster_gains(p, partition);
    const int nc = static_cast<int>(partition.size());
    Eigen::VectorXd alpha(nc), beta(nc);
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(nc, nc), Delta = Eigen::MatrixXd::Zero(nc, nc);
    for (int q = 0; q < nc; ++q) {
        const double np = static_cast<double>(partition[q].size());
        alpha(q) = g.alpha_bar(q) + (np - 1.0) * g.alpha_tilde(q);
        beta(q) = g.beta_bar(q) + (np - 1.0) * g.beta_tilde(q);
        for (int s = 0; s < nc; ++s) {
            if (s == q) continue;
            const double ns = static_cast<double>(partition[s].size());
            Gamma(q, s) = ns * g.gamma_tilde(q, s);
            Delta(q, s) = ns * g.delta_tilde(q, s);
        }
    }
    return ModelParams::make(g.d, g.u, alpha, beta, Gamma, Delta, g.b_raw, p.s1, p.s2);
}

Eigen::MatrixXd cluster_average(const Eigen::MatrixXd& z, const Partition& partition) {
    validate_partition(partition, static_cast<int>(z.rows()));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(partition.size()), z.cols());
    for (std::size_t q = 0; q < partition.size(); ++q) {
        for (int i : partition[q]) out.row(q) += z.row(i);
        out.row(q) /= static_cast<double>(partition[q].size());
    }
    return out;
}

namespace {

void check_permutation(const std::vector<int>& perm, Eigen::Index n, const char* what) {
    if (static_cast<Eigen::Index>(perm.size()) != n) {
        throw DimensionError(std::string(what) + " permutation has the wrong length");
    }
    std::vector<bool> seen(perm.size(), false);
    for (int v : perm) {
        if (v < 0 || v >= static_cast<int>(perm.size()) || seen[v]) {
            throw ParameterError(std::string(what) + " permutation is not a bijection");
        }
        seen[v] = true;
    }
}

}  // namespace

Eigen::MatrixXd permute_state(const Eigen::MatrixXd& z, const std::vector<int>& agent_perm,
                              const std::vector<int>& option_perm) {
    check_permutation(agent_perm, z.rows(), "agent");
    check_permutation(option_perm, z.cols(), "option");
    Eigen::MatrixXd out(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) out(i, j) = z(agent_perm[i], option_perm[j]);
    }
    return out;
}

double equivariance_residual(const ModelParams& p, const std::vector<int>& agent_perm,
                             const std::vector<int>& option_perm,
                             const std::vector<Eigen::MatrixXd>& samples) {
    double worst = 0.0;
    for (const auto& z : samples) {
        const Eigen::MatrixXd lhs = permute_state(vector_field(z, p), agent_perm, option_perm);
        const Eigen::MatrixXd rhs = vector_field(permute_state(z, agent_perm, option_perm), p);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

double predict_symmetric_lambda(GraphKind kind, int n, Regime regime) {
    if (kind == GraphKind::all_to_all) {
        if (n < 2) throw ParameterError("all-to-all graph needs n >= 2");
        return regime == Regime::agreement ? n - 1.0 : -1.0;
    }
    if (kind == GraphKind::cycle) {
        if (n < 3) throw ParameterError("cycle graph needs n >= 3");
        if (regime == Regime::agreement) return 2.0;
        if (n % 2 == 0) return -2.0;
        return 2.0 * std::cos(std::numbers::pi * (n - 1) / n);
    }
    throw ParameterError("closed-form lambda is only available for all_to_all and cycle graphs");
}

}  // namespace opinionlab
