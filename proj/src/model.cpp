#include "opinionlab/model.hpp"

#include "opinionlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace opinionlab {

OpinionState::OpinionState(Eigen::MatrixXd z) : z_(std::move(z)) {
    if (z_.rows() < 1) throw DimensionError("opinion state needs at least one agent");
    if (z_.cols() < 2) throw DimensionError("opinion state needs at least two options");
    if (!z_.allFinite()) throw ParameterError("opinion state has non-finite entries");
    for (Eigen::Index i = 0; i < z_.rows(); ++i) {
        if (std::abs(z_.row(i).sum()) > 1e-9) {
            std::ostringstream msg;
            msg << "opinion of agent " << i << " does not sum to zero (" << z_.row(i).sum() << ")";
            throw ParameterError(msg.str());
        }
    }
}

OpinionState OpinionState::zeros(int n_agents, int n_options) {
    return OpinionState(Eigen::MatrixXd::Zero(n_agents, n_options));
}

OpinionState OpinionState::from_two_option(const Eigen::VectorXd& x) {
    Eigen::MatrixXd z(x.size(), 2);
    z.col(0) = x;
    z.col(1) = -x;
    return OpinionState(std::move(z));
}

Eigen::VectorXd project_tangent(const Eigen::VectorXd& v) {
    if (v.size() == 0) return v;
    return v.array() - v.mean();
}

Eigen::MatrixXd project_rows(const Eigen::MatrixXd& m) {
    if (m.cols() == 0) return m;
    return m.colwise() - m.rowwise().mean();
}

namespace {

void require_size(const Eigen::VectorXd& v, int n, const char* name) {
    if (v.size() != n) {
        std::ostringstream msg;
        msg << name << " has " << v.size() << " entries, expected " << n;
        throw DimensionError(msg.str());
    }
}

void require_square(const Eigen::MatrixXd& m, int n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
        std::ostringstream msg;
        msg << name << " is " << m.rows() << "x" << m.cols() << ", expected " << n << "x" << n;
        throw DimensionError(msg.str());
    }
}

bool constant(const Eigen::VectorXd& v) {
    return v.size() == 0 || (v.array() == v(0)).all();
}

}  // namespace

void ModelParams::validate() const {
    const int n = static_cast<int>(d.size());
    if (n < 1) throw DimensionError("model needs at least one agent");
    require_size(u, n, "u");
    require_size(alpha, n, "alpha");
    require_size(beta, n, "beta");
    require_square(Gamma, n, "Gamma");
    require_square(Delta, n, "Delta");
    if (b.rows() != n || b_raw.rows() != n || b.cols() != b_raw.cols()) {
        throw DimensionError("input matrix must have one row per agent");
    }
    if (b.cols() < 2) throw DimensionError("model needs at least two options");
    if (!(d.array() > 0.0).all()) throw ParameterError("resistance d_i must be positive");
    if (!(u.array() >= 0.0).all()) throw ParameterError("attention u_i must be nonnegative");
    if (!d.allFinite() || !u.allFinite() || !alpha.allFinite() || !beta.allFinite() ||
        !Gamma.allFinite() || !Delta.allFinite() || !b_raw.allFinite()) {
        throw ParameterError("model parameters must be finite");
    }
    if (!(Gamma.diagonal().array() == 0.0).all() || !(Delta.diagonal().array() == 0.0).all()) {
        throw ParameterError("Gamma and Delta must have zero diagonals (use alpha and beta)");
    }
}

bool ModelParams::is_homogeneous_scalars() const {
    return constant(d) && constant(u) && constant(alpha) && constant(beta);
}

ModelParams ModelParams::make(Eigen::VectorXd d, Eigen::VectorXd u, Eigen::VectorXd alpha,
                              Eigen::VectorXd beta, Eigen::MatrixXd Gamma, Eigen::MatrixXd Delta,
                              Eigen::MatrixXd b_raw, SaturationSpec s1, SaturationSpec s2) {
    ModelParams p;
    p.d = std::move(d);
    p.u = std::move(u);
    p.alpha = std::move(alpha);
    p.beta = std::move(beta);
    p.Gamma = std::move(Gamma);
    p.Delta = std::move(Delta);
    p.b_raw = std::move(b_raw);
    p.b = project_rows(p.b_raw);
    p.s1 = std::move(s1);
    p.s2 = std::move(s2);
    p.validate();
    return p;
}

ModelParams ModelParams::homogeneous(const AdjacencySpec& a, int n_options,
                                     const HomogeneousGains& g, const Eigen::MatrixXd& b_raw,
                                     SaturationSpec s1, SaturationSpec s2) {
    if (!a.has_zero_diagonal()) throw ParameterError("homogeneous regime needs a_ii = 0");
    const int n = a.n_agents();
    Eigen::MatrixXd b = b_raw.size() == 0 ? Eigen::MatrixXd::Zero(n, n_options) : b_raw;
    if (b.cols() != n_options) throw DimensionError("input matrix has wrong number of options");
    auto p = make(Eigen::VectorXd::Constant(n, g.d), Eigen::VectorXd::Constant(n, g.u),
                  Eigen::VectorXd::Constant(n, g.alpha), Eigen::VectorXd::Constant(n, g.beta),
                  g.gamma * a.entries(), g.delta * a.entries(), std::move(b), std::move(s1),
                  std::move(s2));
    p.gains = g;
    p.graph = a;
    return p;
}

ModelParams ModelParams::with_u(const Eigen::VectorXd& u_new) const {
    ModelParams p = *this;
    p.u = u_new;
    if (p.gains) {
        if (constant(u_new) && u_new.size() > 0) {
            p.gains->u = u_new(0);
        } else {
            p.gains.reset();
        }
    }
    p.validate();
    return p;
}

ModelParams ModelParams::with_u(double u_new) const {
    return with_u(Eigen::VectorXd::Constant(n_agents(), u_new));
}

ModelParams ModelParams::with_inputs(const Eigen::MatrixXd& b_raw_new) const {
    ModelParams p = *this;
    p.b_raw = b_raw_new;
    p.b = project_rows(b_raw_new);
    p.validate();
    return p;
}

void vector_field_into(const Eigen::MatrixXd& z, const ModelParams& p, Eigen::MatrixXd& out,
                       const Eigen::VectorXd* u_override, const Eigen::MatrixXd* gamma_override,
                       const Eigen::MatrixXd* delta_override, const Eigen::MatrixXd* b_override) {
    const int n = p.n_agents();
    const int m = p.n_options();
    if (z.rows() != n || z.cols() != m) {
        std::ostringstream msg;
        msg << "state is " << z.rows() << "x" << z.cols() << ", model expects " << n << "x" << m;
        throw DimensionError(msg.str());
    }
    const Eigen::VectorXd& u = u_override ? *u_override : p.u;
    const Eigen::MatrixXd& G = gamma_override ? *gamma_override : p.Gamma;
    const Eigen::MatrixXd& D = delta_override ? *delta_override : p.Delta;
    const Eigen::MatrixXd& b = b_override ? *b_override : p.b;
    out.resize(n, m);

    // The k and l summation orders below are mirrored in vector_field_tensor.
    Eigen::MatrixXd s1v(n, m), s2v(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double y1 = 0.0, y2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double c1 = (k == i) ? p.alpha(i) : G(i, k);
                const double c2 = (k == i) ? p.beta(i) : D(i, k);
                y1 += c1 * z(k, j);
                y2 += c2 * z(k, j);
            }
            s1v(i, j) = p.s1(y1);
            s2v(i, j) = p.s2(y2);
        }
    }
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < m; ++j) {
            double social = 0.0;
            for (int l = 0; l < m; ++l) social += (l == j) ? s1v(i, j) : s2v(i, l);
            const double f = -p.d(i) * z(i, j) + u(i) * social + b(i, j);
            out(i, j) = f;
            row_sum += f;
        }
        const double mean = row_sum / m;
        for (int j = 0; j < m; ++j) out(i, j) -= mean;
    }
}

Eigen::MatrixXd vector_field(const Eigen::MatrixXd& z, const ModelParams& p) {
    Eigen::MatrixXd out;
    vector_field_into(z, p, out);
    return out;
}

Eigen::MatrixXd vector_field(const OpinionState& state, const ModelParams& p) {
    return vector_field(state.z(), p);
}

AdjacencyTensor::AdjacencyTensor(int n_agents, int n_options)
    : n_(n_agents), m_(n_options) {
    if (n_agents < 1 || n_options < 2) {
        throw DimensionError("tensor needs at least one agent and two options");
    }
    a_.assign(static_cast<std::size_t>(n_) * n_ * m_ * m_, 0.0);
}

AdjacencyTensor AdjacencyTensor::from_params(const ModelParams& p) {
    const int n = p.n_agents();
    const int m = p.n_options();
    AdjacencyTensor t(n, m);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < m; ++j) {
                for (int l = 0; l < m; ++l) {
                    if (l == j) {
                        t(i, k, j, l) = (k == i) ? p.alpha(i) : p.Gamma(i, k);
                    } else {
                        t(i, k, j, l) = (k == i) ? p.beta(i) : p.Delta(i, k);
                    }
                }
            }
        }
    }
    return t;
}

Eigen::MatrixXd vector_field_tensor(const OpinionState& state, const AdjacencyTensor& a,
                                    const Eigen::VectorXd& d, const Eigen::VectorXd& u,
                                    const Eigen::MatrixXd& b, const SaturationSpec& s1,
                                    const SaturationSpec& s2) {
    const Eigen::MatrixXd& z = state.z();
    const int n = a.n_agents();
    const int m = a.n_options();
    if (z.rows() != n || z.cols() != m || d.size() != n || u.size() != n || b.rows() != n ||
        b.cols() != m) {
        throw DimensionError("tensor field: state, tensor and parameter shapes disagree");
    }
    // The uniform part of b drops out with the row mean below, so b is used as given.
    Eigen::MatrixXd out(n, m);
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < m; ++j) {
            double social = 0.0;
            for (int l = 0; l < m; ++l) {
                double y = 0.0;
                for (int k = 0; k < n; ++k) y += a(i, k, j, l) * z(k, l);
                social += (l == j) ? s1(y) : s2(y);
            }
            const double f = -d(i) * z(i, j) + u(i) * social + b(i, j);
            out(i, j) = f;
            row_sum += f;
        }
        const double mean = row_sum / m;
        for (int j = 0; j < m; ++j) out(i, j) -= mean;
    }
    return out;
}

void TwoOptionParams::validate() const {
    const int n = static_cast<int>(d.size());
    if (n < 1) throw DimensionError("model needs at least one agent");
    require_size(u, n, "u");
    require_size(alpha, n, "alpha");
    require_size(beta, n, "beta");
    require_size(b, n, "b");
    require_square(Gamma, n, "Gamma");
    require_square(Delta, n, "Delta");
    if (!(d.array() > 0.0).all()) throw ParameterError("resistance d_i must be positive");
    if (!(u.array() >= 0.0).all()) throw ParameterError("attention u_i must be nonnegative");
}

TwoOptionParams TwoOptionParams::homogeneous(const AdjacencySpec& a, const HomogeneousGains& g,
                                             const Eigen::VectorXd& b) {
    const int n = a.n_agents();
    TwoOptionParams p;
    p.d = Eigen::VectorXd::Constant(n, g.d);
    p.u = Eigen::VectorXd::Constant(n, g.u);
    p.alpha = Eigen::VectorXd::Constant(n, g.alpha);
    p.beta = Eigen::VectorXd::Constant(n, g.beta);
    p.Gamma = g.gamma * a.entries();
    p.Delta = g.delta * a.entries();
    p.b = b.size() == 0 ? Eigen::VectorXd::Zero(n) : b;
    p.validate();
    return p;
}

ModelParams TwoOptionParams::to_general() const {
    validate();
    Eigen::MatrixXd braw(b.size(), 2);
    braw.col(0) = b;
    braw.col(1) = -b;
    return ModelParams::make(d, u, alpha, beta, Gamma, Delta, braw, s1, s2);
}

Eigen::VectorXd vector_field_two_option(const Eigen::VectorXd& x, const TwoOptionParams& p) {
    const Eigen::Index n = p.d.size();
    if (x.size() != n) throw DimensionError("two-option state has the wrong length");
    Eigen::VectorXd y1 = p.alpha.cwiseProduct(x) + p.Gamma * x;
    Eigen::VectorXd y2 = p.beta.cwiseProduct(x) + p.Delta * x;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = -p.d(i) * x(i) + p.u(i) * (p.s1.odd(y1(i)) - p.s2.odd(y2(i))) + p.b(i);
    }
    return out;
}

Eigen::VectorXd altafini_field(const Eigen::VectorXd& x, const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() != x.size()) {
        throw DimensionError("linear field: matrix and state sizes disagree");
    }
    const Eigen::VectorXd degree = a.cwiseAbs().rowwise().sum();
    return a * x - degree.cwiseProduct(x);
}

OriginJacobian jacobian_at_origin(const ModelParams& p) {
    if (!p.is_homogeneous_scalars()) {
        throw HypothesisError("origin Jacobian formula needs identical d, u, alpha, beta");
    }
    if (p.b.cwiseAbs().maxCoeff() != 0.0) {
        throw HypothesisError("origin Jacobian formula needs zero relative inputs");
    }
    const int n = p.n_agents();
    const int m = p.n_options();
    const double d = p.d(0), u = p.u(0), alpha = p.alpha(0), beta = p.beta(0);
    // S'(0) = 1 for every admissible saturation.
    Eigen::MatrixXd M = (-d + u * (alpha - beta)) * Eigen::MatrixXd::Identity(n, n) +
                        u * (p.Gamma - p.Delta);
    Eigen::MatrixXd P0 = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);

    OriginJacobian r;
    r.J.resize(n * m, n * m);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) r.J.block(i * m, k * m, m, m) = M(i, k) * P0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    r.spectrum_on_V = es.eigenvalues();
    r.max_real_on_V = r.spectrum_on_V.real().maxCoeff();
    return r;
}

double coupling_bound(const ModelParams& p) {
    const double k1 = std::max(p.s1.k1(), p.s1.k2());
    const double k2 = std::max(p.s2.k1(), p.s2.k2());
    const int m = p.n_options();
    double bound = 0.0;
    for (int i = 0; i < p.n_agents(); ++i) {
        const double bi = p.b.row(i).cwiseAbs().maxCoeff();
        bound = std::max(bound, p.u(i) * (k1 + (m - 1) * k2) + bi);
    }
    return bound;
}

double boundedness_radius(const ModelParams& p, double initial_norm) {
    const double r = p.n_agents() * p.n_options() * coupling_bound(p) / p.d.minCoeff();
    return std::max(initial_norm, r);
}

Eigen::MatrixXd simplex_map(const Eigen::MatrixXd& z, double r, double R) {
    if (!(r > 0.0) || !(R > 0.0)) throw ParameterError("simplex map needs r > 0 and R > 0");
    const double m = static_cast<double>(z.cols());
    return (r / (m * R)) * z.array() + r / m;
}

}  // namespace opinionlab
