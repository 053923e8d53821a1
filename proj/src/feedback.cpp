#include "opinionlab/feedback.hpp"

#include "opinionlab/analysis.hpp"
#include "opinionlab/dynamics.hpp"
#include "opinionlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace opinionlab {

void AttentionParams::validate() const {
    if (!(tau_u > 0.0) || !std::isfinite(tau_u)) throw ParameterError("tau_u must be positive");
    if (!(n_hill > 0.0) || !std::isfinite(n_hill)) throw ParameterError("Hill exponent must be positive");
    if (!(y_th > 0.0) || !std::isfinite(y_th)) throw ParameterError("y_th must be positive");
    if (!(u_low >= 0.0) || !(u_high > u_low) || !std::isfinite(u_high)) {
        throw ParameterError("attention bounds need u_high > u_low >= 0");
    }
    if (abar.size() > 0 && (abar.rows() != abar.cols() || !abar.allFinite())) {
        throw ParameterError("attention adjacency must be a finite square matrix");
    }
}

double hill_eval(const AttentionParams& ap, double y) {
    if (y < 0.0) throw ParameterError("Hill saturation is defined for y >= 0 only");
    const double yn = std::pow(y, ap.n_hill);
    const double tn = std::pow(ap.y_th, ap.n_hill);
    return ap.u_low + (ap.u_high - ap.u_low) * yn / (tn + yn);
}

Eigen::VectorXd attention_drive(const Eigen::MatrixXd& z, const Eigen::MatrixXd& abar) {
    if (abar.rows() != z.rows() || abar.cols() != z.rows()) {
        throw DimensionError("attention adjacency does not match the number of agents");
    }
    const Eigen::VectorXd row_sq = z.rowwise().squaredNorm();
    return (abar.cwiseProduct(abar) * row_sq) / static_cast<double>(z.cols());
}

Eigen::VectorXd attention_field(const Eigen::MatrixXd& z, const Eigen::VectorXd& u,
                                const AttentionParams& ap, const Eigen::MatrixXd& abar) {
    if (u.size() != z.rows()) throw DimensionError("attention vector has the wrong length");
    const Eigen::VectorXd y = attention_drive(z, abar);
    Eigen::VectorXd du(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) du(i) = (-u(i) + hill_eval(ap, y(i))) / ap.tau_u;
    return du;
}

Eigen::MatrixXd default_attention_adjacency(const AdjacencySpec& a) {
    return a.entries() + Eigen::MatrixXd::Identity(a.n_agents(), a.n_agents());
}

void CouplingFeedbackParams::validate(int n_agents) const {
    if (sigma != 1 && sigma != -1) throw ParameterError("sigma must be +1 or -1");
    for (double v : {tau_gamma, tau_delta, gamma_f, delta_f, g_gamma, g_delta}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ParameterError("coupling feedback time scales and gains must be positive");
        }
    }
    if (partition.size() != 2) throw ParameterError("coupling feedback needs exactly two clusters");
    validate_partition(partition, n_agents);
    for (std::size_t i = 0; i < sigma_switches.size(); ++i) {
        if (sigma_switches[i].second != 1 && sigma_switches[i].second != -1) {
            throw ParameterError("sigma switches must set +1 or -1");
        }
        if (i > 0 && !(sigma_switches[i].first > sigma_switches[i - 1].first)) {
            throw ParameterError("sigma switch times must be strictly increasing");
        }
    }
    if (inter_weights.size() > 0 &&
        (inter_weights.rows() != n_agents || inter_weights.cols() != n_agents)) {
        throw DimensionError("inter-cluster weight matrix has the wrong size");
    }
}

int CouplingFeedbackParams::sigma_at(double t) const {
    int s = sigma;
    for (const auto& [ts, v] : sigma_switches) {
        if (ts <= t) s = v;
    }
    return s;
}

Eigen::MatrixXd CouplingFeedbackParams::weights(int n_agents) const {
    if (inter_weights.size() > 0) return inter_weights;
    const auto cell_of = cell_index(partition, n_agents);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_agents, n_agents);
    for (int i = 0; i < n_agents; ++i) {
        for (int k = 0; k < n_agents; ++k) {
            if (cell_of[i] != cell_of[k]) w(i, k) = 1.0 / static_cast<double>(partition[cell_of[k]].size());
        }
    }
    return w;
}

CouplingRates coupling_field(double gamma_i, double delta_i, double xhat1, double xhat2,
                             const CouplingFeedbackParams& cp, int sigma) {
    const double prod = xhat1 * xhat2;
    return {(-gamma_i + sigma * cp.gamma_f * std::tanh(cp.g_gamma * prod)) / cp.tau_gamma,
            (-delta_i - sigma * cp.delta_f * std::tanh(cp.g_delta * prod)) / cp.tau_delta};
}

std::pair<double, double> cluster_means(const Eigen::MatrixXd& z, const Partition& partition) {
    if (partition.size() != 2) throw ParameterError("cluster means need exactly two clusters");
    double m[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        for (int i : partition[c]) m[c] += z(i, 0);
        m[c] /= static_cast<double>(partition[c].size());
    }
    return {m[0], m[1]};
}

double effective_strong_threshold(const CascadeOptions& opts, const AttentionParams& ap) {
    return opts.strong_threshold > 0.0 ? opts.strong_threshold : std::sqrt(ap.y_th);
}

bool is_cascade(const Eigen::MatrixXd& z, double strong_threshold) {
    const Eigen::Index n = z.rows();
    Eigen::Index strong = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(z(i, 0)) >= strong_threshold) ++strong;
    }
    return strong >= (n + 1) / 2;
}

namespace {

// Opinion + attention integration in the scalar two-option coordinates, which
// the general model reduces to exactly; used for the many short Monte-Carlo runs.
CascadeOutcome run_two_option(const ModelParams& p, const AttentionParams& ap,
                              const Eigen::MatrixXd& abar, const Eigen::VectorXd& b,
                              const CascadeOptions& opts, double threshold) {
    const int n = p.n_agents();
    // Row-major dense copies so the inner loops run on plain arrays.
    std::vector<double> c1(static_cast<std::size_t>(n) * n), c2(c1.size()), a2(c1.size());
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const std::size_t ik = static_cast<std::size_t>(i) * n + k;
            c1[ik] = i == k ? p.alpha(i) : p.Gamma(i, k);
            c2[ik] = i == k ? p.beta(i) : p.Delta(i, k);
            a2[ik] = abar(i, k) * abar(i, k);
        }
    }
    const bool odd1 = p.s1.family() == SaturationFamily::odd_tanh;
    const bool odd2 = p.s2.family() == SaturationFamily::odd_tanh;
    const bool integer_hill = ap.n_hill == std::round(ap.n_hill) && ap.n_hill <= 8.0;
    const int hill_int = static_cast<int>(ap.n_hill);
    auto power = [&](double y) {
        if (!integer_hill) return std::pow(y, ap.n_hill);
        double r = 1.0;
        for (int k = 0; k < hill_int; ++k) r *= y;
        return r;
    };
    const double thn = power(ap.y_th);
    const double span = ap.u_high - ap.u_low;

    // State layout: x_0..x_{n-1}, u_0..u_{n-1}.
    using Vec = std::vector<double>;
    auto field = [&](const Vec& s, Vec& ds) {
        for (int i = 0; i < n; ++i) {
            const double* r1 = &c1[static_cast<std::size_t>(i) * n];
            const double* r2 = &c2[static_cast<std::size_t>(i) * n];
            const double* ra = &a2[static_cast<std::size_t>(i) * n];
            double y1 = 0.0, y2 = 0.0, drive = 0.0;
            for (int k = 0; k < n; ++k) {
                y1 += r1[k] * s[k];
                y2 += r2[k] * s[k];
                drive += ra[k] * s[k] * s[k];
            }
            // The odd part vanishes exactly at zero; skip the call (beta = Delta = 0 is common).
            const double s1 = y1 == 0.0 ? 0.0 : (odd1 ? p.s1(y1) : p.s1.odd(y1));
            const double s2 = y2 == 0.0 ? 0.0 : (odd2 ? p.s2(y2) : p.s2.odd(y2));
            ds[i] = -p.d(i) * s[i] + s[n + i] * (s1 - s2) + b(i);
            const double yn = power(drive);
            ds[n + i] = (-s[n + i] + ap.u_low + span * yn / (thn + yn)) / ap.tau_u;
        }
    };
    auto cascade_now = [&](const Vec& s) {
        int strong = 0;
        for (int i = 0; i < n; ++i) strong += std::abs(s[i]) >= threshold;
        return strong >= (n + 1) / 2;
    };

    const std::size_t dim = 2 * static_cast<std::size_t>(n);
    Vec s(dim, 0.0), tmp(dim), k1(dim), k2(dim), k3(dim), k4(dim);
    for (int i = 0; i < n; ++i) s[n + i] = opts.u0 < 0.0 ? ap.u_low : opts.u0;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(opts.t_end / opts.dt - 1e-9)));
    const double h = opts.t_end / static_cast<double>(steps);
    double t = 0.0;
    double held_since = -1.0;
    for (long st = 0; st < steps; ++st) {
        field(s, k1);
        for (std::size_t q = 0; q < dim; ++q) tmp[q] = s[q] + 0.5 * h * k1[q];
        field(tmp, k2);
        for (std::size_t q = 0; q < dim; ++q) tmp[q] = s[q] + 0.5 * h * k2[q];
        field(tmp, k3);
        for (std::size_t q = 0; q < dim; ++q) tmp[q] = s[q] + h * k3[q];
        field(tmp, k4);
        bool finite = true;
        for (std::size_t q = 0; q < dim; ++q) {
            s[q] += (h / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            finite = finite && std::isfinite(s[q]);
        }
        t = (st + 1 == steps) ? opts.t_end : static_cast<double>(st + 1) * h;
        if (!finite) throw NumericalError("non-finite state in cascade trial", t - h);
        if (opts.cascade_hold > 0.0) {
            const bool now = cascade_now(s);
            if (now && held_since < 0.0) held_since = t;
            if (!now) held_since = -1.0;
            if (now && t - held_since >= opts.cascade_hold) break;
        }
        if (opts.steady_tol > 0.0 && st % 10 == 9) {
            double m = 0.0;
            for (double v : k4) m = std::max(m, std::abs(v));
            if (m < opts.steady_tol) break;
        }
    }
    Eigen::VectorXd x(n), u(n);
    for (int i = 0; i < n; ++i) {
        x(i) = s[i];
        u(i) = s[n + i];
    }
    CascadeOutcome out;
    out.z_final = lift_two_option(x);
    out.u_final = u;
    out.t_final = t;
    out.cascade = is_cascade(out.z_final, threshold);
    return out;
}

Eigen::MatrixXd resolved_abar(const ModelParams& p, const AttentionParams& ap) {
    System sys{p, ap, std::nullopt};
    return sys.attention_matrix();
}

}  // namespace

CascadeOutcome run_cascade_trial(const ModelParams& p, const AttentionParams& ap,
                                 const Eigen::VectorXd& b, const CascadeOptions& opts) {
    ap.validate();
    if (b.size() != p.n_agents()) throw DimensionError("cascade input has the wrong length");
    if (!(opts.dt > 0.0) || !(opts.t_end > 0.0)) throw ParameterError("cascade run needs dt, t_end > 0");
    const double threshold = effective_strong_threshold(opts, ap);
    const Eigen::MatrixXd abar = resolved_abar(p, ap);
    if (p.n_options() == 2) return run_two_option(p, ap, abar, b, opts, threshold);

    // General option count: drive the first option against the rest equally.
    Eigen::MatrixXd braw = Eigen::MatrixXd::Zero(p.n_agents(), p.n_options());
    braw.col(0) = b;
    System sys{p.with_inputs(braw), ap, std::nullopt};
    IntegrateOptions io;
    io.dt = opts.dt;
    io.record_stride = 1 << 30;
    io.steady_tol = opts.steady_tol;
    SystemState s0 = initial_state(sys, Eigen::MatrixXd::Zero(p.n_agents(), p.n_options()));
    if (opts.u0 >= 0.0) s0.u.setConstant(opts.u0);
    const Trajectory tr = integrate(sys, s0, InputSchedule{}, opts.t_end, io);
    CascadeOutcome out;
    out.z_final = tr.final_state().z;
    out.u_final = tr.final_state().u;
    out.t_final = tr.times.back();
    out.cascade = is_cascade(out.z_final, threshold);
    return out;
}

namespace {

Eigen::VectorXd cascade_centrality(const ModelParams& p) {
    if (!p.graph || !p.gains) {
        throw HypothesisError("cascade threshold needs a homogeneous parameter set with a graph");
    }
    const AdjacencySpec& a = *p.graph;
    if (!a.is_symmetric() || !is_strongly_connected(a)) {
        throw HypothesisError("cascade threshold needs a symmetric irreducible adjacency matrix");
    }
    const SpectralSummary s = spectral_extrema(a);
    const double coupling = p.gains->gamma - p.gains->delta;
    if (coupling > 0.0) return s.w_max;
    if (coupling < 0.0) return s.w_min;
    return {};
}

}  // namespace

CascadeThreshold estimate_cascade_threshold(const ModelParams& p, const AttentionParams& ap,
                                            const Eigen::VectorXd& direction, double m_lo,
                                            double m_hi, double resolution,
                                            const CascadeOptions& opts) {
    const Eigen::VectorXd w = cascade_centrality(p);
    if (direction.size() != p.n_agents() || !(direction.norm() > 0.0)) {
        throw DimensionError("cascade direction must be a nonzero vector with one entry per agent");
    }
    if (!(m_hi > m_lo) || !(m_lo >= 0.0) || !(resolution > 0.0)) {
        throw ParameterError("cascade bracket needs 0 <= lo < hi and resolution > 0");
    }
    const Eigen::VectorXd dir = direction.normalized();
    CascadeThreshold r;
    auto cascades = [&](double m) {
        ++r.trials;
        return run_cascade_trial(p, ap, m * dir, opts).cascade;
    };
    const bool c_lo = cascades(m_lo);
    const bool c_hi = cascades(m_hi);
    if (c_lo || !c_hi) {
        std::ostringstream msg;
        msg << "bracket [" << m_lo << ", " << m_hi << "] does not straddle the cascade threshold "
            << "(cascade at lo: " << (c_lo ? "yes" : "no") << ", at hi: " << (c_hi ? "yes" : "no")
            << ")";
        throw HypothesisError(msg.str());
    }
    double lo = m_lo, hi = m_hi;
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (cascades(mid) ? hi : lo) = mid;
    }
    r.lo = lo;
    r.hi = hi;
    r.magnitude = 0.5 * (lo + hi);
    r.p = w.size() ? std::abs(w.dot(dir)) * r.magnitude : r.magnitude;
    return r;
}

std::vector<CascadeCell> cascade_study(const ModelParams& p, const AttentionParams& ap,
                                       const Eigen::VectorXd& w_c,
                                       const CascadeStudyOptions& opts) {
    if (opts.trials < 1 || opts.magnitude_bins < 1 || opts.alignment_bins < 1) {
        throw ParameterError("cascade study needs at least one trial and one bin per axis");
    }
    if (w_c.size() != p.n_agents() || !(w_c.norm() > 0.0)) {
        throw DimensionError("centrality vector must have one entry per agent");
    }
    if (p.n_agents() < 2) throw ParameterError("cascade study needs at least two agents");
    const Eigen::VectorXd w = w_c.normalized();
    const int cells = opts.magnitude_bins * opts.alignment_bins;
    std::vector<CascadeCell> out(cells);
    for (int mi = 0; mi < opts.magnitude_bins; ++mi) {
        for (int ai = 0; ai < opts.alignment_bins; ++ai) {
            auto& c = out[mi * opts.alignment_bins + ai];
            c.magnitude_bin = mi;
            c.alignment_bin = ai;
            c.magnitude_lo = opts.max_magnitude * mi / opts.magnitude_bins;
            c.magnitude_hi = opts.max_magnitude * (mi + 1) / opts.magnitude_bins;
            c.alignment_lo = static_cast<double>(ai) / opts.alignment_bins;
            c.alignment_hi = static_cast<double>(ai + 1) / opts.alignment_bins;
            c.trials = opts.trials;
        }
    }
    std::vector<char> hit(static_cast<std::size_t>(cells) * opts.trials, 0);
    parallel_for(cells * opts.trials, [&](int job) {
        const int cell = job / opts.trials;
        const int trial = job % opts.trials;
        const auto& c = out[cell];
        std::seed_seq seq{static_cast<std::uint64_t>(opts.seed), static_cast<std::uint64_t>(cell),
                          static_cast<std::uint64_t>(trial)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double m = c.magnitude_lo + (c.magnitude_hi - c.magnitude_lo) * unit(rng);
        const double a = c.alignment_lo + (c.alignment_hi - c.alignment_lo) * unit(rng);
        Eigen::VectorXd q(w.size());
        double qn = 0.0;
        while (qn < 1e-8) {
            for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = normal(rng);
            q -= q.dot(w) * w;
            qn = q.norm();
        }
        q /= qn;
        const Eigen::VectorXd b = m * (a * opts.orientation * w + std::sqrt(std::max(0.0, 1.0 - a * a)) * q);
        hit[job] = run_cascade_trial(p, ap, b, opts.cascade).cascade ? 1 : 0;
    });
    for (int cell = 0; cell < cells; ++cell) {
        for (int trial = 0; trial < opts.trials; ++trial) {
            out[cell].cascades += hit[static_cast<std::size_t>(cell) * opts.trials + trial];
        }
    }
    return out;
}

}  // namespace opinionlab
