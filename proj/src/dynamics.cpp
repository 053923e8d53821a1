#include "opinionlab/dynamics.hpp"

#include "opinionlab/analysis.hpp"
#include "opinionlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace opinionlab {

Eigen::MatrixXd System::attention_matrix() const {
    if (!attention) return {};
    if (attention->abar.size() > 0) {
        const int n = model.n_agents();
        if (attention->abar.rows() != n || attention->abar.cols() != n) {
            throw DimensionError("attention adjacency has the wrong size");
        }
        return attention->abar;
    }
    if (!model.graph) {
        throw ParameterError("attention adjacency must be given when the model has no graph");
    }
    return default_attention_adjacency(*model.graph);
}

InputSchedule InputSchedule::constant(const Eigen::MatrixXd& b_raw) {
    InputSchedule s;
    s.add(0.0, b_raw);
    return s;
}

InputSchedule& InputSchedule::add(double t_start, const Eigen::MatrixXd& b_raw, std::string tag) {
    if (!std::isfinite(t_start)) throw ParameterError("schedule start must be finite");
    if (!segments_.empty() && !(t_start > segments_.back().t_start)) {
        throw ParameterError("schedule segment starts must be strictly increasing");
    }
    if (!segments_.empty() && (b_raw.rows() != segments_.front().b_raw.rows() ||
                               b_raw.cols() != segments_.front().b_raw.cols())) {
        throw DimensionError("schedule segments must share one input shape");
    }
    if (!b_raw.allFinite()) throw ParameterError("schedule inputs must be finite");
    segments_.push_back({t_start, project_rows(b_raw), b_raw, std::move(tag)});
    return *this;
}

const InputSchedule::Segment* InputSchedule::active(double t) const {
    const Segment* hit = nullptr;
    for (const auto& s : segments_) {
        if (s.t_start <= t) hit = &s;
    }
    return hit;
}

Eigen::MatrixXd lift_two_option(const Eigen::VectorXd& b) {
    Eigen::MatrixXd m(b.size(), 2);
    m.col(0) = b;
    m.col(1) = -b;
    return m;
}

const SystemState& Trajectory::at(double t) const {
    if (states.empty()) throw ParameterError("empty trajectory");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return states.front();
    return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

SystemState initial_state(const System& sys, const Eigen::MatrixXd& z0) {
    SystemState s;
    s.z = project_rows(z0);
    const int n = sys.model.n_agents();
    if (sys.attention) s.u = Eigen::VectorXd::Constant(n, sys.attention->u_low);
    if (sys.coupling) {
        s.gamma = Eigen::VectorXd::Zero(n);
        s.delta = Eigen::VectorXd::Zero(n);
    }
    return s;
}

namespace {

void check_state(const System& sys, const SystemState& s) {
    const int n = sys.model.n_agents();
    if (s.z.rows() != n || s.z.cols() != sys.model.n_options()) {
        throw DimensionError("initial opinion state does not match the model");
    }
    if (sys.attention && s.u.size() != n) throw DimensionError("attention state has wrong size");
    if (sys.coupling && (s.gamma.size() != n || s.delta.size() != n)) {
        throw DimensionError("coupling-gain state has wrong size");
    }
}

bool finite(const SystemState& s) {
    return s.z.allFinite() && s.u.allFinite() && s.gamma.allFinite() && s.delta.allFinite();
}

// y = x + h k
void axpy(const SystemState& x, double h, const SystemState& k, SystemState& y) {
    y.z = x.z + h * k.z;
    if (x.u.size()) y.u = x.u + h * k.u;
    if (x.gamma.size()) {
        y.gamma = x.gamma + h * k.gamma;
        y.delta = x.delta + h * k.delta;
    }
}

double field_norm(const SystemState& f) {
    double m = f.z.size() ? f.z.cwiseAbs().maxCoeff() : 0.0;
    if (f.u.size()) m = std::max(m, f.u.cwiseAbs().maxCoeff());
    if (f.gamma.size()) {
        m = std::max(m, f.gamma.cwiseAbs().maxCoeff());
        m = std::max(m, f.delta.cwiseAbs().maxCoeff());
    }
    return m;
}

struct FieldContext {
    const System& sys;
    Eigen::MatrixXd abar;
    Eigen::MatrixXd weights;
};

void field_with(const FieldContext& ctx, const SystemState& s, const Eigen::MatrixXd& b,
                int sigma, SystemState& out) {
    const System& sys = ctx.sys;
    const Eigen::VectorXd& u = sys.attention ? s.u : sys.model.u;
    if (sys.coupling) {
        const Eigen::MatrixXd G = sys.model.Gamma + s.gamma.asDiagonal() * ctx.weights;
        const Eigen::MatrixXd D = sys.model.Delta + s.delta.asDiagonal() * ctx.weights;
        vector_field_into(s.z, sys.model, out.z, &u, &G, &D, &b);
    } else {
        vector_field_into(s.z, sys.model, out.z, &u, nullptr, nullptr, &b);
    }
    if (sys.attention) {
        out.u = attention_field(s.z, s.u, *sys.attention, ctx.abar);
    } else {
        out.u.resize(0);
    }
    if (sys.coupling) {
        const auto [x1, x2] = cluster_means(s.z, sys.coupling->partition);
        const int n = sys.model.n_agents();
        out.gamma.resize(n);
        out.delta.resize(n);
        for (int i = 0; i < n; ++i) {
            const auto r = coupling_field(s.gamma(i), s.delta(i), x1, x2, *sys.coupling, sigma);
            out.gamma(i) = r.dgamma;
            out.delta(i) = r.ddelta;
        }
    } else {
        out.gamma.resize(0);
        out.delta.resize(0);
    }
}

FieldContext make_context(const System& sys) {
    FieldContext ctx{sys, sys.attention_matrix(), {}};
    if (sys.attention) sys.attention->validate();
    if (sys.coupling) {
        sys.coupling->validate(sys.model.n_agents());
        ctx.weights = sys.coupling->weights(sys.model.n_agents());
    }
    return ctx;
}

}  // namespace

void system_field(const System& sys, const SystemState& s, const Eigen::MatrixXd& b, int sigma,
                  SystemState& out) {
    check_state(sys, s);
    field_with(make_context(sys), s, b, sigma, out);
}

Trajectory integrate(const System& sys, const SystemState& initial, const InputSchedule& schedule,
                     double t_end, const IntegrateOptions& opts) {
    if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw ParameterError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be >= 0");
    if (opts.record_stride < 1) throw ParameterError("record stride must be >= 1");
    check_state(sys, initial);
    if (!schedule.empty() && (schedule.segments().front().b.rows() != sys.model.n_agents() ||
                              schedule.segments().front().b.cols() != sys.model.n_options())) {
        throw DimensionError("schedule inputs do not match the model");
    }
    const FieldContext ctx = make_context(sys);

    Trajectory traj;
    std::vector<double> breaks;
    for (const auto& seg : schedule.segments()) {
        if (seg.t_start >= 0.0 && seg.t_start <= t_end) traj.events.push_back({seg.t_start, seg.tag});
        if (seg.t_start > 0.0 && seg.t_start < t_end) breaks.push_back(seg.t_start);
    }
    if (sys.coupling) {
        for (const auto& [t, sg] : sys.coupling->sigma_switches) {
            if (t >= 0.0 && t <= t_end) {
                traj.events.push_back({t, "sigma=" + std::to_string(sg)});
            }
            if (t > 0.0 && t < t_end) breaks.push_back(t);
        }
    }
    std::sort(traj.events.begin(), traj.events.end(),
              [](const TrajectoryEvent& a, const TrajectoryEvent& b) { return a.t < b.t; });
    breaks.push_back(t_end);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto inputs_at = [&](double t) -> const Eigen::MatrixXd& {
        const auto* seg = schedule.active(t);
        return seg ? seg->b : sys.model.b;
    };
    auto sigma_at = [&](double t) { return sys.coupling ? sys.coupling->sigma_at(t) : 1; };

    SystemState x = initial;
    x.z = project_rows(x.z);
    traj.times.push_back(0.0);
    traj.states.push_back(x);

    SystemState k1, k2, k3, k4, tmp;
    double t = 0.0;
    long step = 0;
    for (std::size_t seg = 0; seg < breaks.size(); ++seg) {
        const double t_a = t;
        const double t_b = breaks[seg];
        if (t_b <= t_a) continue;
        const long n_steps = std::max<long>(1, static_cast<long>(std::ceil((t_b - t_a) / opts.dt - 1e-9)));
        const double h = (t_b - t_a) / static_cast<double>(n_steps);
        const Eigen::MatrixXd& b = inputs_at(t_a);
        const int sigma = sigma_at(t_a);
        const bool last_segment = seg + 1 == breaks.size();
        for (long s = 0; s < n_steps; ++s) {
            field_with(ctx, x, b, sigma, k1);
            axpy(x, 0.5 * h, k1, tmp);
            field_with(ctx, tmp, b, sigma, k2);
            axpy(x, 0.5 * h, k2, tmp);
            field_with(ctx, tmp, b, sigma, k3);
            axpy(x, h, k3, tmp);
            field_with(ctx, tmp, b, sigma, k4);

            SystemState next;
            next.z = x.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
            next.z = project_rows(next.z);
            if (x.u.size()) next.u = x.u + (h / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
            if (x.gamma.size()) {
                next.gamma = x.gamma + (h / 6.0) * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma +
                                                    k4.gamma);
                next.delta = x.delta + (h / 6.0) * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta +
                                                    k4.delta);
            }
            if (!finite(next)) {
                std::ostringstream msg;
                msg << "non-finite state after t = " << t;
                throw NumericalError(msg.str(), t);
            }
            x = std::move(next);
            ++step;
            t = (s + 1 == n_steps) ? t_b : t_a + static_cast<double>(s + 1) * h;

            const bool boundary = s + 1 == n_steps;
            if (boundary || step % opts.record_stride == 0) {
                traj.times.push_back(t);
                traj.states.push_back(x);
            }
            if (opts.steady_tol > 0.0 && last_segment && !boundary && step % 10 == 0) {
                field_with(ctx, x, b, sigma, tmp);
                if (field_norm(tmp) < opts.steady_tol) {
                    if (traj.times.back() != t) {
                        traj.times.push_back(t);
                        traj.states.push_back(x);
                    }
                    traj.events.push_back({t, "steady"});
                    return traj;
                }
            }
        }
    }
    return traj;
}

Trajectory integrate(const ModelParams& p, const Eigen::MatrixXd& z0, double t_end,
                     const IntegrateOptions& opts) {
    System sys{p, std::nullopt, std::nullopt};
    return integrate(sys, initial_state(sys, z0), InputSchedule{}, t_end, opts);
}

Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& x,
                                           double h) {
    if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
    const Eigen::Index n = x.size();
    Eigen::MatrixXd J;
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index c = 0; c < n; ++c) {
        xp(c) = x(c) + h;
        xm(c) = x(c) - h;
        const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
        if (c == 0) J.resize(col.size(), n);
        J.col(c) = col;
        xp(c) = x(c);
        xm(c) = x(c);
    }
    return J;
}

ReducedCoordinates::ReducedCoordinates(const System& sys)
    : sys_(&sys),
      n_(sys.model.n_agents()),
      m_(sys.model.n_options()),
      has_u_(sys.attention.has_value()),
      has_gains_(sys.coupling.has_value()) {
    Eigen::MatrixXd P0 = Eigen::MatrixXd::Identity(m_, m_) -
                         Eigen::MatrixXd::Constant(m_, m_, 1.0 / m_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P0);
    // Eigenvalues ascending: one zero (the ones direction), then m - 1 ones.
    Q_ = es.eigenvectors().rightCols(m_ - 1);
    dim_ = n_ * (m_ - 1) + (has_u_ ? n_ : 0) + (has_gains_ ? 2 * n_ : 0);
}

Eigen::VectorXd ReducedCoordinates::to_reduced(const SystemState& s) const {
    Eigen::VectorXd y(dim_);
    const int r = m_ - 1;
    for (int i = 0; i < n_; ++i) y.segment(i * r, r) = Q_.transpose() * s.z.row(i).transpose();
    int off = n_ * r;
    if (has_u_) {
        y.segment(off, n_) = s.u;
        off += n_;
    }
    if (has_gains_) {
        y.segment(off, n_) = s.gamma;
        y.segment(off + n_, n_) = s.delta;
    }
    return y;
}

SystemState ReducedCoordinates::from_reduced(const Eigen::VectorXd& y) const {
    SystemState s;
    const int r = m_ - 1;
    s.z.resize(n_, m_);
    for (int i = 0; i < n_; ++i) s.z.row(i) = (Q_ * y.segment(i * r, r)).transpose();
    int off = n_ * r;
    if (has_u_) {
        s.u = y.segment(off, n_);
        off += n_;
    }
    if (has_gains_) {
        s.gamma = y.segment(off, n_);
        s.delta = y.segment(off + n_, n_);
    }
    return s;
}

Eigen::VectorXd ReducedCoordinates::field(const Eigen::VectorXd& y) const {
    SystemState f;
    const int sigma = sys_->coupling ? sys_->coupling->sigma : 1;
    system_field(*sys_, from_reduced(y), sys_->model.b, sigma, f);
    return to_reduced(f);
}

bool is_stable_spectrum(const Eigen::VectorXcd& spectrum) {
    return spectrum.size() == 0 || spectrum.real().maxCoeff() < -1e-7;
}

namespace {

StateTag tag_of(const Eigen::MatrixXd& z) {
    const auto c = classify_state(z, 1.0);
    if (c.neutral) return StateTag::neutral;
    return c.agreement ? StateTag::agreement : StateTag::disagreement;
}

struct NewtonResult {
    Eigen::VectorXd y;
    double residual;
    bool converged;
};

NewtonResult newton(const ReducedCoordinates& rc, Eigen::VectorXd y, double tol, int max_iter) {
    Eigen::VectorXd f = rc.field(y);
    double res = f.norm();
    for (int it = 0; it < max_iter && res >= tol; ++it) {
        const Eigen::MatrixXd J = finite_difference_jacobian(
            [&](const Eigen::VectorXd& v) { return rc.field(v); }, y, 1e-7);
        const Eigen::VectorXd dy = J.colPivHouseholderQr().solve(-f);
        if (!dy.allFinite()) break;
        double lambda = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k) {
            const Eigen::VectorXd y_try = y + lambda * dy;
            const Eigen::VectorXd f_try = rc.field(y_try);
            const double r_try = f_try.norm();
            if (std::isfinite(r_try) && r_try < (1.0 - 1e-4 * lambda) * res) {
                y = y_try;
                f = f_try;
                res = r_try;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    return {y, res, res < tol};
}

}  // namespace

EquilibriumReport find_equilibrium(const System& sys, const SystemState& guess,
                                   const EquilibriumOptions& opts) {
    if (!(opts.tol > 0.0)) throw ParameterError("equilibrium tolerance must be positive");
    check_state(sys, guess);
    const ReducedCoordinates rc(sys);
    SystemState g = guess;
    g.z = project_rows(g.z);
    NewtonResult nr = newton(rc, rc.to_reduced(g), opts.tol, opts.max_newton);
    if (!nr.converged && opts.fallback_time > 0.0) {
        IntegrateOptions io;
        io.dt = opts.dt;
        io.record_stride = 1 << 30;
        io.steady_tol = opts.tol;
        try {
            const Trajectory tr =
                integrate(sys, rc.from_reduced(nr.y), InputSchedule{}, opts.fallback_time, io);
            NewtonResult again = newton(rc, rc.to_reduced(tr.final_state()), opts.tol,
                                        opts.max_newton);
            if (again.residual < nr.residual) nr = again;
        } catch (const NumericalError&) {
            // keep the best Newton iterate
        }
    }
    EquilibriumReport rep;
    rep.state = rc.from_reduced(nr.y);
    rep.residual = nr.residual;
    rep.converged = nr.converged;
    const Eigen::MatrixXd J = finite_difference_jacobian(
        [&](const Eigen::VectorXd& v) { return rc.field(v); }, nr.y, 1e-6);
    rep.spectrum = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues();
    rep.stable = is_stable_spectrum(rep.spectrum);
    rep.tag = tag_of(rep.state.z);
    return rep;
}

std::vector<BranchPoint> sweep_bifurcation(const System& sys, const std::vector<double>& u_grid,
                                           const std::vector<Eigen::MatrixXd>& seeds,
                                           const SweepOptions& opts) {
    if (!std::is_sorted(u_grid.begin(), u_grid.end())) {
        throw ParameterError("sweep grid must be sorted");
    }
    if (sys.attention) throw ParameterError("attention sweeps vary u dynamically; disable attention");
    std::vector<std::vector<BranchPoint>> per_u(u_grid.size());
    parallel_for(static_cast<int>(u_grid.size()), [&](int gi) {
        System s = sys;
        s.model = sys.model.with_u(u_grid[gi]);
        std::vector<BranchPoint> found;
        for (const auto& seed : seeds) {
            SystemState guess = initial_state(s, seed);
            if (opts.presettle_time > 0.0) {
                IntegrateOptions io;
                io.dt = opts.equilibrium.dt;
                io.record_stride = 1 << 30;
                guess = integrate(s, guess, InputSchedule{}, opts.presettle_time, io).final_state();
            }
            const EquilibriumReport rep = find_equilibrium(s, guess, opts.equilibrium);
            if (!rep.converged) continue;
            const bool duplicate = std::any_of(found.begin(), found.end(), [&](const BranchPoint& b) {
                return (b.state.z - rep.state.z).cwiseAbs().maxCoeff() < opts.dedup_distance;
            });
            if (duplicate) continue;
            BranchPoint bp;
            bp.u = u_grid[gi];
            bp.state = rep.state;
            bp.stable = rep.stable;
            bp.residual = rep.residual;
            if (opts.w.size() == rep.state.z.rows()) bp.projection = rep.state.z.col(0).dot(opts.w);
            found.push_back(std::move(bp));
        }
        per_u[gi] = std::move(found);
    });
    std::vector<BranchPoint> out;
    for (auto& v : per_u) {
        for (auto& b : v) out.push_back(std::move(b));
    }
    return out;
}

double distance_to_cluster_manifold(const Eigen::MatrixXd& z, const Partition& partition) {
    validate_partition(partition, static_cast<int>(z.rows()));
    double v = 0.0;
    for (const auto& cell : partition) {
        for (int i : cell) {
            for (int k : cell) v += 0.5 * (z.row(i) - z.row(k)).squaredNorm();
        }
    }
    return std::sqrt(v);
}

int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("OPINIONLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

void parallel_for(int n, const std::function<void(int)>& body) {
    if (n <= 0) return;
    const int workers = std::min(worker_count(), n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace opinionlab
