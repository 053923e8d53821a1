#include "opinionlab/recipes.hpp"

#include "opinionlab/analysis.hpp"
#include "opinionlab/error.hpp"
#include "opinionlab/feedback.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace opinionlab {

using nlohmann::json;

bool FigureReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* FigureReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i));
    return s + ")";
}

void check(FigureReport& r, std::string name, bool passed, std::string detail) {
    r.checks.push_back(Check{std::move(name), passed, std::move(detail)});
}

double step(const RecipeOptions& o, double fallback) { return o.dt > 0.0 ? o.dt : fallback; }

int sign_of(double v, double tol = 0.0) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

/// Signs of x equal +sign(v) or -sign(v) on every entry where v is
/// significant, with x nonzero there.
bool pattern_matches(const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    for (int orient : {1, -1}) {
        bool ok = true;
        for (Eigen::Index i = 0; i < v.size() && ok; ++i) {
            if (std::abs(v(i)) < 1e-9) continue;
            ok = sign_of(x(i), 1e-9) == orient * sign_of(v(i));
        }
        if (ok) return true;
    }
    return false;
}

Trajectory simulate(const ScenarioConfig& cfg) {
    return integrate(cfg.system(), cfg.initial, cfg.schedule, cfg.t_end, cfg.integration);
}

Eigen::VectorXd first_option(const Eigen::MatrixXd& z) { return z.col(0); }

/// Explicit RK4 path of x' = f(x), one snapshot per step.
std::vector<Eigen::VectorXd> rk4_path(const VectorFunction& f, const Eigen::VectorXd& x0,
                                      double t_end, double dt) {
    const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / static_cast<double>(steps);
    std::vector<Eigen::VectorXd> out{x0};
    Eigen::VectorXd x = x0;
    for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXd k1 = f(x);
        const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(x);
    }
    return out;
}

void add_invariants(FigureReport& r, const std::string& label, const ScenarioConfig& cfg,
                    const Trajectory& traj) {
    const InvariantReport inv = check_invariants(cfg, traj);
    check(r, "invariants: " + label, inv.ok(),
          "row-sum drift " + fmt(inv.row_sum_drift) + ", max |z| " + fmt(inv.max_abs) + " <= bound " +
              fmt(inv.bound));
}

void add_run(FigureReport& r, const std::string& label, const ScenarioConfig& cfg,
             const json& doc, const Trajectory& traj, bool with_table = true) {
    r.configs.emplace_back(label, doc);
    if (with_table) {
        Table t = trajectory_table(traj);
        t.name = label;
        r.tables.push_back(std::move(t));
    }
    r.plots.emplace_back(label + ".svg", svg_opinions(r.id + " " + label, traj));
    add_invariants(r, label, cfg, traj);
}

Table vectors_table(const std::string& name, const std::vector<double>& t,
                    const std::vector<Eigen::VectorXd>& xs, const std::string& prefix) {
    Table tab;
    tab.name = name;
    tab.header.push_back("t");
    for (Eigen::Index i = 0; i < xs.front().size(); ++i) tab.header.push_back(prefix + std::to_string(i));
    for (std::size_t k = 0; k < xs.size(); ++k) {
        std::vector<double> row{t[k]};
        for (Eigen::Index i = 0; i < xs[k].size(); ++i) row.push_back(xs[k](i));
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

Series series_of(const std::string& label, const std::vector<double>& x, const std::vector<double>& y,
                 bool scatter = false) {
    Series s;
    s.label = label;
    s.x = x;
    s.y = y;
    s.scatter = scatter;
    return s;
}

// ---------------------------------------------------------------------------
// Linear versus saturated coupling on two three-agent signed graphs.

FigureReport fig2(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig2";
    const double dt = step(o, 0.01);
    struct Panel {
        const char* name;
        Eigen::Matrix3d a;
        Eigen::Vector3d pattern;
    };
    Eigen::Matrix3d top, bottom;
    top << 0, -1, -1, -1, 0, 1, -1, 1, 0;
    bottom << 0, -1, 0, -1, 0, 0, 1, -1, 0;
    const std::vector<Panel> panels{{"balanced", top, Eigen::Vector3d(1, -1, -1)},
                                    {"quasi_strongly_connected", bottom, Eigen::Vector3d(1, -1, 1)}};
    const Eigen::Vector3d x0(0.1, -0.09, -0.1);
    for (const auto& panel : panels) {
        const Eigen::MatrixXd a = panel.a;
        const Eigen::VectorXd d = a.cwiseAbs().rowwise().sum();
        const json doc = {{"name", std::string("fig2_") + panel.name},
                          {"graph", {{"matrix", matrix_to_json(a)}}},
                          {"model", {{"d", vector_to_json(d)}, {"u", 1.01}, {"alpha", 0.0}, {"Gamma", matrix_to_json(a)}}},
                          {"initial", {{"z", vector_to_json(x0)}}},
                          {"integration", {{"t_end", 5.0}, {"dt", dt}}}};
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        const Trajectory nl = simulate(cfg);
        const auto lin = rk4_path([&](const Eigen::VectorXd& x) { return altafini_field(x, a); }, x0, 5.0, dt);
        double gap = 0.0;
        const std::size_t count = std::min(lin.size(), nl.states.size());
        for (std::size_t k = 0; k < count; ++k) {
            gap = std::max(gap, (first_option(nl.states[k].z) - lin[k]).cwiseAbs().maxCoeff());
        }
        check(r, std::string(panel.name) + ": linear and saturated runs agree on [0, 5]",
              gap <= 0.05 && count == lin.size(), "max-norm gap " + fmt(gap) + " (limit 0.05)");

        // The linear model's long-run limit shows the sign structure of the graph.
        const auto far = rk4_path([&](const Eigen::VectorXd& x) { return altafini_field(x, a); }, x0, 50.0, dt);
        const Eigen::VectorXd xf = far.back();
        const bool polarised = pattern_matches(xf, panel.pattern) &&
                               xf.cwiseAbs().maxCoeff() - xf.cwiseAbs().minCoeff() < 1e-6;
        check(r, std::string(panel.name) + ": linear limit is polarised with pattern " + fmt_vec(panel.pattern),
              polarised, "x(50) = " + fmt_vec(xf));

        add_run(r, std::string("nonlinear_") + panel.name, cfg, doc, nl);
        std::vector<double> t(lin.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = 5.0 * static_cast<double>(k) / (t.size() - 1);
        r.tables.push_back(vectors_table(std::string("linear_") + panel.name, t, lin, "x_"));
        std::vector<Series> ss;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> y;
            for (const auto& x : lin) y.push_back(x(i));
            ss.push_back(series_of("agent " + std::to_string(i + 1), t, y));
        }
        r.plots.emplace_back(std::string("linear_") + panel.name + ".svg",
                             svg_chart(std::string("fig2 linear ") + panel.name, "t", "x_i", ss));
        r.summary[panel.name] = {{"max_gap", gap}, {"linear_limit", vector_to_json(xf)}};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Two antagonistic clusters: linear decay versus clustered dissensus, plus the
// one-agent-per-cluster reduction.

const Partition kFig3Clusters{{0, 1}, {2, 3, 4}};

json fig3_doc(double dt) {
    const AdjacencySpec a = block_graph(kFig3Clusters, -1.0, -2.0);
    return {{"name", "fig3_nonlinear"},
            {"graph", {{"matrix", matrix_to_json(a.entries())}}},
            {"model", {{"d", 1.0}, {"u", 0.5}, {"alpha", 0.0}, {"gamma", 1.0}}},
            {"initial", {{"z", {0.9, -0.4, 0.4, 0.1, -0.8}}}},
            {"integration", {{"t_end", 200.0}, {"dt", dt}}},
            {"analysis", {{"clusters", {{0, 1}, {2, 3, 4}}}}}};
}

FigureReport fig3(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig3";
    const double dt = step(o, 0.01);
    const json doc = fig3_doc(dt);
    const ScenarioConfig cfg = parse_scenario(doc, o.seed);
    const Eigen::MatrixXd a = cfg.graph.entries();
    const Eigen::VectorXd x0 = first_option(cfg.initial.z);

    const auto lin = rk4_path([&](const Eigen::VectorXd& x) { return altafini_field(x, a); }, x0, 200.0, dt);
    const double lin_final = lin.back().cwiseAbs().maxCoeff();
    check(r, "linear run decays to neutral", lin_final < 1e-2, "max |x_i(200)| = " + fmt(lin_final));

    const Trajectory nl = simulate(cfg);
    const Eigen::MatrixXd zf = nl.final_state().z;
    const Eigen::VectorXd xf = first_option(zf);
    double spread = 0.0;
    for (const auto& cell : kFig3Clusters) {
        for (int i : cell) spread = std::max(spread, std::abs(xf(i) - xf(cell.front())));
    }
    const bool opposite = sign_of(xf(0)) * sign_of(xf(2)) == -1;
    check(r, "saturated run reaches clustered dissensus", spread < 1e-6 && opposite,
          "within-cluster spread " + fmt(spread) + ", x(200) = " + fmt_vec(xf));
    const std::string label = describe_state(zf, cfg.resolved_strong_threshold());
    check(r, "summary label is clustered dissensus", label == "clustered dissensus", label);

    // Cluster manifold and reduction.
    const ClusterCondition cc = check_cluster_condition(cfg.model, kFig3Clusters);
    check(r, "cluster condition holds", cc.all(), "worst margin " + fmt(cc.worst_margin));
    std::vector<double> dist;
    for (const auto& s : nl.states) dist.push_back(distance_to_cluster_manifold(s.z, kFig3Clusters));
    check(r, "distance to the cluster manifold decays below 1e-8", dist.back() < 1e-8,
          "final distance " + fmt(dist.back()));

    // Start the reduced model once the full run is on the manifold to 1e-9
    // and compare cluster means from there on.
    std::size_t k0 = 0;
    while (k0 + 1 < dist.size() && dist[k0] >= 1e-9) ++k0;
    const ModelParams reduced = reduce_clusters(cfg.model, kFig3Clusters);
    const double t0 = nl.times[k0];
    const long steps_left = static_cast<long>(nl.times.size() - 1 - k0);
    double worst = std::numeric_limits<double>::infinity();
    if (steps_left > 0) {
        IntegrateOptions io;
        io.dt = (nl.times.back() - t0) / static_cast<double>(steps_left);
        const Trajectory red = integrate(reduced, cluster_average(nl.states[k0].z, kFig3Clusters),
                                         nl.times.back() - t0, io);
        worst = 0.0;
        const std::size_t count = std::min<std::size_t>(red.states.size(), steps_left + 1);
        for (std::size_t k = 0; k < count; ++k) {
            const Eigen::MatrixXd mean = cluster_average(nl.states[k0 + k].z, kFig3Clusters);
            worst = std::max(worst, (mean - red.states[k].z).cwiseAbs().maxCoeff());
        }
        if (count != static_cast<std::size_t>(steps_left + 1)) worst = std::numeric_limits<double>::infinity();
    }
    check(r, "reduced two-agent model tracks the cluster means", worst < 1e-6,
          "from t = " + fmt(t0) + ", max deviation " + fmt(worst));

    add_run(r, "nonlinear", cfg, doc, nl);
    std::vector<double> t(lin.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 200.0 * static_cast<double>(k) / (t.size() - 1);
    Table lt = vectors_table("linear", t, lin, "x_");
    r.tables.push_back(std::move(lt));
    r.plots.emplace_back("manifold_distance.svg",
                         svg_chart("fig3 distance to cluster manifold", "t", "distance",
                                   {series_of("distance", nl.times, dist)}));
    r.summary = run_summary(cfg, nl, 0.0);
    r.summary["linear_final_max_abs"] = lin_final;
    r.summary["reduction_start"] = t0;
    r.summary["reduction_max_deviation"] = worst;
    return r;
}

// ---------------------------------------------------------------------------
// Disagreement pitchfork on the three-agent path and its unfolding.

json fig4_doc(double u, const Eigen::VectorXd& b, double dt) {
    return {{"name", "fig4"},
            {"graph", {{"kind", "path"}, {"n", 3}}},
            {"model", {{"d", 1.0}, {"u", u}, {"alpha", 1.0}, {"gamma", -1.0}}},
            {"inputs", vector_to_json(b)},
            {"integration", {{"t_end", 300.0}, {"dt", dt}, {"record_stride", 100}}}};
}

struct BranchCount {
    int total = 0;
    int stable = 0;
    int stable_positive = 0;
    int stable_negative = 0;
};

BranchCount count_at(const std::vector<BranchPoint>& pts, double u) {
    BranchCount c;
    for (const auto& p : pts) {
        if (std::abs(p.u - u) > 1e-12) continue;
        ++c.total;
        if (p.stable) {
            ++c.stable;
            (p.projection > 0.0 ? c.stable_positive : c.stable_negative)++;
        }
    }
    return c;
}

Table branch_table(const std::string& name, const std::vector<BranchPoint>& pts) {
    Table t;
    t.name = name;
    t.header = {"u", "projection", "stable", "residual"};
    for (const auto& p : pts) t.rows.push_back({p.u, p.projection, p.stable ? 1.0 : 0.0, p.residual});
    return t;
}

std::string svg_branches(const std::string& title, const std::vector<BranchPoint>& pts) {
    Series st, un;
    st.label = "stable";
    un.label = "unstable";
    st.scatter = un.scatter = true;
    for (const auto& p : pts) {
        (p.stable ? st : un).x.push_back(p.u);
        (p.stable ? st : un).y.push_back(p.projection);
    }
    return svg_chart(title, "u", "<x, w_min>", {st, un});
}

FigureReport fig4(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig4";
    const double dt = step(o, 0.01);
    const AdjacencySpec path = build_graph(GraphKind::path, 3);
    HomogeneousGains g;
    g.d = 1.0;
    g.alpha = 1.0;
    g.gamma = -1.0;
    const RegimePrediction pred = critical_attention(g, path);
    const double exact = 1.0 / (1.0 + std::sqrt(2.0));
    check(r, "analytic threshold equals 1/(1+sqrt 2)",
          std::abs(pred.u_star - exact) <= 1e-9 && pred.regime == Regime::disagreement && pred.hypotheses_ok,
          "u* = " + fmt(pred.u_star) + ", regime " + std::string(to_string(pred.regime)));

    const Eigen::VectorXd v = pred.pattern_vector, w = pred.centrality_vector;
    const Eigen::Vector3d b_sym(0.2, 0.0, -0.2);

    // Small-amplitude runs on either side of the threshold (inputs off).
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd dir(3);
    for (int i = 0; i < 3; ++i) dir(i) = normal(rng);
    const Eigen::VectorXd x0 = 1e-3 * dir.normalized();
    for (double u : {0.39, 0.44}) {
        json doc = fig4_doc(u, Eigen::VectorXd::Zero(3), dt);
        doc["name"] = "fig4_small_u" + fmt(u);
        doc["initial"] = {{"z", vector_to_json(x0)}};
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        const Trajectory tr = simulate(cfg);
        const Eigen::VectorXd xf = first_option(tr.final_state().z);
        if (u < pred.u_star) {
            check(r, "below threshold (u = 0.39) the small state decays", xf.norm() < 1e-3,
                  "||x(300)|| = " + fmt(xf.norm()));
        } else {
            const bool pattern = pattern_matches(xf, Eigen::Vector3d(1, -1, 1)) &&
                                 xf.cwiseAbs().minCoeff() > 1e-3;
            check(r, "above threshold (u = 0.44) disagreement with pattern (+,-,+) up to sign", pattern,
                  "x(300) = " + fmt_vec(xf));
        }
        add_run(r, "small_u" + fmt(u), cfg, doc, tr);
    }

    // Branch sweeps.
    std::vector<double> grid;
    for (int k = 0; k <= 30; ++k) grid.push_back(0.2 + 0.02 * k);
    auto seeds = [&](const Eigen::VectorXd& b) {
        std::vector<Eigen::MatrixXd> s{lift_two_option(Eigen::VectorXd::Zero(3))};
        for (double c : {0.5, -0.5, 1.5, -1.5}) s.push_back(lift_two_option(c * v));
        s.push_back(lift_two_option(b));
        s.push_back(lift_two_option(-b));
        return s;
    };
    SweepOptions so;
    so.w = w;

    const ScenarioConfig left = parse_scenario(fig4_doc(0.6, b_sym, dt), o.seed);
    const auto lp = sweep_bifurcation(left.system(), grid, seeds(b_sym), so);
    bool single_below = true;
    for (double u : grid) {
        if (u > 0.40 + 1e-12) break;
        const BranchCount c = count_at(lp, u);
        single_below = single_below && c.total == 1 && c.stable == 1;
    }
    check(r, "symmetric inputs: a single stable equilibrium for u <= 0.40", single_below,
          "counts at u = 0.40: " + std::to_string(count_at(lp, 0.4).total));
    const BranchCount c6 = count_at(lp, 0.6);
    check(r, "symmetric inputs: three equilibria, two stable, at u = 0.6",
          c6.total == 3 && c6.stable == 2 && c6.stable_positive == 1 && c6.stable_negative == 1,
          std::to_string(c6.total) + " equilibria, " + std::to_string(c6.stable) + " stable");

    EquilibriumOptions eo;
    const EquilibriumReport eq = find_equilibrium(left.system(), initial_state(left.system(), lift_two_option(0.5 * v)), eo);
    check(r, "Newton converges at u = 0.6 from +v_min/2", eq.converged && eq.residual < 1e-10,
          "residual " + fmt(eq.residual));

    const Eigen::VectorXd b_asym = -0.1 * w + Eigen::VectorXd(b_sym);
    const ScenarioConfig right = parse_scenario(fig4_doc(0.6, b_asym, dt), o.seed);
    const auto rp = sweep_bifurcation(right.system(), grid, seeds(b_asym), so);
    const Unfolding unf = unfolding_direction(b_asym, spectral_extrema(path), Regime::disagreement);
    const int predicted = sign_of(unf.inner);
    // Near the threshold only the predicted side is stable; further out both are.
    bool selected = true;
    for (double u : grid) {
        if (u < 0.44 - 1e-12 || u > 0.5 + 1e-12) continue;
        const BranchCount c = count_at(rp, u);
        selected = selected && c.stable >= 1 &&
                   (predicted > 0 ? c.stable_negative == 0 : c.stable_positive == 0);
    }
    check(r, "unfolded inputs: only the predicted branch is stable for u in [0.44, 0.5]", selected,
          "<b, w_min> = " + fmt(unf.inner));
    const BranchCount c8 = count_at(rp, 0.8);
    check(r, "unfolded inputs: both branches stable again at u = 0.8",
          c8.stable_positive >= 1 && c8.stable_negative >= 1,
          std::to_string(c8.stable_positive) + " positive, " + std::to_string(c8.stable_negative) +
              " negative stable equilibria");

    r.tables.push_back(branch_table("branches_symmetric", lp));
    r.tables.push_back(branch_table("branches_unfolded", rp));
    r.plots.emplace_back("branches_symmetric.svg", svg_branches("fig4 symmetric inputs", lp));
    r.plots.emplace_back("branches_unfolded.svg", svg_branches("fig4 unfolded inputs", rp));
    r.configs.emplace_back("sweep_symmetric", fig4_doc(0.6, b_sym, dt));
    r.configs.emplace_back("sweep_unfolded", fig4_doc(0.6, b_asym, dt));
    r.summary = {{"u_star", pred.u_star}, {"prediction", prediction_record(left.model)},
                 {"unfolding_inner", unf.inner}};
    return r;
}

// ---------------------------------------------------------------------------
// Agreement and disagreement patterns on four graph families.

FigureReport fig5(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig5";
    const double dt = step(o, 0.01);
    struct GraphCase {
        const char* kind;
        int n;
        double u;
    };
    const std::vector<GraphCase> graphs{{"path", 6, 0.31}, {"cycle", 6, 0.31}, {"star", 6, 0.26}, {"wheel", 10, 0.26}};
    const int runs = 50;
    Table summary;
    summary.name = "patterns";
    summary.header = {"graph", "gamma", "u", "u_star", "matches", "runs"};
    int panel = 0;
    for (const auto& gc : graphs) {
        for (double gamma : {1.3, -1.3}) {
            const json base = {{"name", std::string("fig5_") + gc.kind + (gamma > 0 ? "_agreement" : "_disagreement")},
                               {"graph", {{"kind", gc.kind}, {"n", gc.n}}},
                               {"model", {{"d", 1.0}, {"u", gc.u}, {"alpha", 1.2}, {"gamma", gamma}}},
                               {"initial", {{"uniform", {-1.0, 1.0}}}},
                               {"integration", {{"t_end", 500.0}, {"dt", dt}, {"record_stride", 1000000}, {"steady_tol", 1e-10}}}};
            const ScenarioConfig probe = parse_scenario(base, o.seed);
            const RegimePrediction pred = critical_attention(probe.model);
            std::vector<char> match(runs, 0);
            std::vector<Eigen::VectorXd> finals(runs);
            std::vector<InvariantReport> invs(runs);
            parallel_for(runs, [&](int k) {
                const ScenarioConfig cfg = parse_scenario(base, o.seed + 1000 * panel + k);
                const Trajectory tr = simulate(cfg);
                finals[k] = first_option(tr.final_state().z);
                match[k] = pattern_matches(finals[k], pred.pattern_vector);
                invs[k] = check_invariants(cfg, tr);
            });
            const int hits = static_cast<int>(std::count(match.begin(), match.end(), 1));
            const std::string label = std::string(gc.kind) + (gamma > 0 ? " agreement" : " disagreement");
            check(r, label + ": pattern matches sign(" + (gamma > 0 ? "v_max" : "+-v_min") + ") in >= 95% of runs",
                  hits >= 48 && pred.hypotheses_ok && gc.u > pred.u_star,
                  std::to_string(hits) + "/" + std::to_string(runs) + " (u = " + fmt(gc.u) + ", u* = " +
                      fmt(pred.u_star) + ")");
            const bool inv_ok = std::all_of(invs.begin(), invs.end(), [](const InvariantReport& i) { return i.ok(); });
            double drift = 0.0;
            for (const auto& i : invs) drift = std::max(drift, i.row_sum_drift);
            check(r, "invariants: " + label + " runs", inv_ok, "max row-sum drift " + fmt(drift));
            summary.rows.push_back({static_cast<double>(panel / 2), gamma, gc.u, pred.u_star,
                                    static_cast<double>(hits), static_cast<double>(runs)});
            Table ft;
            ft.name = std::string("final_") + gc.kind + (gamma > 0 ? "_agreement" : "_disagreement");
            ft.header.push_back("run");
            for (int i = 0; i < gc.n; ++i) ft.header.push_back("x_" + std::to_string(i));
            for (int k = 0; k < runs; ++k) {
                std::vector<double> row{static_cast<double>(k)};
                for (int i = 0; i < gc.n; ++i) row.push_back(finals[k](i));
                ft.rows.push_back(std::move(row));
            }
            r.tables.push_back(std::move(ft));
            r.configs.emplace_back(base["name"].get<std::string>(), base);
            r.summary[label] = {{"matches", hits}, {"runs", runs}, {"u_star", pred.u_star},
                                {"pattern_vector", vector_to_json(pred.pattern_vector)},
                                {"example_final", vector_to_json(finals[0])}};
            ++panel;
        }
    }
    r.tables.push_back(std::move(summary));
    return r;
}

// ---------------------------------------------------------------------------
// Single agent with attention feedback.

json single_agent_doc(const std::string& name, double b, double u_high, double t_end, double dt) {
    return {{"name", name},
            {"graph", {{"matrix", {{0.0}}}}},
            {"model", {{"d", 1.0}, {"alpha", 2.0}, {"beta", -1.0}, {"gamma", 0.0}, {"delta", 0.0}}},
            {"inputs", {b}},
            {"attention", {{"tau_u", 1.0}, {"n_hill", 2.0}, {"y_th", 0.4}, {"u_low", 0.0}, {"u_high", u_high}}},
            {"initial", {{"z", {0.0}}, {"u", 0.0}}},
            {"integration", {{"t_end", t_end}, {"dt", dt}, {"record_stride", 10}}}};
}

/// Opinion-nullcline/attention-nullcline intersections of the single agent:
/// roots of -d x + S_u(x^2) (S1(alpha x) - S2(beta x)) + b on a fine grid.
std::vector<double> single_agent_equilibria(const ScenarioConfig& cfg) {
    const ModelParams& p = cfg.model;
    const AttentionParams& ap = *cfg.attention;
    const double abar = cfg.system().attention_matrix()(0, 0);
    auto f = [&](double x) {
        const double y = abar * abar * x * x;
        return -p.d(0) * x + hill_eval(ap, y) * (p.s1.odd(p.alpha(0) * x) - p.s2.odd(p.beta(0) * x)) + p.b(0, 0);
    };
    std::vector<double> roots;
    const double lim = 2.0 * boundedness_radius(p.with_u(ap.u_high), 0.0) + 1.0;
    const int n = 400000;
    double xa = -lim, fa = f(xa);
    for (int k = 1; k <= n; ++k) {
        const double xb = -lim + 2.0 * lim * k / n, fb = f(xb);
        if (fa == 0.0) roots.push_back(xa);
        else if (fa * fb < 0.0) {
            double lo = xa, hi = xb, flo = fa;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi), fm = f(mid);
                if ((fm < 0.0) == (flo < 0.0)) lo = mid, flo = fm;
                else hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        xa = xb;
        fa = fb;
    }
    return roots;
}

FigureReport fig6(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig6";
    const double dt = step(o, 0.01);
    for (double b : {0.5, 1.0}) {
        const std::string label = "b" + fmt(b);
        const json doc = single_agent_doc("fig6_" + label, b, 2.0, 100.0, dt);
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        const Trajectory tr = simulate(cfg);
        const double x = tr.final_state().z(0, 0);
        const double u = tr.final_state().u(0);
        const auto eq = single_agent_equilibria(cfg);
        std::string roots;
        for (double e : eq) roots += (roots.empty() ? "" : ", ") + fmt(e);
        if (b < 0.75) {
            check(r, "b = 0.5: input rejected, final |x| < 0.35", std::abs(x) < 0.35,
                  "x(100) = " + fmt(x) + ", u(100) = " + fmt(u));
            int positive = 0;
            for (double e : eq) positive += e > 0.0;
            check(r, "b = 0.5: three nullcline intersections with x > 0", positive == 3,
                  "equilibria at x = " + roots);
        } else {
            check(r, "b = 1: input accepted, final |x| > 0.8", std::abs(x) > 0.8,
                  "x(100) = " + fmt(x) + ", u(100) = " + fmt(u));
            check(r, "b = 1: a single nullcline intersection", eq.size() == 1, "equilibria at x = " + roots);
        }
        add_run(r, label, cfg, doc, tr);
        r.summary[label] = {{"x_final", x}, {"u_final", u}, {"equilibria", eq}};
    }
    return r;
}

FigureReport fig7(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig7";
    const double dt = step(o, 0.01);
    for (double u_high : {1.0, 2.5}) {
        const std::string label = "u_high" + fmt(u_high);
        json doc = single_agent_doc("fig7_" + label, 1.0, u_high, 100.0, dt);
        doc["schedule"] = {{{"t", 50.0}, {"inputs", {-1.0}}, {"tag", "input reversed"}}};
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        const Trajectory tr = simulate(cfg);
        const double before = tr.at(50.0 - 1e-9).z(0, 0);
        const double after = tr.final_state().z(0, 0);
        check(r, label + ": strong positive opinion before the reversal", before > 0.8,
              "x(50) = " + fmt(before));
        if (u_high > 2.0) {
            check(r, "u_high = 2.5: opinion retained after the reversal (hysteresis)", after > 0.8,
                  "x(100) = " + fmt(after));
        } else {
            check(r, "u_high = 1: opinion follows the reversed input", after < -0.8,
                  "x(100) = " + fmt(after));
        }
        add_run(r, label, cfg, doc, tr);
        r.summary[label] = {{"x_before", before}, {"x_after", after}};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Cascades on a six-agent cycle.

json cascade_doc(const std::string& name, double gamma, double u_low, double u_high,
                 const Eigen::VectorXd& x0, double dt) {
    Eigen::VectorXd b0 = Eigen::VectorXd::Constant(6, 0.05);
    b0(0) = -0.05;
    Eigen::VectorXd b1 = b0;
    b1(4) = 0.25;
    return {{"name", name},
            {"graph", {{"kind", "cycle"}, {"n", 6}, {"weight", 0.5}}},
            {"model", {{"d", 1.0}, {"alpha", 2.0}, {"gamma", gamma}}},
            {"inputs", vector_to_json(b0)},
            {"schedule", {{{"t", 20.0}, {"inputs", vector_to_json(b1)}, {"tag", "agent 5 input raised"}}}},
            {"attention", {{"tau_u", 5.0}, {"n_hill", 3.0}, {"y_th", 0.1}, {"u_low", u_low}, {"u_high", u_high}}},
            {"initial", {{"z", vector_to_json(x0)}}},
            {"integration", {{"t_end", 200.0}, {"dt", dt}, {"record_stride", 10}}}};
}

FigureReport fig8(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig8";
    const double dt = step(o, 0.01);
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(-0.2, 0.2);
    Eigen::VectorXd x0(6);
    for (int i = 0; i < 6; ++i) x0(i) = U(rng);
    const AdjacencySpec cycle = build_graph(GraphKind::cycle, 6, 0.5);
    const SpectralSummary spec = spectral_extrema(cycle);
    for (double gamma : {1.0, -1.0, 0.0}) {
        // With gamma = 0 agents couple only through attention; the threshold
        // is then the isolated-agent value d / alpha.
        double u_star = 0.5;
        if (gamma != 0.0) {
            HomogeneousGains g;
            g.alpha = 2.0;
            g.gamma = gamma;
            u_star = critical_attention(g, cycle).u_star;
        }
        const std::string label = gamma > 0 ? "agreement" : (gamma < 0 ? "disagreement" : "attention_only");
        const json doc = cascade_doc("fig8_" + label, gamma, u_star - 0.3, u_star + 0.3, x0, dt);
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        const Trajectory tr = simulate(cfg);
        const double thr = cfg.resolved_strong_threshold();
        bool early = false;
        for (std::size_t k = 0; k < tr.times.size() && tr.times[k] < 20.0; ++k) {
            early = early || is_cascade(tr.states[k].z, thr);
        }
        const Eigen::MatrixXd zf = tr.final_state().z;
        const Eigen::VectorXd xf = first_option(zf);
        check(r, label + ": no cascade before t = 20", !early, "strong threshold " + fmt(thr));
        check(r, label + ": cascade after the input switch", is_cascade(zf, thr), "x(200) = " + fmt_vec(xf));
        if (gamma > 0.0) {
            check(r, "agreement: all agents share one sign", classify_state(zf, thr).agreement, "x(200) = " + fmt_vec(xf));
        } else if (gamma < 0.0) {
            check(r, "disagreement: sign pattern follows v_min", pattern_matches(xf, spec.v_min),
                  "v_min = " + fmt_vec(spec.v_min));
        } else {
            const Eigen::VectorXd bf = first_option(cfg.schedule.segments().back().b_raw);
            bool follows = true;
            for (int i = 0; i < 6; ++i) follows = follows && sign_of(xf(i), 1e-9) == sign_of(bf(i));
            check(r, "attention only: every agent follows the sign of its input", follows,
                  "b = " + fmt_vec(bf));
        }
        add_run(r, label, cfg, doc, tr);
        r.summary[label] = {{"u_star", u_star}, {"x_final", vector_to_json(xf)},
                            {"label", describe_state(zf, thr)}};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monte-Carlo cascade frequencies and thresholds.

json fig9_doc(double gamma, double y_th, double dt) {
    const AdjacencySpec cycle = build_graph(GraphKind::cycle, 6, 0.5);
    HomogeneousGains g;
    g.alpha = 2.0;
    g.gamma = gamma;
    const double u_c = critical_attention(g, cycle).u_star;
    return {{"name", std::string("fig9_") + (gamma > 0 ? "agreement" : "disagreement")},
            {"graph", {{"kind", "cycle"}, {"n", 6}, {"weight", 0.5}}},
            {"model", {{"d", 1.0}, {"alpha", 2.0}, {"gamma", gamma}}},
            {"attention", {{"tau_u", 10.0}, {"n_hill", 3.0}, {"y_th", y_th}, {"u_low", u_c - 0.01}, {"u_high", u_c + 0.3}}},
            {"initial", {{"u", 0.0}}},
            {"integration", {{"t_end", 500.0}, {"dt", dt}}},
            {"analysis", {{"cascade", {{"trials", 1000}, {"magnitude_bins", 5}, {"alignment_bins", 5}, {"max_magnitude", 0.1},
                                       {"t_end", 500.0}, {"dt", dt}, {"cascade_hold", 50.0}, {"u0", 0.0}}}}}};
}

}  // namespace

std::pair<CascadeThreshold, CascadeThreshold> fig9_thresholds(const RecipeOptions& o) {
    const double dt = o.dt > 0.0 ? o.dt : 0.05;
    std::vector<CascadeThreshold> out;
    for (double y_th : {0.1, 0.2}) {
        const ScenarioConfig cfg = parse_scenario(fig9_doc(1.0, y_th, dt), o.seed);
        const RegimePrediction pred = critical_attention(cfg.model);
        out.push_back(estimate_cascade_threshold(cfg.model, *cfg.attention, pred.centrality_vector, 0.0, 0.5,
                                                 1e-3, cfg.cascade->cascade));
    }
    return {out[0], out[1]};
}

namespace {

/// True when freq(b) is below freq(a) by more than the 95% two-proportion
/// z-test allows.
bool significant_drop(const CascadeCell& a, const CascadeCell& b) {
    const double pa = a.frequency(), pb = b.frequency();
    if (pb >= pa) return false;
    const double pooled = static_cast<double>(a.cascades + b.cascades) / (a.trials + b.trials);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / a.trials + 1.0 / b.trials));
    return se == 0.0 || (pa - pb) / se > 1.96;
}

Table cells_table(const std::string& name, const std::vector<CascadeCell>& cells) {
    Table t;
    t.name = name;
    t.header = {"magnitude_lo", "magnitude_hi", "alignment_lo", "alignment_hi", "trials", "cascades", "frequency"};
    for (const auto& c : cells) {
        t.rows.push_back({c.magnitude_lo, c.magnitude_hi, c.alignment_lo, c.alignment_hi,
                          static_cast<double>(c.trials), static_cast<double>(c.cascades), c.frequency()});
    }
    return t;
}

FigureReport fig9_scaled(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig9_scaled";
    const double dt = step(o, 0.05);
    for (double gamma : {1.0, -1.0}) {
        const std::string label = gamma > 0 ? "agreement" : "disagreement";
        const json doc = fig9_doc(gamma, 0.2, dt);
        const ScenarioConfig cfg = parse_scenario(doc, o.seed);
        CascadeStudyOptions co = *cfg.cascade;
        if (o.trials > 0) co.trials = o.trials;
        const RegimePrediction pred = critical_attention(cfg.model);
        const auto cells = cascade_study(cfg.model, *cfg.attention, pred.centrality_vector, co);
        const int A = co.alignment_bins, M = co.magnitude_bins;
        auto cell = [&](int mi, int ai) -> const CascadeCell& { return cells[mi * A + ai]; };
        bool mono_m = true, mono_a = true;
        for (int mi = 0; mi + 1 < M; ++mi) mono_m = mono_m && !significant_drop(cell(mi, A - 1), cell(mi + 1, A - 1));
        for (int ai = 0; ai + 1 < A; ++ai) mono_a = mono_a && !significant_drop(cell(M - 1, ai), cell(M - 1, ai + 1));
        std::string row_a, row_m;
        for (int mi = 0; mi < M; ++mi) row_m += (mi ? ", " : "") + fmt(cell(mi, A - 1).frequency());
        for (int ai = 0; ai < A; ++ai) row_a += (ai ? ", " : "") + fmt(cell(M - 1, ai).frequency());
        check(r, label + ": frequency nondecreasing in magnitude at maximal alignment", mono_m, "frequencies " + row_m);
        check(r, label + ": frequency nondecreasing in alignment at maximal magnitude", mono_a, "frequencies " + row_a);
        check(r, label + ": highest bin cascades almost always", cell(M - 1, A - 1).frequency() >= 0.9,
              "frequency " + fmt(cell(M - 1, A - 1).frequency()));
        r.tables.push_back(cells_table("frequency_" + label, cells));
        std::vector<Series> ss;
        for (int ai = 0; ai < A; ++ai) {
            Series s;
            s.label = "alignment " + fmt(cell(0, ai).alignment_lo) + "-" + fmt(cell(0, ai).alignment_hi);
            for (int mi = 0; mi < M; ++mi) {
                s.x.push_back(0.5 * (cell(mi, ai).magnitude_lo + cell(mi, ai).magnitude_hi));
                s.y.push_back(cell(mi, ai).frequency());
            }
            ss.push_back(std::move(s));
        }
        r.plots.emplace_back("frequency_" + label + ".svg",
                             svg_chart("fig9 cascade frequency, " + label, "||b||", "frequency", ss));
        r.configs.emplace_back(label, doc);
        r.summary[label] = {{"trials_per_bin", co.trials}, {"seed", co.seed}, {"u_star", pred.u_star}};
    }

    const auto [lo, hi] = fig9_thresholds(o);
    r.summary["threshold_y_th_0.1"] = {{"p", lo.p}, {"lo", lo.lo}, {"hi", lo.hi}, {"trials", lo.trials}};
    r.summary["threshold_y_th_0.2"] = {{"p", hi.p}, {"lo", hi.lo}, {"hi", hi.hi}, {"trials", hi.trials}};
    check(r, "cascade threshold grows with y_th (0.1 -> 0.2)", hi.p > lo.p,
          "p(0.1) = " + fmt(lo.p) + ", p(0.2) = " + fmt(hi.p));
    return r;
}

// ---------------------------------------------------------------------------
// Agreement/disagreement transitions driven by inter-cluster gain feedback.

json fig10_doc(std::uint64_t seed, double dt) {
    const Partition clusters{{0, 1, 2}, {3, 4, 5, 6}};
    const int n = 7;
    const double alpha = 1.0, beta = -1.0;
    std::mt19937_64 rng(seed);
    // N(mean, variance) in the caption; the library draws with standard deviations.
    auto draw = [&](double mean, double variance) {
        return std::normal_distribution<double>(mean, std::sqrt(variance))(rng);
    };
    Eigen::VectorXd x(n), u(n), gam(n), del(n), d(n), a(n), bt(n), b(n);
    for (int i = 0; i < n; ++i) x(i) = draw(0.0, 2.0);
    for (int i = 0; i < n; ++i) u(i) = draw(0.0, 0.3);
    for (int i = 0; i < n; ++i) gam(i) = draw(-3.0, 0.3);
    for (int i = 0; i < n; ++i) del(i) = draw(1.0, 0.3);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n), D = Eigen::MatrixXd::Zero(n, n);
    for (const auto& cell : clusters) {
        const double np = static_cast<double>(cell.size());
        for (int i : cell) {
            d(i) = 1.0 + draw(0.0, 0.1);
            a(i) = alpha / np + draw(0.0, 0.1);
            bt(i) = beta / np + draw(0.0, 0.1);
            b(i) = (&cell == &clusters[0] ? 0.5 : -0.5) + draw(0.0, 0.1);
            for (int k : cell) {
                if (k == i) continue;
                G(i, k) = alpha / np;
                D(i, k) = beta / np;
            }
        }
    }
    // The intra-cluster structure doubles as the graph (|G| pattern).
    return {{"name", "fig10"},
            {"graph", {{"matrix", matrix_to_json(G.cwiseAbs())}}},
            {"model", {{"d", vector_to_json(d)}, {"alpha", vector_to_json(a)}, {"beta", vector_to_json(bt)},
                       {"Gamma", matrix_to_json(G)}, {"Delta", matrix_to_json(D)}}},
            {"inputs", vector_to_json(b)},
            {"attention", {{"tau_u", 10.0}, {"n_hill", 2.0}, {"y_th", 1.0}, {"u_low", 2.0}, {"u_high", 3.0},
                           {"abar", matrix_to_json(Eigen::MatrixXd::Ones(n, n))}}},
            {"coupling", {{"sigma", 1}, {"tau_gamma", 100.0}, {"tau_delta", 100.0}, {"gamma_f", 2.0}, {"delta_f", 1.0},
                          {"g_gamma", 10.0}, {"g_delta", 10.0}, {"partition", {{0, 1, 2}, {3, 4, 5, 6}}},
                          {"sigma_switches", {{300.0, -1}}}}},
            {"initial", {{"z", vector_to_json(x)}, {"u", vector_to_json(u)}, {"gamma", vector_to_json(gam)},
                         {"delta", vector_to_json(del)}}},
            {"integration", {{"t_end", 600.0}, {"dt", dt}, {"record_stride", 100}}},
            {"analysis", {{"clusters", {{0, 1, 2}, {3, 4, 5, 6}}}}}};
}

bool two_cluster_dissensus(const Eigen::VectorXd& x, const Partition& clusters) {
    int s[2];
    for (int c = 0; c < 2; ++c) {
        s[c] = sign_of(x(clusters[c].front()), 1e-9);
        for (int i : clusters[c]) {
            if (sign_of(x(i), 1e-9) != s[c]) return false;
        }
    }
    return s[0] * s[1] == -1;
}

FigureReport fig10(const RecipeOptions& o) {
    FigureReport r;
    r.id = "fig10";
    const double dt = step(o, 0.01);
    const json doc = fig10_doc(o.seed, dt);
    const ScenarioConfig cfg = parse_scenario(doc, o.seed);
    const Trajectory tr = simulate(cfg);
    bool consensus = true;
    int sampled = 0;
    std::string first_bad;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double t = tr.times[k];
        if (t < 200.0 || t > 300.0) continue;
        ++sampled;
        const bool agree = classify_state(tr.states[k].z, cfg.resolved_strong_threshold()).agreement;
        if (!agree && first_bad.empty()) first_bad = "first miss at t = " + fmt(t) + ": x = " + fmt_vec(first_option(tr.states[k].z));
        consensus = consensus && agree;
    }
    check(r, "consensus throughout t in [200, 300]", consensus && sampled > 0,
          first_bad.empty() ? std::to_string(sampled) + " samples" : first_bad);
    const Eigen::VectorXd xf = first_option(tr.final_state().z);
    check(r, "two-cluster dissensus at t = 600", two_cluster_dissensus(xf, cfg.clusters), "x(600) = " + fmt_vec(xf));

    const auto& s300 = tr.at(300.0 - 1e-9);
    const double gd300 = (s300.gamma - s300.delta).mean();
    const double gd600 = (tr.final_state().gamma - tr.final_state().delta).mean();
    add_run(r, "transition", cfg, doc, tr);
    Series gd;
    gd.label = "mean(gamma - delta)";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        gd.x.push_back(tr.times[k]);
        gd.y.push_back((tr.states[k].gamma - tr.states[k].delta).mean());
    }
    r.plots.emplace_back("coupling_gains.svg", svg_chart("fig10 inter-cluster gains", "t", "gamma - delta", {gd}));
    r.summary = {{"mean_gamma_minus_delta_t300", gd300}, {"mean_gamma_minus_delta_t600", gd600},
                 {"x_t300", vector_to_json(first_option(s300.z))}, {"x_t600", vector_to_json(xf)}};
    return r;
}

}  // namespace

std::vector<std::string> recipe_ids() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9_scaled", "fig10"};
}

FigureReport reproduce(std::string_view id, const RecipeOptions& opts) {
    using Fn = FigureReport (*)(const RecipeOptions&);
    static const std::vector<std::pair<std::string_view, Fn>> table{
        {"fig2", fig2}, {"fig3", fig3}, {"fig4", fig4},   {"fig5", fig5},           {"fig6", fig6},
        {"fig7", fig7}, {"fig8", fig8}, {"fig9_scaled", fig9_scaled}, {"fig10", fig10}};
    for (const auto& [name, fn] : table) {
        if (name != id) continue;
        const auto start = std::chrono::steady_clock::now();
        FigureReport r = fn(opts);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }
    throw ParameterError("unknown figure id '" + std::string(id) + "'");
}

void write_report(const FigureReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& t : report.tables) write_csv(dir / (t.name + ".csv"), t);
    for (const auto& [name, svg] : report.plots) {
        std::ofstream(dir / name, std::ios::binary) << svg;
    }
    for (const auto& [name, doc] : report.configs) {
        std::ofstream(dir / (name + ".json")) << doc.dump(2) << '\n';
    }
    json checks = json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    const json out = {{"id", report.id},
                      {"passed", report.passed()},
                      {"seconds", report.seconds},
                      {"checks", checks},
                      {"summary", report.summary}};
    std::ofstream(dir / "report.json") << out.dump(2) << '\n';
}

InvariantReport check_invariants(const ScenarioConfig& cfg, const Trajectory& traj) {
    InvariantReport inv;
    double u_max = cfg.model.u.size() ? cfg.model.u.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& s : traj.states) {
        inv.row_sum_drift = std::max(inv.row_sum_drift, s.z.rowwise().sum().cwiseAbs().maxCoeff());
        inv.max_abs = std::max(inv.max_abs, s.z.cwiseAbs().maxCoeff());
        if (s.u.size()) u_max = std::max(u_max, s.u.cwiseAbs().maxCoeff());
    }
    if (cfg.attention) u_max = std::max(u_max, cfg.attention->u_high);
    const double z0 = traj.states.empty() ? 0.0 : traj.states.front().z.cwiseAbs().maxCoeff();
    const ModelParams widened = cfg.model.with_u(u_max);
    inv.bound = boundedness_radius(widened, z0);
    for (const auto& seg : cfg.schedule.segments()) {
        inv.bound = std::max(inv.bound, boundedness_radius(widened.with_inputs(seg.b_raw), z0));
    }
    return inv;
}

std::string describe_state(const Eigen::MatrixXd& z, double strong_threshold) {
    if (z.cwiseAbs().maxCoeff() < 1e-6) return "neutral equilibrium";
    const StateClassification c = classify_state(z, strong_threshold);
    if (c.consensus) return "consensus";
    if (c.agreement) return "agreement";
    const Partition groups = opinion_clusters(z, 1e-6);
    if (groups.size() >= 2 && groups.size() < static_cast<std::size_t>(z.rows())) return "clustered dissensus";
    return "disagreement";
}

nlohmann::json spectral_record(const AdjacencySpec& a) {
    const SpectralSummary s = spectral_extrema(a);
    json eig = json::array();
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        eig.push_back({s.eigenvalues(i).real(), s.eigenvalues(i).imag()});
    }
    return {{"eigenvalues", eig},
            {"lambda_max", s.lambda_max},
            {"lambda_min", s.lambda_min},
            {"v_max", vector_to_json(s.v_max)},
            {"w_max", vector_to_json(s.w_max)},
            {"v_min", vector_to_json(s.v_min)},
            {"w_min", vector_to_json(s.w_min)},
            {"lambda_max_simple", s.lambda_max_simple},
            {"lambda_min_simple", s.lambda_min_simple},
            {"perron_positive", s.perron_positive},
            {"strongly_connected", s.strongly_connected},
            {"symmetric", s.symmetric},
            {"diagnostics", s.diagnostics}};
}

nlohmann::json prediction_record(const ModelParams& p) {
    if (p.gains && p.graph) {
        const RegimePrediction pr = critical_attention(p);
        return {{"u_star", std::isfinite(pr.u_star) ? json(pr.u_star) : json(nullptr)},
                {"regime", std::string(to_string(pr.regime))},
                {"lambda", pr.lambda},
                {"pattern_vector", vector_to_json(pr.pattern_vector)},
                {"centrality_vector", vector_to_json(pr.centrality_vector)},
                {"hypotheses_ok", pr.hypotheses_ok},
                {"diagnostics", pr.diagnostics}};
    }
    return {{"u_star", critical_attention_general(p)}, {"regime", "general"}};
}

nlohmann::json run_summary(const ScenarioConfig& cfg, const Trajectory& traj, double seconds) {
    const Eigen::MatrixXd& z = traj.final_state().z;
    const double thr = cfg.resolved_strong_threshold();
    json clusters = json::array();
    for (const auto& cell : opinion_clusters(z, 1e-6)) {
        json c = json::array();
        for (int i : cell) c.push_back(i + 1);
        clusters.push_back(c);
    }
    json out = {{"name", cfg.name},
                {"classification", describe_state(z, thr)},
                {"clusters", clusters},
                {"final_time", traj.times.back()},
                {"final_max_abs", z.cwiseAbs().maxCoeff()},
                {"final_norm", z.norm()},
                {"strong_threshold", thr},
                {"seed", cfg.seed},
                {"runtime_seconds", seconds}};
    if (traj.final_state().u.size()) out["final_attention"] = vector_to_json(traj.final_state().u);
    try {
        out["prediction"] = prediction_record(cfg.model);
    } catch (const std::exception& e) {
        out["prediction"] = {{"error", e.what()}};
    }
    out["spectrum"] = spectral_record(cfg.graph);
    const InvariantReport inv = check_invariants(cfg, traj);
    out["invariants"] = {{"row_sum_drift", inv.row_sum_drift}, {"max_abs", inv.max_abs}, {"bound", inv.bound}};
    json events = json::array();
    for (const auto& e : traj.events) events.push_back({{"t", e.t}, {"tag", e.tag}});
    out["events"] = events;
    return out;
}

}  // namespace opinionlab
