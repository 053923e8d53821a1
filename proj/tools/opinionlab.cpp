// Command-line front end: run, analyze, sweep, cascade, reproduce, graph.

#include "opinionlab/analysis.hpp"
#include "opinionlab/error.hpp"
#include "opinionlab/io.hpp"
#include "opinionlab/recipes.hpp"
#include "opinionlab/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace ol = opinionlab;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    double dt = 0.0;
    std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c, bool needs_config) {
    auto* opt = sub->add_option("--config", c.config, "Scenario document (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Override the scenario seed");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--dt", c.dt, "Override the integration step")->check(CLI::PositiveNumber);
    sub->add_option("--format", c.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

ol::ScenarioConfig load(const Common& c) {
    ol::ScenarioConfig cfg = ol::load_scenario(c.config, c.seed);
    if (c.dt > 0.0) cfg.integration.dt = c.dt;
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

json table_json(const ol::Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    return {{"name", t.name}, {"columns", t.header}, {"rows", rows}};
}

void write_table(const std::filesystem::path& dir, const ol::Table& t, const std::string& format) {
    std::filesystem::create_directories(dir);
    if (format == "json") {
        std::ofstream(dir / (t.name + ".json")) << table_json(t).dump(2) << '\n';
    } else {
        ol::write_csv(dir / (t.name + ".csv"), t);
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path) << doc.dump(2) << '\n';
}

int cmd_run(const Common& c) {
    const ol::ScenarioConfig cfg = load(c);
    const auto start = std::chrono::steady_clock::now();
    const ol::Trajectory tr = ol::integrate(cfg.system(), cfg.initial, cfg.schedule, cfg.t_end, cfg.integration);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::filesystem::path dir = cfg.output_dir / cfg.name;
    ol::Table t = ol::trajectory_table(tr);
    write_table(dir, t, c.format);
    // Runtime varies between runs; keep it out of the written record so
    // reruns with the same seed produce identical files.
    json summary = ol::run_summary(cfg, tr, 0.0);
    summary.erase("runtime_seconds");
    write_json(dir / "summary.json", summary);
    if (cfg.svg) std::ofstream(dir / "opinions.svg") << ol::svg_opinions(cfg.name, tr);
    summary["runtime_seconds"] = secs;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_analyze(const Common& c) {
    const ol::ScenarioConfig cfg = load(c);
    json rec = ol::prediction_record(cfg.model);
    rec["spectrum"] = ol::spectral_record(cfg.graph);
    if (!cfg.clusters.empty()) {
        try {
            const ol::ClusterCondition cc = ol::check_cluster_condition(cfg.model, cfg.clusters);
            rec["cluster_condition"] = {{"holds", cc.all()}, {"margins", cc.margin}};
        } catch (const ol::HypothesisError& e) {
            rec["cluster_condition"] = {{"error", e.what()}};
        }
    }
    if (!c.out.empty()) write_json(std::filesystem::path(c.out) / cfg.name / "prediction.json", rec);
    std::cout << rec.dump(2) << '\n';
    return 0;
}

std::vector<double> parse_grid(const std::string& spec) {
    // start:stop:count or a comma-separated list.
    std::vector<double> g;
    if (spec.find(':') != std::string::npos) {
        double a = 0, b = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(spec);
        if (!(ss >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1) {
            throw ol::SchemaError("grid must be start:stop:count or a comma-separated list");
        }
        for (int k = 0; k < n; ++k) g.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
        return g;
    }
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) g.push_back(std::stod(item));
    return g;
}

int cmd_sweep(const Common& c, std::string parameter, const std::string& grid_spec) {
    const ol::ScenarioConfig cfg = load(c);
    ol::SweepConfig sc = cfg.sweep.value_or(ol::SweepConfig{});
    if (!parameter.empty()) sc.parameter = parameter;
    if (!grid_spec.empty()) sc.grid = parse_grid(grid_spec);
    if (sc.grid.empty()) throw ol::SchemaError("sweep needs a grid (analysis.sweep.grid or --grid)");
    if (sc.seeds.empty()) sc.seeds.push_back(Eigen::MatrixXd::Zero(cfg.model.n_agents(), cfg.model.n_options()));
    if (sc.w.size() == 0 && cfg.model.gains && cfg.model.gains->gamma != cfg.model.gains->delta) {
        sc.w = ol::critical_attention(cfg.model).centrality_vector;
    }
    ol::SweepOptions so;
    so.w = sc.w;
    so.presettle_time = sc.presettle_time;
    so.equilibrium.dt = cfg.integration.dt;
    ol::Table t;
    t.name = "branches";
    t.header = {sc.parameter == "u" ? "u" : "b_scale", "projection", "stable", "residual"};
    if (sc.parameter == "u") {
        for (const auto& p : ol::sweep_bifurcation(cfg.system(), sc.grid, sc.seeds, so)) {
            t.rows.push_back({p.u, p.projection, p.stable ? 1.0 : 0.0, p.residual});
        }
    } else {
        const double u = cfg.model.u(0);
        if ((cfg.model.u.array() != u).any()) throw ol::HypothesisError("b-scale sweeps need identical u across agents");
        for (double s : sc.grid) {
            ol::System sys = cfg.system();
            sys.model = cfg.model.with_inputs(s * cfg.model.b_raw);
            for (const auto& p : ol::sweep_bifurcation(sys, {u}, sc.seeds, so)) {
                t.rows.push_back({s, p.projection, p.stable ? 1.0 : 0.0, p.residual});
            }
        }
    }
    write_table(cfg.output_dir / cfg.name, t, c.format);
    std::cout << "wrote " << t.rows.size() << " branch points to " << (cfg.output_dir / cfg.name).string() << '\n';
    return 0;
}

int cmd_cascade(const Common& c, int trials, double max_magnitude) {
    const ol::ScenarioConfig cfg = load(c);
    if (!cfg.attention) throw ol::SchemaError("cascade studies need an 'attention' block");
    ol::CascadeStudyOptions co = cfg.cascade.value_or(ol::CascadeStudyOptions{});
    co.seed = cfg.seed;
    if (trials > 0) co.trials = trials;
    if (max_magnitude >= 0.0) co.max_magnitude = max_magnitude;
    if (c.dt > 0.0) co.cascade.dt = c.dt;
    const ol::RegimePrediction pred = ol::critical_attention(cfg.model);
    const auto cells = ol::cascade_study(cfg.model, *cfg.attention, pred.centrality_vector, co);
    ol::Table t;
    t.name = "frequency";
    t.header = {"magnitude_lo", "magnitude_hi", "alignment_lo", "alignment_hi", "trials", "cascades", "frequency"};
    for (const auto& cell : cells) {
        t.rows.push_back({cell.magnitude_lo, cell.magnitude_hi, cell.alignment_lo, cell.alignment_hi,
                          static_cast<double>(cell.trials), static_cast<double>(cell.cascades), cell.frequency()});
    }
    const auto dir = cfg.output_dir / cfg.name;
    write_table(dir, t, c.format);
    write_json(dir / "cascade_seed.json", {{"seed", co.seed}, {"trials_per_bin", co.trials}});
    std::cout << "wrote " << cells.size() << " bins (seed " << co.seed << ") to " << dir.string() << '\n';
    return 0;
}

int cmd_reproduce(const Common& c, const std::vector<std::string>& ids, int trials) {
    ol::RecipeOptions ro;
    if (c.seed) ro.seed = *c.seed;
    ro.dt = c.dt;
    ro.trials = trials;
    std::vector<std::string> todo = ids;
    if (todo.size() == 1 && todo[0] == "all") todo = ol::recipe_ids();
    const std::filesystem::path base = c.out.empty() ? "out" : c.out;
    int failed = 0;
    for (const auto& id : todo) {
        const ol::FigureReport r = ol::reproduce(id, ro);
        ol::write_report(r, base / id);
        std::cout << id << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << r.seconds << " s)\n";
        for (const auto& ch : r.checks) {
            std::cout << "  [" << (ch.passed ? "ok" : "FAILED") << "] " << ch.name << " -- " << ch.detail << '\n';
        }
        failed += !r.passed();
    }
    return failed ? 1 : 0;
}

int cmd_graph(const Common& c, const std::string& kind, int n, double weight) {
    std::optional<ol::AdjacencySpec> a;
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        const json doc = json::parse(in);
        a = doc.contains("graph") ? ol::parse_graph(doc.at("graph")) : ol::parse_graph(doc);
    } else if (!kind.empty()) {
        a = ol::build_graph(ol::parse_graph_kind(kind), n, weight);
    } else {
        throw ol::SchemaError("graph needs --config or --kind/--n");
    }
    json rec = ol::spectral_record(*a);
    rec["matrix"] = ol::matrix_to_json(a->entries());
    std::cout << rec.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opinionlab: nonlinear multi-option opinion dynamics"};
    app.require_subcommand(1);
    Common c;

    auto* run = app.add_subcommand("run", "Integrate a scenario and write its trajectory and summary");
    add_common(run, c, true);

    auto* analyze = app.add_subcommand("analyze", "Critical attention, regime and spectral prediction");
    add_common(analyze, c, true);

    std::string parameter, grid;
    auto* sweep = app.add_subcommand("sweep", "Equilibrium branches over u or an input scale");
    add_common(sweep, c, true);
    sweep->add_option("--parameter", parameter, "u or b-scale")->check(CLI::IsMember({"u", "b-scale"}));
    sweep->add_option("--grid", grid, "start:stop:count or v1,v2,...");

    int trials = 0;
    double max_magnitude = -1.0;
    auto* cascade = app.add_subcommand("cascade", "Monte-Carlo cascade frequencies over input magnitude and alignment");
    add_common(cascade, c, true);
    cascade->add_option("--trials", trials, "Trials per bin")->check(CLI::PositiveNumber);
    cascade->add_option("--max-magnitude", max_magnitude, "Largest input magnitude")->check(CLI::NonNegativeNumber);

    std::vector<std::string> ids;
    auto* reproduce = app.add_subcommand("reproduce", "Run figure recipes and evaluate their checklists");
    add_common(reproduce, c, false);
    reproduce->add_option("ids", ids, "Figure ids, or 'all'")->required();
    reproduce->add_option("--trials", trials, "Monte-Carlo trials per bin for fig9_scaled")->check(CLI::PositiveNumber);

    std::string kind;
    int n = 0;
    double weight = 1.0;
    auto* graph = app.add_subcommand("graph", "Print a spectral report for a graph");
    add_common(graph, c, false);
    graph->add_option("--kind", kind, "path, cycle, star, wheel or all_to_all");
    graph->add_option("--n", n, "Number of agents");
    graph->add_option("--weight", weight, "Edge weight");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(c);
        if (*analyze) return cmd_analyze(c);
        if (*sweep) return cmd_sweep(c, parameter, grid);
        if (*cascade) return cmd_cascade(c, trials, max_magnitude);
        if (*reproduce) return cmd_reproduce(c, ids, trials);
        if (*graph) return cmd_graph(c, kind, n, weight);
    } catch (const std::exception& e) {
        const char* kind_name = dynamic_cast<const ol::SchemaError*>(&e)       ? "schema"
                                : dynamic_cast<const ol::HypothesisError*>(&e) ? "hypothesis"
                                : dynamic_cast<const ol::NumericalError*>(&e)  ? "numerical"
                                : dynamic_cast<const std::invalid_argument*>(&e) ? "parameter"
                                                                                 : "error";
        std::cerr << json{{"error", kind_name}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}
