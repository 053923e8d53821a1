#include "opinionlab/scenario.hpp"

#include "opinionlab/analysis.hpp"
#include "opinionlab/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace opinionlab {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw SchemaError(where + ": unknown field '" + it.key() + "'");
        }
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where + ": expected a number");
    return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

Eigen::VectorXd vector_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw SchemaError(where + ": expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = number(v[i], where + "[" + std::to_string(i) + "]");
    return out;
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty() || !v[0].is_array()) {
        throw SchemaError(where + ": expected a non-empty list of rows");
    }
    const std::size_t cols = v[0].size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != cols) throw SchemaError(w + ": ragged matrix row");
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = number(v[i][j], w);
    }
    return out;
}

/// Scalar broadcast to n entries, or an explicit per-agent array.
Eigen::VectorXd per_agent(const json& v, int n, const std::string& where) {
    if (v.is_number()) return Eigen::VectorXd::Constant(n, v.get<double>());
    Eigen::VectorXd out = vector_of(v, where);
    if (out.size() != n) {
        throw SchemaError(where + ": expected " + std::to_string(n) + " entries, got " +
                          std::to_string(out.size()));
    }
    return out;
}

/// Input document: per-agent list (two-option shorthand, lifted to (b, -b))
/// or an n x N_o matrix.
Eigen::MatrixXd inputs_of(const json& v, int n, int m, const std::string& where) {
    if (v.is_array() && !v.empty() && v[0].is_number()) {
        if (m != 2) throw SchemaError(where + ": per-agent input lists need n_options = 2");
        return lift_two_option(per_agent(v, n, where));
    }
    Eigen::MatrixXd b = matrix_of(v, where);
    if (b.rows() != n || b.cols() != m) {
        throw SchemaError(where + ": input matrix must be " + std::to_string(n) + " x " +
                          std::to_string(m));
    }
    return b;
}

Eigen::MatrixXd opinions_of(const json& v, int n, int m, const std::string& where) {
    if (v.is_array() && !v.empty() && v[0].is_number()) {
        if (m != 2) throw SchemaError(where + ": per-agent opinion lists need n_options = 2");
        return lift_two_option(per_agent(v, n, where));
    }
    Eigen::MatrixXd z = matrix_of(v, where);
    if (z.rows() != n || z.cols() != m) {
        throw SchemaError(where + ": opinion matrix must be " + std::to_string(n) + " x " +
                          std::to_string(m));
    }
    return z;
}

Partition partition_of(const json& v, int n, const std::string& where) {
    if (!v.is_array()) throw SchemaError(where + ": expected a list of agent lists");
    Partition p;
    for (const auto& cell : v) {
        if (!cell.is_array()) throw SchemaError(where + ": expected a list of agent lists");
        std::vector<int> c;
        for (const auto& i : cell) {
            if (!i.is_number_integer()) throw SchemaError(where + ": agent indices must be integers");
            c.push_back(i.get<int>());
        }
        p.push_back(std::move(c));
    }
    try {
        validate_partition(p, n);
    } catch (const ParameterError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    return p;
}

SaturationSpec saturation_of(const json& v, const std::string& where) {
    if (v.is_string()) {
        switch (parse_saturation_family(v.get<std::string>())) {
        case SaturationFamily::odd_tanh: return SaturationSpec::odd_tanh();
        case SaturationFamily::asymmetric_logistic: return SaturationSpec::asymmetric_logistic();
        case SaturationFamily::custom_table:
            throw SchemaError(where + ": custom_table needs the object form with y and s");
        }
    }
    check_keys(v, {"family", "k", "k1", "k2", "y", "s"}, where);
    if (!v.contains("family") || !v.at("family").is_string()) {
        throw SchemaError(where + ": missing string field 'family'");
    }
    switch (parse_saturation_family(v.at("family").get<std::string>())) {
    case SaturationFamily::odd_tanh: return SaturationSpec::odd_tanh(number_or(v, "k", 1.0, where));
    case SaturationFamily::asymmetric_logistic:
        return SaturationSpec::asymmetric_logistic(number_or(v, "k1", 0.8, where),
                                                   number_or(v, "k2", 1.2, where));
    case SaturationFamily::custom_table: {
        if (!v.contains("y") || !v.contains("s")) throw SchemaError(where + ": custom_table needs y and s");
        const Eigen::VectorXd y = vector_of(v.at("y"), where + ".y");
        const Eigen::VectorXd s = vector_of(v.at("s"), where + ".s");
        return SaturationSpec::custom_table(std::vector<double>(y.data(), y.data() + y.size()),
                                            std::vector<double>(s.data(), s.data() + s.size()));
    }
    }
    throw SchemaError(where + ": unknown saturation family");
}

std::vector<double> grid_of(const json& v, const std::string& where) {
    if (v.is_array()) {
        const Eigen::VectorXd g = vector_of(v, where);
        return std::vector<double>(g.data(), g.data() + g.size());
    }
    check_keys(v, {"start", "stop", "count"}, where);
    if (!v.contains("start") || !v.contains("stop") || !v.contains("count")) {
        throw SchemaError(where + ": range form needs start, stop and count");
    }
    const double a = number(v.at("start"), where), b = number(v.at("stop"), where);
    const int count = v.at("count").get<int>();
    if (count < 1) throw SchemaError(where + ": count must be >= 1");
    std::vector<double> g;
    for (int k = 0; k < count; ++k) g.push_back(count == 1 ? a : a + (b - a) * k / (count - 1));
    return g;
}

AttentionParams attention_of(const json& v) {
    const std::string w = "attention";
    check_keys(v, {"tau_u", "n_hill", "y_th", "u_low", "u_high", "abar"}, w);
    AttentionParams ap;
    ap.tau_u = number_or(v, "tau_u", ap.tau_u, w);
    ap.n_hill = number_or(v, "n_hill", ap.n_hill, w);
    ap.y_th = number_or(v, "y_th", ap.y_th, w);
    ap.u_low = number_or(v, "u_low", ap.u_low, w);
    ap.u_high = number_or(v, "u_high", ap.u_high, w);
    if (v.contains("abar")) ap.abar = matrix_of(v.at("abar"), w + ".abar");
    ap.validate();
    return ap;
}

CouplingFeedbackParams coupling_of(const json& v, int n) {
    const std::string w = "coupling";
    check_keys(v, {"sigma", "tau_gamma", "tau_delta", "gamma_f", "delta_f", "g_gamma", "g_delta",
                   "partition", "sigma_switches", "inter_weights"},
               w);
    CouplingFeedbackParams cp;
    if (v.contains("sigma")) cp.sigma = v.at("sigma").get<int>();
    cp.tau_gamma = number_or(v, "tau_gamma", cp.tau_gamma, w);
    cp.tau_delta = number_or(v, "tau_delta", cp.tau_delta, w);
    cp.gamma_f = number_or(v, "gamma_f", cp.gamma_f, w);
    cp.delta_f = number_or(v, "delta_f", cp.delta_f, w);
    cp.g_gamma = number_or(v, "g_gamma", cp.g_gamma, w);
    cp.g_delta = number_or(v, "g_delta", cp.g_delta, w);
    if (!v.contains("partition")) throw SchemaError(w + ": missing field 'partition'");
    cp.partition = partition_of(v.at("partition"), n, w + ".partition");
    if (v.contains("sigma_switches")) {
        for (const auto& s : v.at("sigma_switches")) {
            if (!s.is_array() || s.size() != 2) {
                throw SchemaError(w + ".sigma_switches: entries are [time, sigma] pairs");
            }
            cp.sigma_switches.emplace_back(number(s[0], w + ".sigma_switches"), s[1].get<int>());
        }
    }
    if (v.contains("inter_weights")) cp.inter_weights = matrix_of(v.at("inter_weights"), w + ".inter_weights");
    cp.validate(n);
    return cp;
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    json r = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(v(i));
    return r;
}

AdjacencySpec parse_graph(const nlohmann::json& doc) {
    check_keys(doc, {"kind", "n", "weight", "matrix"}, "graph");
    if (doc.contains("matrix")) {
        if (doc.contains("n") || doc.contains("weight")) {
            throw SchemaError("graph: 'matrix' excludes 'n' and 'weight'");
        }
        if (doc.contains("kind") && doc.at("kind") != "custom") {
            throw SchemaError("graph: an explicit matrix must have kind 'custom'");
        }
        return AdjacencySpec(matrix_of(doc.at("matrix"), "graph.matrix"));
    }
    if (!doc.contains("kind") || !doc.at("kind").is_string() || !doc.contains("n")) {
        throw SchemaError("graph: need either 'matrix' or 'kind' and 'n'");
    }
    if (!doc.at("n").is_number_integer()) throw SchemaError("graph.n: expected an integer");
    return build_graph(parse_graph_kind(doc.at("kind").get<std::string>()), doc.at("n").get<int>(),
                       number_or(doc, "weight", 1.0, "graph"));
}

nlohmann::json graph_to_json(const AdjacencySpec& a) {
    return json{{"kind", "custom"}, {"matrix", matrix_to_json(a.entries())}};
}

double ScenarioConfig::resolved_strong_threshold() const {
    if (strong_threshold > 0.0) return strong_threshold;
    if (attention) return std::sqrt(attention->y_th);
    return 0.5;
}

namespace {

ScenarioConfig parse_unchecked(const json& doc, std::optional<std::uint64_t> seed_override) {
    check_keys(doc, {"name", "graph", "n_options", "model", "saturation", "inputs", "schedule",
                     "initial", "attention", "coupling", "integration", "seed", "output",
                     "analysis"},
               "scenario");
    ScenarioConfig cfg;
    if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();
    if (!doc.contains("graph")) throw SchemaError("scenario: missing field 'graph'");
    cfg.graph = parse_graph(doc.at("graph"));
    const int n = cfg.graph.n_agents();
    const int m = doc.contains("n_options") ? doc.at("n_options").get<int>() : 2;
    if (m < 2) throw SchemaError("n_options must be at least 2");

    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer()) throw SchemaError("seed: expected an integer");
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (seed_override) cfg.seed = *seed_override;
    std::mt19937_64 rng(cfg.seed);

    // Saturations default to tanh for two options and to the asymmetric
    // logistic otherwise.
    SaturationSpec s1 = m == 2 ? SaturationSpec::odd_tanh() : SaturationSpec::asymmetric_logistic();
    SaturationSpec s2 = s1;
    if (doc.contains("saturation")) {
        const json& s = doc.at("saturation");
        check_keys(s, {"s1", "s2"}, "saturation");
        if (s.contains("s1")) s1 = saturation_of(s.at("s1"), "saturation.s1");
        if (s.contains("s2")) s2 = saturation_of(s.at("s2"), "saturation.s2");
    }

    Eigen::MatrixXd b_raw = Eigen::MatrixXd::Zero(n, m);
    if (doc.contains("inputs")) b_raw = inputs_of(doc.at("inputs"), n, m, "inputs");

    const json model = doc.contains("model") ? doc.at("model") : json::object();
    check_keys(model, {"d", "u", "alpha", "beta", "gamma", "delta", "Gamma", "Delta"}, "model");
    if (model.contains("gamma") && model.contains("Gamma")) {
        throw SchemaError("model: give either 'gamma' (times the graph) or 'Gamma', not both");
    }
    if (model.contains("delta") && model.contains("Delta")) {
        throw SchemaError("model: give either 'delta' (times the graph) or 'Delta', not both");
    }
    const bool scalar = [&] {
        for (const char* k : {"d", "u", "alpha", "beta", "gamma", "delta"}) {
            if (model.contains(k) && !model.at(k).is_number()) return false;
        }
        return !model.contains("Gamma") && !model.contains("Delta");
    }();
    if (scalar) {
        HomogeneousGains g;
        g.d = number_or(model, "d", 1.0, "model");
        g.u = number_or(model, "u", 0.0, "model");
        g.alpha = number_or(model, "alpha", 0.0, "model");
        g.beta = number_or(model, "beta", 0.0, "model");
        g.gamma = number_or(model, "gamma", 1.0, "model");
        g.delta = number_or(model, "delta", 0.0, "model");
        cfg.model = ModelParams::homogeneous(cfg.graph, m, g, b_raw, s1, s2);
    } else {
        auto vec = [&](const char* key, double fallback) {
            return model.contains(key) ? per_agent(model.at(key), n, std::string("model.") + key)
                                       : Eigen::VectorXd::Constant(n, fallback);
        };
        auto mat = [&](const char* big, const char* small, double fallback) -> Eigen::MatrixXd {
            if (model.contains(big)) return matrix_of(model.at(big), std::string("model.") + big);
            return number_or(model, small, fallback, "model") * cfg.graph.entries();
        };
        cfg.model = ModelParams::make(vec("d", 1.0), vec("u", 0.0), vec("alpha", 0.0), vec("beta", 0.0),
                                      mat("Gamma", "gamma", 1.0), mat("Delta", "delta", 0.0), b_raw, s1,
                                      s2);
        cfg.model.graph = cfg.graph;
    }

    cfg.schedule.add(0.0, cfg.model.b_raw, "initial inputs");
    if (doc.contains("schedule")) {
        const json& sch = doc.at("schedule");
        if (!sch.is_array()) throw SchemaError("schedule: expected a list of segments");
        for (std::size_t k = 0; k < sch.size(); ++k) {
            const std::string w = "schedule[" + std::to_string(k) + "]";
            check_keys(sch[k], {"t", "inputs", "tag"}, w);
            if (!sch[k].contains("t") || !sch[k].contains("inputs")) {
                throw SchemaError(w + ": segments need 't' and 'inputs'");
            }
            const double t = number(sch[k].at("t"), w + ".t");
            if (!(t > 0.0)) throw SchemaError(w + ".t: segments after the first must start at t > 0");
            cfg.schedule.add(t, inputs_of(sch[k].at("inputs"), n, m, w + ".inputs"),
                             sch[k].value("tag", "input switch"));
        }
    }

    if (doc.contains("attention")) cfg.attention = attention_of(doc.at("attention"));
    if (doc.contains("coupling")) cfg.coupling = coupling_of(doc.at("coupling"), n);

    // Initial state.
    Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(n, m);
    const json init = doc.contains("initial") ? doc.at("initial") : json::object();
    check_keys(init, {"z", "uniform", "normal", "u", "gamma", "delta"}, "initial");
    const int sources = init.contains("z") + init.contains("uniform") + init.contains("normal");
    if (sources > 1) throw SchemaError("initial: give at most one of 'z', 'uniform', 'normal'");
    if (init.contains("z")) {
        z0 = opinions_of(init.at("z"), n, m, "initial.z");
    } else if (init.contains("uniform") || init.contains("normal")) {
        const bool uni = init.contains("uniform");
        const Eigen::VectorXd pr = vector_of(init.at(uni ? "uniform" : "normal"),
                                             uni ? "initial.uniform" : "initial.normal");
        if (pr.size() != 2 || (uni && !(pr(1) > pr(0))) || (!uni && !(pr(1) > 0.0))) {
            throw SchemaError(uni ? "initial.uniform: expected [low, high] with low < high"
                                  : "initial.normal: expected [mean, standard deviation > 0]");
        }
        std::uniform_real_distribution<double> U(pr(0), pr(1));
        std::normal_distribution<double> N(pr(0), pr(1));
        // Two options: draw x_i and lift; otherwise draw every entry and centre.
        if (m == 2) {
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i) x(i) = uni ? U(rng) : N(rng);
            z0 = lift_two_option(x);
        } else {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) z0(i, j) = uni ? U(rng) : N(rng);
            }
        }
    }
    z0 = project_rows(z0);
    cfg.initial = initial_state(cfg.system(), z0);
    if (init.contains("u")) {
        if (!cfg.attention) throw SchemaError("initial.u needs an 'attention' block");
        cfg.initial.u = per_agent(init.at("u"), n, "initial.u");
    }
    for (const char* k : {"gamma", "delta"}) {
        if (!init.contains(k)) continue;
        if (!cfg.coupling) throw SchemaError(std::string("initial.") + k + " needs a 'coupling' block");
        (std::string(k) == "gamma" ? cfg.initial.gamma : cfg.initial.delta) =
            per_agent(init.at(k), n, std::string("initial.") + k);
    }

    if (doc.contains("integration")) {
        const json& in = doc.at("integration");
        check_keys(in, {"t_end", "dt", "record_stride", "steady_tol"}, "integration");
        cfg.t_end = number_or(in, "t_end", cfg.t_end, "integration");
        cfg.integration.dt = number_or(in, "dt", cfg.integration.dt, "integration");
        cfg.integration.steady_tol = number_or(in, "steady_tol", 0.0, "integration");
        if (in.contains("record_stride")) cfg.integration.record_stride = in.at("record_stride").get<int>();
    }
    if (!(cfg.t_end > 0.0) || !(cfg.integration.dt > 0.0) || cfg.integration.record_stride < 1) {
        throw SchemaError("integration: t_end and dt must be positive and record_stride >= 1");
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        check_keys(o, {"dir", "svg"}, "output");
        if (o.contains("dir")) cfg.output_dir = o.at("dir").get<std::string>();
        if (o.contains("svg")) cfg.svg = o.at("svg").get<bool>();
    }

    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        check_keys(a, {"strong_threshold", "clusters", "sweep", "cascade"}, "analysis");
        cfg.strong_threshold = number_or(a, "strong_threshold", 0.0, "analysis");
        if (a.contains("clusters")) cfg.clusters = partition_of(a.at("clusters"), n, "analysis.clusters");
        if (a.contains("sweep")) {
            const json& s = a.at("sweep");
            check_keys(s, {"parameter", "grid", "seeds", "w", "presettle_time"}, "analysis.sweep");
            SweepConfig sc;
            if (s.contains("parameter")) sc.parameter = s.at("parameter").get<std::string>();
            if (sc.parameter != "u" && sc.parameter != "b-scale") {
                throw SchemaError("analysis.sweep.parameter: expected 'u' or 'b-scale'");
            }
            if (!s.contains("grid")) throw SchemaError("analysis.sweep: missing field 'grid'");
            sc.grid = grid_of(s.at("grid"), "analysis.sweep.grid");
            if (s.contains("seeds")) {
                for (const auto& z : s.at("seeds")) sc.seeds.push_back(opinions_of(z, n, m, "analysis.sweep.seeds"));
            }
            if (sc.seeds.empty()) sc.seeds.push_back(Eigen::MatrixXd::Zero(n, m));
            if (s.contains("w")) sc.w = per_agent(s.at("w"), n, "analysis.sweep.w");
            sc.presettle_time = number_or(s, "presettle_time", 0.0, "analysis.sweep");
            cfg.sweep = std::move(sc);
        }
        if (a.contains("cascade")) {
            const json& c = a.at("cascade");
            check_keys(c, {"trials", "magnitude_bins", "alignment_bins", "max_magnitude", "orientation",
                           "t_end", "dt", "cascade_hold", "u0"},
                       "analysis.cascade");
            CascadeStudyOptions co;
            if (c.contains("trials")) co.trials = c.at("trials").get<int>();
            if (c.contains("magnitude_bins")) co.magnitude_bins = c.at("magnitude_bins").get<int>();
            if (c.contains("alignment_bins")) co.alignment_bins = c.at("alignment_bins").get<int>();
            co.max_magnitude = number_or(c, "max_magnitude", co.max_magnitude, "analysis.cascade");
            co.orientation = number_or(c, "orientation", co.orientation, "analysis.cascade");
            co.cascade.t_end = number_or(c, "t_end", co.cascade.t_end, "analysis.cascade");
            co.cascade.dt = number_or(c, "dt", co.cascade.dt, "analysis.cascade");
            co.cascade.cascade_hold = number_or(c, "cascade_hold", 0.0, "analysis.cascade");
            co.cascade.u0 = number_or(c, "u0", -1.0, "analysis.cascade");
            co.cascade.strong_threshold = cfg.strong_threshold;
            co.seed = cfg.seed;
            cfg.cascade = co;
        }
    }
    return cfg;
}

}  // namespace

ScenarioConfig parse_scenario(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override) {
    try {
        return parse_unchecked(doc, seed_override);
    } catch (const json::exception& e) {
        // Type mismatches surfaced by the JSON library.
        throw SchemaError(e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    try {
        return parse_scenario(doc, seed_override);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

}  // namespace opinionlab
