#pragma once

#include "opinionlab/dynamics.hpp"
#include "opinionlab/io.hpp"
#include "opinionlab/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opinionlab {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct FigureReport {
    std::string id;
    std::vector<Check> checks;
    std::vector<Table> tables;
    /// (file name, SVG document).
    std::vector<std::pair<std::string, std::string>> plots;
    /// Scenario documents the recipe ran, by name; each loads with load_scenario.
    std::vector<std::pair<std::string, nlohmann::json>> configs;
    nlohmann::json summary = nlohmann::json::object();
    double seconds = 0.0;

    bool passed() const;
    /// nullptr when absent.
    const Check* find(std::string_view name) const;
};

struct RecipeOptions {
    std::uint64_t seed = 20210601;
    /// > 0 overrides every recipe's step size.
    double dt = 0.0;
    /// > 0 overrides the Monte-Carlo trials per bin (fig9_scaled).
    int trials = 0;
};

std::vector<std::string> recipe_ids();
/// Throws ParameterError for an unknown id.
FigureReport reproduce(std::string_view id, const RecipeOptions& opts = {});

/// Agreement-regime cascade thresholds along w_max for y_th = 0.1 and 0.2
/// (bisection on the input magnitude to 1e-3).
std::pair<CascadeThreshold, CascadeThreshold> fig9_thresholds(const RecipeOptions& opts = {});

/// Writes tables (CSV), plots (SVG), bundled configs and report.json.
void write_report(const FigureReport& report, const std::filesystem::path& dir);

struct InvariantReport {
    /// max over recorded states of max_i |sum_j z_ij|.
    double row_sum_drift = 0.0;
    double max_abs = 0.0;
    /// Bound on max |z_ij| from the saturation, attention and input bounds.
    double bound = 0.0;
    bool ok() const { return row_sum_drift < 1e-8 && max_abs <= bound * (1.0 + 1e-12); }
};

InvariantReport check_invariants(const ScenarioConfig& cfg, const Trajectory& traj);

/// "neutral equilibrium", "consensus", "agreement", "clustered dissensus" or
/// "disagreement".
std::string describe_state(const Eigen::MatrixXd& z, double strong_threshold);

/// Classification, clusters (agent numbers from 1), prediction and spectral
/// data for a finished run.
nlohmann::json run_summary(const ScenarioConfig& cfg, const Trajectory& traj, double seconds);

/// u*, regime, pattern and centrality vectors and hypothesis diagnostics.
nlohmann::json prediction_record(const ModelParams& p);

nlohmann::json spectral_record(const AdjacencySpec& a);

}  // namespace opinionlab
