#pragma once

#include "opinionlab/dynamics.hpp"
#include "opinionlab/feedback.hpp"
#include "opinionlab/graph.hpp"
#include "opinionlab/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace opinionlab {

struct SweepConfig {
    /// "u" or "b-scale".
    std::string parameter = "u";
    std::vector<double> grid;
    std::vector<Eigen::MatrixXd> seeds;
    /// Projection vector; empty selects the regime's centrality vector when
    /// one exists.
    Eigen::VectorXd w;
    double presettle_time = 0.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    AdjacencySpec graph{Eigen::MatrixXd::Zero(1, 1)};
    ModelParams model;
    std::optional<AttentionParams> attention;
    std::optional<CouplingFeedbackParams> coupling;
    /// Always starts at t = 0 with the model's inputs.
    InputSchedule schedule;
    SystemState initial;
    double t_end = 100.0;
    IntegrateOptions integration;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    bool svg = true;
    /// <= 0 selects sqrt(y_th) with attention and 0.5 otherwise.
    double strong_threshold = 0.0;
    Partition clusters;
    std::optional<SweepConfig> sweep;
    std::optional<CascadeStudyOptions> cascade;

    System system() const { return System{model, attention, coupling}; }
    double resolved_strong_threshold() const;
};

/// Validates the document against the schema (unknown keys are rejected with
/// SchemaError) and resolves random initial conditions from the seed;
/// seed_override replaces the document's seed.
ScenarioConfig parse_scenario(const nlohmann::json& doc,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ScenarioConfig load_scenario(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// Graph document: {"kind", "n", "weight"} or {"matrix": [[...], ...]}.
AdjacencySpec parse_graph(const nlohmann::json& doc);
nlohmann::json graph_to_json(const AdjacencySpec& a);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

}  // namespace opinionlab
