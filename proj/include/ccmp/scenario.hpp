#pragma once

// Experiment configuration: arm, environment, noise, chance constraint,
// solver parameters and planning queries, stored as versioned JSON.

#include "ccmp/allocation.hpp"
#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/lqg.hpp"
#include "ccmp/planner.hpp"
#include "ccmp/risk.hpp"
#include "ccmp/roadmap.hpp"
#include "ccmp/trajopt.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ccmp {

inline constexpr int kScenarioSchemaVersion = 1;

struct QueryPair {
    Configuration start;
    Configuration goal;
};

struct QueryGenerationSpec {
    int count{50};
    std::uint64_t seed{7};
    double min_separation{1.0};  // rad, joint-space distance between start and goal
    int max_attempts{100000};
};

struct Scenario {
    std::string name{"standard"};
    ArmModel arm = ArmModel::uniform({0.5, 0.4, 0.3}, 0.03, Vec2(0.0, 0.0), 2.9);
    Environment env;
    ObservationKind observation{ObservationKind::joint_encoders};
    double noise_std{kDefaultNoiseStd};
    double dt{0.3};
    double delta{0.1};
    EstimatorKind estimator{EstimatorKind::quadrature};
    int quadrature_points{2};
    int mc_samples{2000};
    int max_iterations{20};
    int n_executions{100};
    OptimizerParams optimizer;
    AllocationParams allocation;
    RoadmapParams roadmap;
    DatasetSpec dataset;
    TrainingOptions training;
    QueryGenerationSpec query_spec;
    std::vector<QueryPair> queries;

    [[nodiscard]] NoiseModel noise() const;
    [[nodiscard]] PlannerParams planner_params() const;
    [[nodiscard]] PlanQuery make_query(const QueryPair& q) const;
};

/// 3-link arm inside a ring of three circles and three squares.
[[nodiscard]] Scenario standard_scenario();
/// 6-link arm of the same reach in the same environment.
[[nodiscard]] Scenario arm6_scenario();
/// Looks up a built-in scenario by name ("standard", "arm6").
[[nodiscard]] Scenario builtin_scenario(const std::string& name);

[[nodiscard]] nlohmann::json to_json(const Scenario& s);
/// Throws std::invalid_argument on schema or consistency errors.
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j);

void save_scenario(const std::filesystem::path& file, const Scenario& s);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& file);

/// Built-in name or path to a JSON file.
[[nodiscard]] Scenario resolve_scenario(const std::string& name_or_path);

[[nodiscard]] nlohmann::json environment_to_json(const Environment& env);
[[nodiscard]] Environment environment_from_json(const nlohmann::json& j);

/// Random start/goal pairs that are collision-free, connect to the roadmap and
/// pass the prefilter. Throws SamplingCapExceeded past spec.max_attempts draws.
[[nodiscard]] std::vector<QueryPair> generate_queries(const Scenario& s, const World& world,
                                                      const QueryGenerationSpec& spec);

}  // namespace ccmp
