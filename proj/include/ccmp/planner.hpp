#pragma once

// Chance-constrained planning loop: roadmap seed, local optimization, belief
// propagation, per-waypoint risk test, conflict margins and reallocation,
// followed by optional execution-phase risk reallocation.

#include "ccmp/allocation.hpp"
#include "ccmp/lqg.hpp"
#include "ccmp/risk.hpp"
#include "ccmp/roadmap.hpp"
#include "ccmp/trajopt.hpp"

#include <string>

namespace ccmp {

struct PlanQuery {
    Configuration start;
    Configuration goal;
    double delta{0.1};
    NoiseModel noise;
    int max_iterations{20};
};

struct PlannerParams {
    OptimizerParams optimizer;
    AllocationParams allocation;
    double dt{0.3};
    double waypoint_spacing{kWaypointSpacing};
    double prefilter_factor{1.5};
    bool risk_loop{true};  // false: deterministic baseline
};

/// Borrowed references to the immutable planning inputs.
struct World {
    const ArmModel& arm;
    const Environment& env;
    const Roadmap& roadmap;
    const RiskEstimator& estimator;
    LqrWeights weights;
};

enum class PlanStatus { success, seed_failure, infeasible_after_max_iter };

[[nodiscard]] std::string to_string(PlanStatus status);

struct PlanResult {
    PlanStatus status{PlanStatus::seed_failure};
    Trajectory trajectory;
    RiskAllocation allocation;
    std::vector<double> risks;
    std::vector<double> margins;
    ConflictSet conflicts;
    int iterations{0};
    double planning_seconds{0.0};
    double additive_risk{0.0};

    // Filled by plan_and_refine.
    bool refined{false};
    Trajectory pre_ira_trajectory;
    std::vector<double> pre_ira_risks;
    int ira_iterations{0};
    std::vector<double> ira_objective_trace;  // squared displacement per IRA iterate, feasible solution first
    double refine_seconds{0.0};

    [[nodiscard]] bool ok() const noexcept { return status == PlanStatus::success; }
};

[[nodiscard]] PlanResult plan(const PlanQuery& query, const World& world, const PlannerParams& params);

/// plan followed by IRA on success, minimizing squared displacement.
[[nodiscard]] PlanResult plan_and_refine(const PlanQuery& query, const World& world, const PlannerParams& params);

/// plan with the risk loop disabled: edge-safe optimized seed only.
[[nodiscard]] PlanResult plan_baseline(const PlanQuery& query, const World& world, const PlannerParams& params);

enum class PrefilterVerdict { feasible_candidate, likely_infeasible };

struct PrefilterResult {
    PrefilterVerdict verdict{PrefilterVerdict::feasible_candidate};
    double start_risk{0.0};
    double goal_risk{0.0};
};

/// Start risk under the initial belief and goal risk under the terminal belief
/// of a straight-line nominal; likely_infeasible iff either exceeds
/// prefilter_factor * delta.
[[nodiscard]] PrefilterResult prefilter(const PlanQuery& query, const World& world, const PlannerParams& params);

}  // namespace ccmp
