#pragma once

// Batch evaluation over planning queries: deterministic baseline versus the
// chance-constrained planner (before and after risk reallocation), each
// executed under noise.

#include "ccmp/planner.hpp"
#include "ccmp/scenario.hpp"
#include "ccmp/sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace ccmp {

inline constexpr int kBenchmarkCsvVersion = 1;

struct BenchmarkOptions {
    int n_executions{kDefaultExecutions};
    std::uint64_t seed{0};
    int workers{1};
    bool run_baseline{true};
    bool run_ira{true};
};

struct BenchmarkRow {
    int query{0};
    bool prefiltered_out{false};
    double start_risk{0.0};
    double goal_risk{0.0};

    PlanStatus baseline_status{PlanStatus::seed_failure};
    ExecutionStats baseline;
    double baseline_length{0.0};

    PlanStatus status{PlanStatus::seed_failure};
    int iterations{0};
    double planning_seconds{0.0};
    double additive_risk{0.0};
    double nominal_length{0.0};
    ExecutionStats pre_ira;   // executions of the planning-phase solution
    ExecutionStats post_ira;  // executions of the refined solution
    int ira_iterations{0};
    double refine_seconds{0.0};
};

struct BenchmarkSummary {
    int n_queries{0};
    int n_prefiltered_out{0};
    int n_success{0};
    int n_baseline_success{0};
    int n_paired{0};                 // both planners succeeded
    double baseline_rate{0.0};       // mean continuous collision rate, paired queries
    double planner_rate{0.0};        // same for the refined planner output
    double risk_reduction{0.0};      // baseline_rate - planner_rate
    double satisfaction_rate{0.0};   // successful plans meeting the 1.5 delta threshold (refined)
    double baseline_satisfaction_rate{0.0};
    double mean_iterations_satisfied{0.0};
    double mean_iterations_violated{0.0};
    double mean_planning_seconds{0.0};
    int n_ira_active{0};             // successful plans with >= 1 IRA iteration
    double ira_length_before{0.0};   // mean executed length over IRA-active plans
    double ira_length_after{0.0};
    double ira_satisfaction_before{0.0};
    double ira_satisfaction_after{0.0};
};

[[nodiscard]] BenchmarkRow run_query(const Scenario& scenario, const World& world, const QueryPair& pair, int index,
                                     const BenchmarkOptions& options);

/// Rows ordered by query index regardless of worker scheduling.
[[nodiscard]] std::vector<BenchmarkRow> run_benchmark(const Scenario& scenario, const World& world,
                                                      const std::vector<QueryPair>& queries,
                                                      const BenchmarkOptions& options);

[[nodiscard]] BenchmarkSummary summarize(const std::vector<BenchmarkRow>& rows);

void write_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);
[[nodiscard]] nlohmann::json to_json(const BenchmarkSummary& s);

}  // namespace ccmp
