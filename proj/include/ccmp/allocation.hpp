#pragma once

// Per-waypoint risk bounds: uniform split of the joint chance constraint,
// constraint classification, planning-phase reallocation and the
// execution-phase iterative risk allocation (IRA) loop.

#include "ccmp/trajectory.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ccmp {

struct RiskAllocation {
    std::vector<double> delta;  // per-waypoint bounds
    double total{0.0};          // joint chance constraint

    [[nodiscard]] double sum() const;
    [[nodiscard]] int size() const noexcept { return static_cast<int>(delta.size()); }
};

struct AllocationParams {
    double alpha{0.7};
    double eta{-1.0};        // <= 0 selects total / (5 N)
    double epsilon{1e-3};    // rad^2
    double d_step{0.05};     // m
    int max_ira_iterations{10};

    [[nodiscard]] double eta_for(const RiskAllocation& alloc) const;
    /// Throws std::invalid_argument when alpha is outside (0,1) or epsilon/d_step are not positive.
    void validate() const;
};

/// delta_i = total / n. Throws std::invalid_argument unless total in (0,1) and n >= 1.
[[nodiscard]] RiskAllocation uniform_allocation(double total, int n_waypoints);

enum class ConstraintClass { violated, active, inactive };

/// violated iff delta - r < 0, active iff 0 <= delta - r <= eta, inactive otherwise.
[[nodiscard]] ConstraintClass classify(double delta, double risk, double eta);

/// Moves budget from inactive to violated waypoints. Identity when nothing is violated.
[[nodiscard]] RiskAllocation reallocate(std::span<const double> risks, const RiskAllocation& alloc,
                                        const AllocationParams& params);

/// A re-solved nominal trajectory with its per-waypoint risk estimates.
struct Solution {
    Trajectory trajectory;
    std::vector<double> risks;
};

/// Result of a full planning phase run under a prescribed initial allocation.
struct PhaseOutcome {
    Solution solution;
    RiskAllocation allocation;    // final (possibly reallocated) bounds
    std::vector<double> margins;  // per-waypoint safety margins used by the final solve
};

/// Planning-phase hooks used by the execution-phase loop.
struct Resolver {
    /// One optimize + propagate + estimate pass at the given per-waypoint margins.
    /// Empty when the solve fails (infeasible or not collision-free).
    std::function<std::optional<Solution>(const std::vector<double>& margins)> solve;
    /// Full planning phase from zero conflicts under the given allocation.
    /// Empty unless every waypoint ends within its bound.
    std::function<std::optional<PhaseOutcome>(const RiskAllocation& alloc)> plan;
};

struct ActiveResult {
    int count{0};
    std::vector<double> risks;  // from the last relaxed solve (unchanged input if none ran)
};

/// Shrinks every margin by d_step (floored at zero) and re-solves until at
/// least one waypoint exceeds its bound or no margin is left to relax.
[[nodiscard]] ActiveResult active_constraints(const Resolver& resolver, std::span<const double> risks,
                                              const RiskAllocation& alloc, std::vector<double> margins,
                                              const AllocationParams& params);

struct IraResult {
    Solution solution;
    RiskAllocation allocation;
    std::vector<double> margins;
    int iterations{0};                 // completed reallocation rounds
    std::vector<double> objective_trace;  // objective of every accepted re-solve, starting with the input
};

/// Iterative risk allocation. Returns the lowest-objective risk-feasible
/// solution seen, falling back to the input.
[[nodiscard]] IraResult ira(const Resolver& resolver, const std::function<double(const Trajectory&)>& objective,
                            const PhaseOutcome& feasible, const AllocationParams& params);

}  // namespace ccmp
