#include "ccmp/allocation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ccmp {

double RiskAllocation::sum() const { return std::accumulate(delta.begin(), delta.end(), 0.0); }

double AllocationParams::eta_for(const RiskAllocation& alloc) const {
    if (eta > 0.0) return eta;
    return alloc.total / (5.0 * std::max(1, alloc.size()));
}

void AllocationParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(d_step > 0.0)) throw std::invalid_argument("d_step must be positive");
    if (max_ira_iterations < 0) throw std::invalid_argument("max_ira_iterations must be non-negative");
}

RiskAllocation uniform_allocation(double total, int n_waypoints) {
    if (!(total > 0.0 && total < 1.0)) throw std::invalid_argument("chance constraint must lie in (0, 1)");
    if (n_waypoints < 1) throw std::invalid_argument("need at least one waypoint");
    return {std::vector<double>(n_waypoints, total / n_waypoints), total};
}

ConstraintClass classify(double delta, double risk, double eta) {
    const double slack = delta - risk;
    if (slack < 0.0) return ConstraintClass::violated;
    if (slack <= eta) return ConstraintClass::active;
    return ConstraintClass::inactive;
}

RiskAllocation reallocate(std::span<const double> risks, const RiskAllocation& alloc,
                          const AllocationParams& params) {
    if (static_cast<int>(risks.size()) != alloc.size()) throw std::invalid_argument("risk/allocation size mismatch");
    const double eta = params.eta_for(alloc);
    std::vector<int> violated;
    RiskAllocation out = alloc;
    for (int i = 0; i < alloc.size(); ++i) {
        switch (classify(alloc.delta[i], risks[i], eta)) {
            case ConstraintClass::violated: violated.push_back(i); break;
            case ConstraintClass::inactive:
                out.delta[i] = params.alpha * alloc.delta[i] + (1.0 - params.alpha) * risks[i];
                break;
            case ConstraintClass::active: break;
        }
    }
    if (violated.empty()) return alloc;
    double total_violation = 0.0;
    for (int i : violated) total_violation += risks[i] - alloc.delta[i];
    assert(total_violation > 0.0);
    const double residual = std::max(0.0, alloc.total - out.sum());
    for (int i : violated) out.delta[i] += residual * (risks[i] - alloc.delta[i]) / total_violation;
    return out;
}

ActiveResult active_constraints(const Resolver& resolver, std::span<const double> risks, const RiskAllocation& alloc,
                                std::vector<double> margins, const AllocationParams& params) {
    ActiveResult out{0, {risks.begin(), risks.end()}};
    for (;;) {
        bool relaxed = false;
        for (double& m : margins) {
            if (m > 0.0) {
                m = std::max(0.0, m - params.d_step);
                relaxed = true;
            }
        }
        if (!relaxed) return out;
        const auto sol = resolver.solve(margins);
        if (!sol) continue;
        if (static_cast<int>(sol->risks.size()) != alloc.size()) throw std::logic_error("re-solve changed waypoint count");
        out.risks = sol->risks;
        out.count = 0;
        for (int i = 0; i < alloc.size(); ++i) {
            if (out.risks[i] > alloc.delta[i]) ++out.count;
        }
        if (out.count > 0) return out;
    }
}

IraResult ira(const Resolver& resolver, const std::function<double(const Trajectory&)>& objective,
              const PhaseOutcome& feasible, const AllocationParams& params) {
    params.validate();
    IraResult best{feasible.solution, feasible.allocation, feasible.margins, 0, {}};
    double best_j = objective(feasible.solution.trajectory);
    best.objective_trace.push_back(best_j);

    PhaseOutcome current = feasible;
    double j_prev = best_j;
    for (int it = 0; it < params.max_ira_iterations; ++it) {
        const int n = current.allocation.size();
        const ActiveResult act =
            active_constraints(resolver, current.solution.risks, current.allocation, current.margins, params);
        if (act.count == 0 || act.count == n) break;

        RiskAllocation next = current.allocation;
        const double eta = params.eta_for(next);
        std::vector<int> active;
        for (int i = 0; i < n; ++i) {
            if (act.risks[i] > current.allocation.delta[i]) {
                active.push_back(i);
            } else if (next.delta[i] - current.solution.risks[i] > eta) {
                next.delta[i] = params.alpha * next.delta[i] + (1.0 - params.alpha) * current.solution.risks[i];
            }
        }
        const double residual = std::max(0.0, next.total - next.sum());
        for (int i : active) next.delta[i] += residual / static_cast<double>(active.size());

        const auto outcome = resolver.plan(next);
        ++best.iterations;
        if (!outcome) break;
        const double j = objective(outcome->solution.trajectory);
        best.objective_trace.push_back(j);
        if (j < best_j) {
            best_j = j;
            best.solution = outcome->solution;
            best.allocation = outcome->allocation;
            best.margins = outcome->margins;
        }
        current = *outcome;
        if (std::abs(j - j_prev) < params.epsilon) break;
        j_prev = j;
    }
    return best;
}

}  // namespace ccmp
