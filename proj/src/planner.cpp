#include "ccmp/planner.hpp"

#include <chrono>

namespace ccmp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PhaseRun {
    PlanStatus status{PlanStatus::infeasible_after_max_iter};
    Trajectory trajectory;
    RiskAllocation allocation;
    std::vector<double> risks;
    std::vector<double> margins;
    ConflictSet conflicts;
    int iterations{0};
};

bool within_bounds(const std::vector<double>& risks, const RiskAllocation& alloc) {
    for (std::size_t i = 0; i < risks.size(); ++i) {
        if (risks[i] > alloc.delta[i]) return false;
    }
    return true;
}

std::vector<double> estimate_risks(const Trajectory& traj, const PlanQuery& query, const World& world) {
    const BeliefTrajectory belief = propagate(traj, query.noise, world.arm, world.weights);
    return world.estimator.estimate(belief);
}

// Planning-phase loop from zero conflicts under an initial allocation.
PhaseRun run_phase(const Trajectory& seed, RiskAllocation alloc, const PlanQuery& query, const World& world,
                   const PlannerParams& params, bool risk_loop) {
    PhaseRun run;
    run.allocation = std::move(alloc);
    run.trajectory = seed;
    const int n = seed.size();
    for (int iter = 0; iter < query.max_iterations; ++iter) {
        run.iterations = iter + 1;
        run.margins = waypoint_margins(n, run.conflicts, params.optimizer);
        try {
            run.trajectory = optimize_with_margins(seed, run.margins, world.arm, world.env, params.optimizer);
        } catch (const OptimizerInfeasible&) {
            run.status = PlanStatus::infeasible_after_max_iter;
            return run;
        }
        const std::vector<int> bad_edges = unsafe_edges(run.trajectory, world.arm, world.env);
        if (!bad_edges.empty()) {
            for (int e : bad_edges) {
                if (e > 0) run.conflicts.add(e, params.allocation.d_step);
                if (e + 1 < n - 1) run.conflicts.add(e + 1, params.allocation.d_step);
            }
            continue;
        }
        run.risks = estimate_risks(run.trajectory, query, world);
        if (!risk_loop || within_bounds(run.risks, run.allocation)) {
            run.status = PlanStatus::success;
            return run;
        }
        for (int i = 1; i + 1 < n; ++i) {
            if (run.risks[i] > run.allocation.delta[i]) run.conflicts.add(i, params.allocation.d_step);
        }
        run.allocation = reallocate(run.risks, run.allocation, params.allocation);
    }
    run.status = PlanStatus::infeasible_after_max_iter;
    return run;
}

struct Seeded {
    std::optional<Trajectory> seed;
    PlanResult result;
};

Seeded seed_or_fail(const PlanQuery& query, const World& world, const PlannerParams& params) {
    Seeded s;
    if (query.start.size() != world.arm.dof() || query.goal.size() != world.arm.dof()) {
        throw std::invalid_argument("query dimension does not match arm");
    }
    if (!(query.delta > 0.0 && query.delta < 1.0)) throw std::invalid_argument("chance constraint must lie in (0, 1)");
    const auto path = world.roadmap.query(world.arm, world.env, query.start, query.goal);
    if (!path) {
        s.result.status = PlanStatus::seed_failure;
        return s;
    }
    s.seed = interpolate(*path, params.waypoint_spacing, params.dt);
    return s;
}

PlanResult to_result(PhaseRun run) {
    PlanResult r;
    r.status = run.status;
    r.trajectory = std::move(run.trajectory);
    r.allocation = std::move(run.allocation);
    r.risks = std::move(run.risks);
    r.margins = std::move(run.margins);
    r.conflicts = std::move(run.conflicts);
    r.iterations = run.iterations;
    if (!r.risks.empty()) r.additive_risk = trajectory_risk(r.risks).additive;
    return r;
}

PlanResult plan_impl(const PlanQuery& query, const World& world, const PlannerParams& params, bool risk_loop) {
    const auto t0 = Clock::now();
    Seeded s = seed_or_fail(query, world, params);
    if (!s.seed) {
        s.result.planning_seconds = seconds_since(t0);
        return s.result;
    }
    PlanResult r = to_result(
        run_phase(*s.seed, uniform_allocation(query.delta, s.seed->size()), query, world, params, risk_loop));
    r.planning_seconds = seconds_since(t0);
    return r;
}

}  // namespace

std::string to_string(PlanStatus status) {
    switch (status) {
        case PlanStatus::success: return "success";
        case PlanStatus::seed_failure: return "seed_failure";
        case PlanStatus::infeasible_after_max_iter: return "infeasible_after_max_iter";
    }
    return "unknown";
}

PlanResult plan(const PlanQuery& query, const World& world, const PlannerParams& params) {
    return plan_impl(query, world, params, params.risk_loop);
}

PlanResult plan_baseline(const PlanQuery& query, const World& world, const PlannerParams& params) {
    return plan_impl(query, world, params, false);
}

PlanResult plan_and_refine(const PlanQuery& query, const World& world, const PlannerParams& params) {
    PlanResult result = plan(query, world, params);
    if (!result.ok() || !params.risk_loop) return result;
    const auto t0 = Clock::now();
    const Trajectory seed = interpolate(*world.roadmap.query(world.arm, world.env, query.start, query.goal),
                                        params.waypoint_spacing, params.dt);

    Resolver resolver;
    resolver.solve = [&](const std::vector<double>& margins) -> std::optional<Solution> {
        Trajectory traj;
        try {
            traj = optimize_with_margins(seed, margins, world.arm, world.env, params.optimizer);
        } catch (const OptimizerInfeasible&) {
            return std::nullopt;
        }
        if (!edge_safe(traj, world.arm, world.env)) return std::nullopt;
        auto risks = estimate_risks(traj, query, world);
        return Solution{std::move(traj), std::move(risks)};
    };
    resolver.plan = [&](const RiskAllocation& alloc) -> std::optional<PhaseOutcome> {
        PhaseRun run = run_phase(seed, alloc, query, world, params, true);
        if (run.status != PlanStatus::success) return std::nullopt;
        return PhaseOutcome{{std::move(run.trajectory), std::move(run.risks)}, std::move(run.allocation),
                            std::move(run.margins)};
    };

    const PhaseOutcome feasible{{result.trajectory, result.risks}, result.allocation, result.margins};
    const IraResult refined =
        ira(resolver, [](const Trajectory& t) { return squared_displacement(t.waypoints); }, feasible,
            params.allocation);

    result.refined = true;
    result.pre_ira_trajectory = result.trajectory;
    result.pre_ira_risks = result.risks;
    result.ira_iterations = refined.iterations;
    result.ira_objective_trace = refined.objective_trace;
    result.trajectory = refined.solution.trajectory;
    result.risks = refined.solution.risks;
    result.allocation = refined.allocation;
    result.margins = refined.margins;
    result.additive_risk = trajectory_risk(result.risks).additive;
    result.refine_seconds = seconds_since(t0);
    return result;
}

PrefilterResult prefilter(const PlanQuery& query, const World& world, const PlannerParams& params) {
    const int d = world.arm.dof();
    query.noise.validate();
    Eigen::VectorXd start_sigma(d);
    for (int j = 0; j < d; ++j) {
        start_sigma[j] = std::sqrt(std::max(0.0, query.noise.initial_cov(pos_index(j), pos_index(j))));
    }
    const Trajectory line = interpolate({query.start, query.goal}, params.waypoint_spacing, params.dt);
    const BeliefTrajectory belief = propagate(line, query.noise, world.arm, world.weights);

    PrefilterResult out;
    out.start_risk = world.estimator.estimate(WaypointBelief{query.start, start_sigma}, 0);
    out.goal_risk = world.estimator.estimate(WaypointBelief{query.goal, belief.sigma.back()}, 1);
    const double threshold = params.prefilter_factor * query.delta;
    out.verdict = out.start_risk > threshold || out.goal_risk > threshold ? PrefilterVerdict::likely_infeasible
                                                                         : PrefilterVerdict::feasible_candidate;
    return out;
}

}  // namespace ccmp
