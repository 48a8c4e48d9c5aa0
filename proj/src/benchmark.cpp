#include "ccmp/benchmark.hpp"

#include "ccmp/parallel.hpp"

#include <iomanip>
#include <ostream>

namespace ccmp {

BenchmarkRow run_query(const Scenario& scenario, const World& world, const QueryPair& pair, int index,
                       const BenchmarkOptions& options) {
    BenchmarkRow row;
    row.query = index;
    const PlannerParams params = scenario.planner_params();
    const PlanQuery query = scenario.make_query(pair);
    const PrefilterResult pf = prefilter(query, world, params);
    row.start_risk = pf.start_risk;
    row.goal_risk = pf.goal_risk;
    if (pf.verdict == PrefilterVerdict::likely_infeasible) {
        row.prefiltered_out = true;
        return row;
    }
    // Common random numbers: every variant of a query sees the same noise streams.
    const std::uint64_t eval_seed = substream(options.seed, static_cast<std::uint64_t>(index))();
    auto run_eval = [&](const Trajectory& t) {
        return evaluate(t, query.noise, world.arm, world.env, world.weights, options.n_executions, query.delta,
                        eval_seed);
    };

    if (options.run_baseline) {
        const PlanResult base = plan_baseline(query, world, params);
        row.baseline_status = base.status;
        if (base.ok()) {
            row.baseline = run_eval(base.trajectory);
            row.baseline_length = path_length(base.trajectory.waypoints);
        }
    }

    const PlanResult res = options.run_ira ? plan_and_refine(query, world, params) : plan(query, world, params);
    row.status = res.status;
    row.iterations = res.iterations;
    row.planning_seconds = res.planning_seconds;
    row.additive_risk = res.additive_risk;
    if (res.ok()) {
        row.nominal_length = path_length(res.trajectory.waypoints);
        row.post_ira = run_eval(res.trajectory);
        row.pre_ira = res.refined ? run_eval(res.pre_ira_trajectory) : row.post_ira;
        row.ira_iterations = res.ira_iterations;
        row.refine_seconds = res.refine_seconds;
    }
    return row;
}

std::vector<BenchmarkRow> run_benchmark(const Scenario& scenario, const World& world,
                                        const std::vector<QueryPair>& queries, const BenchmarkOptions& options) {
    std::vector<BenchmarkRow> rows(queries.size());
    parallel_for(queries.size(), options.workers, [&](std::size_t i) {
        rows[i] = run_query(scenario, world, queries[i], static_cast<int>(i), options);
    });
    return rows;
}

BenchmarkSummary summarize(const std::vector<BenchmarkRow>& rows) {
    BenchmarkSummary s;
    s.n_queries = static_cast<int>(rows.size());
    double base_sum = 0.0, plan_sum = 0.0, time_sum = 0.0;
    int sat = 0, base_sat = 0, n_sat = 0, n_vio = 0;
    double it_sat = 0.0, it_vio = 0.0;
    for (const auto& r : rows) {
        if (r.prefiltered_out) {
            ++s.n_prefiltered_out;
            continue;
        }
        const bool ok = r.status == PlanStatus::success;
        const bool base_ok = r.baseline_status == PlanStatus::success;
        s.n_baseline_success += base_ok;
        if (base_ok) base_sat += r.baseline.satisfied_continuous;
        if (!ok) continue;
        ++s.n_success;
        time_sum += r.planning_seconds;
        if (r.post_ira.satisfied_continuous) {
            ++sat;
            ++n_sat;
            it_sat += r.iterations;
        } else {
            ++n_vio;
            it_vio += r.iterations;
        }
        if (base_ok) {
            ++s.n_paired;
            base_sum += r.baseline.continuous_rate;
            plan_sum += r.post_ira.continuous_rate;
        }
        if (r.ira_iterations >= 1) {
            ++s.n_ira_active;
            s.ira_length_before += r.pre_ira.mean_path_length;
            s.ira_length_after += r.post_ira.mean_path_length;
            s.ira_satisfaction_before += r.pre_ira.satisfied_continuous;
            s.ira_satisfaction_after += r.post_ira.satisfied_continuous;
        }
    }
    if (s.n_paired > 0) {
        s.baseline_rate = base_sum / s.n_paired;
        s.planner_rate = plan_sum / s.n_paired;
        s.risk_reduction = s.baseline_rate - s.planner_rate;
    }
    if (s.n_success > 0) {
        s.satisfaction_rate = static_cast<double>(sat) / s.n_success;
        s.mean_planning_seconds = time_sum / s.n_success;
    }
    if (s.n_baseline_success > 0) s.baseline_satisfaction_rate = static_cast<double>(base_sat) / s.n_baseline_success;
    if (n_sat > 0) s.mean_iterations_satisfied = it_sat / n_sat;
    if (n_vio > 0) s.mean_iterations_violated = it_vio / n_vio;
    if (s.n_ira_active > 0) {
        s.ira_length_before /= s.n_ira_active;
        s.ira_length_after /= s.n_ira_active;
        s.ira_satisfaction_before /= s.n_ira_active;
        s.ira_satisfaction_after /= s.n_ira_active;
    }
    return s;
}

void write_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
    out << "# ccmp-benchmark v" << kBenchmarkCsvVersion << '\n';
    out << "query,prefiltered_out,start_risk,goal_risk,baseline_status,baseline_length,baseline_discrete_rate,"
           "baseline_continuous_rate,baseline_satisfied,status,iterations,planning_seconds,additive_risk,"
           "nominal_length,pre_ira_length,pre_ira_discrete_rate,pre_ira_continuous_rate,pre_ira_satisfied,"
           "ira_iterations,refine_seconds,executed_length,discrete_rate,continuous_rate,satisfied_discrete,"
           "satisfied_continuous\n";
    out << std::setprecision(10);
    for (const auto& r : rows) {
        out << r.query << ',' << r.prefiltered_out << ',' << r.start_risk << ',' << r.goal_risk << ','
            << to_string(r.baseline_status) << ',' << r.baseline_length << ',' << r.baseline.discrete_rate << ','
            << r.baseline.continuous_rate << ',' << r.baseline.satisfied_continuous << ',' << to_string(r.status)
            << ',' << r.iterations << ',' << r.planning_seconds << ',' << r.additive_risk << ',' << r.nominal_length
            << ',' << r.pre_ira.mean_path_length << ',' << r.pre_ira.discrete_rate << ','
            << r.pre_ira.continuous_rate << ',' << r.pre_ira.satisfied_continuous << ',' << r.ira_iterations << ','
            << r.refine_seconds << ',' << r.post_ira.mean_path_length << ',' << r.post_ira.discrete_rate << ','
            << r.post_ira.continuous_rate << ',' << r.post_ira.satisfied_discrete << ','
            << r.post_ira.satisfied_continuous << '\n';
    }
}

nlohmann::json to_json(const BenchmarkSummary& s) {
    return {{"schema_version", kBenchmarkCsvVersion},
            {"n_queries", s.n_queries},
            {"n_prefiltered_out", s.n_prefiltered_out},
            {"n_success", s.n_success},
            {"n_baseline_success", s.n_baseline_success},
            {"n_paired", s.n_paired},
            {"baseline_continuous_rate", s.baseline_rate},
            {"planner_continuous_rate", s.planner_rate},
            {"risk_reduction", s.risk_reduction},
            {"satisfaction_rate", s.satisfaction_rate},
            {"baseline_satisfaction_rate", s.baseline_satisfaction_rate},
            {"mean_iterations_satisfied", s.mean_iterations_satisfied},
            {"mean_iterations_violated", s.mean_iterations_violated},
            {"mean_planning_seconds", s.mean_planning_seconds},
            {"n_ira_active", s.n_ira_active},
            {"ira_length_before", s.ira_length_before},
            {"ira_length_after", s.ira_length_after},
            {"ira_satisfaction_before", s.ira_satisfaction_before},
            {"ira_satisfaction_after", s.ira_satisfaction_after}};
}

}  // namespace ccmp
