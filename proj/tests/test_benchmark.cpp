#include "ccmp/benchmark.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace ccmp;
using namespace ccmp::testing;

namespace {

BenchmarkRow row(int q, PlanStatus base, double base_rate, PlanStatus status, double rate, bool sat, int iters,
                 int ira_iters) {
    BenchmarkRow r;
    r.query = q;
    r.baseline_status = base;
    r.baseline.continuous_rate = base_rate;
    r.baseline.satisfied_continuous = base_rate <= 0.15;
    r.status = status;
    r.post_ira.continuous_rate = rate;
    r.post_ira.satisfied_continuous = sat;
    r.pre_ira.mean_path_length = 3.0;
    r.post_ira.mean_path_length = 2.0;
    r.iterations = iters;
    r.ira_iterations = ira_iters;
    r.planning_seconds = 1.0;
    return r;
}

}  // namespace

TEST_CASE("summary aggregates") {
    const auto ok = PlanStatus::success;
    const auto fail = PlanStatus::infeasible_after_max_iter;
    std::vector<BenchmarkRow> rows{
        row(0, ok, 0.3, ok, 0.1, true, 2, 1),
        row(1, ok, 0.2, ok, 0.2, false, 4, 0),
        row(2, fail, 0.0, ok, 0.05, true, 1, 0),
        row(3, ok, 0.5, fail, 0.0, false, 20, 0),
    };
    BenchmarkRow skipped;
    skipped.query = 4;
    skipped.prefiltered_out = true;
    rows.push_back(skipped);

    const BenchmarkSummary s = summarize(rows);
    CHECK(s.n_queries == 5);
    CHECK(s.n_prefiltered_out == 1);
    CHECK(s.n_success == 3);
    CHECK(s.n_baseline_success == 3);
    CHECK(s.n_paired == 2);
    CHECK(s.baseline_rate == doctest::Approx(0.25));
    CHECK(s.planner_rate == doctest::Approx(0.15));
    CHECK(s.risk_reduction == doctest::Approx(0.10));
    CHECK(s.satisfaction_rate == doctest::Approx(2.0 / 3.0));
    CHECK(s.baseline_satisfaction_rate == doctest::Approx(0.0));
    CHECK(s.mean_iterations_satisfied == doctest::Approx(1.5));
    CHECK(s.mean_iterations_violated == doctest::Approx(4.0));
    CHECK(s.n_ira_active == 1);
    CHECK(s.ira_length_before == 3.0);
    CHECK(s.ira_length_after == 2.0);

    const auto j = to_json(s);
    CHECK(j.at("n_paired") == 2);
}

TEST_CASE("CSV layout") {
    std::vector<BenchmarkRow> rows{BenchmarkRow{}, BenchmarkRow{}};
    rows[1].query = 1;
    std::ostringstream out;
    write_csv(out, rows);
    std::istringstream in(out.str());
    std::string version, header, line;
    std::getline(in, version);
    std::getline(in, header);
    CHECK(version == "# ccmp-benchmark v1");
    const auto columns = std::count(header.begin(), header.end(), ',') + 1;
    CHECK(columns == 25);
    int data = 0;
    while (std::getline(in, line)) {
        ++data;
        CHECK(std::count(line.begin(), line.end(), ',') + 1 == columns);
    }
    CHECK(data == 2);
}

TEST_CASE("small benchmark run is ordered and deterministic") {
    Scenario s = standard_scenario();
    s.roadmap.n_nodes = 300;
    const Roadmap rm = Roadmap::build(s.arm, s.env, s.roadmap);
    const RiskEstimator est(EstimatorKind::quadrature, s.arm, s.env);
    const World world{s.arm, s.env, rm, est, LqrWeights::identity(3)};
    QueryGenerationSpec spec;
    spec.count = 3;
    const auto queries = generate_queries(s, world, spec);
    BenchmarkOptions opts;
    opts.n_executions = 20;
    opts.seed = 4;
    const auto a = run_benchmark(s, world, queries, opts);
    opts.workers = 2;
    const auto b = run_benchmark(s, world, queries, opts);
    REQUIRE(a.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(a[i].query == i);
        CHECK(b[i].query == i);
        CHECK(a[i].status == b[i].status);
        CHECK(a[i].post_ira.continuous_rate == b[i].post_ira.continuous_rate);
        CHECK(a[i].baseline.continuous_rate == b[i].baseline.continuous_rate);
    }
}

// Plans that end up violating the threshold are expected to have needed more
// planning iterations. Measured at desk scale this does not hold reliably.
TEST_CASE("violating plans needed more planning iterations" * doctest::may_fail()) {
    Scenario s = standard_scenario();
    const Roadmap rm = Roadmap::build(s.arm, s.env, s.roadmap);
    const RiskEstimator est(EstimatorKind::quadrature, s.arm, s.env);
    const World world{s.arm, s.env, rm, est, LqrWeights::identity(3)};
    QueryGenerationSpec spec;
    spec.count = 20;
    spec.seed = 3;
    BenchmarkOptions opts;
    opts.seed = 3;
    opts.run_ira = false;
    const BenchmarkSummary sum = summarize(run_benchmark(s, world, generate_queries(s, world, spec), opts));
    REQUIRE(sum.n_success > 0);
    CHECK(sum.mean_iterations_satisfied < sum.mean_iterations_violated);
}
