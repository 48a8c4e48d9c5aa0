// ccmp command-line front end: scenario, roadmap and dataset lifecycle,
// planning, simulation, benchmarking, model training and report plots.

#include "ccmp/benchmark.hpp"
#include "ccmp/scenario.hpp"
#include "ccmp/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

using namespace ccmp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string scenario{"standard"};
    std::uint64_t seed{0};
    bool seed_set{false};
    std::string out_dir{"ccmp_out"};
    std::string estimator;
    std::optional<double> delta;
    std::optional<double> noise_std;
    int workers{1};
    std::string model;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--scenario", f.scenario, "built-in scenario name or scenario JSON path");
    cmd->add_option("--seed", f.seed, "master seed")->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--estimator", f.estimator, "quadrature | learned | mc")
        ->check(CLI::IsMember({"quadrature", "learned", "mc", "monte_carlo"}));
    cmd->add_option("--delta", f.delta, "joint chance constraint");
    cmd->add_option("--noise-std", f.noise_std, "joint noise std (rad)");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--model", f.model, "risk model file for the learned estimator");
}

Scenario load(const CommonFlags& f) {
    Scenario s = resolve_scenario(f.scenario);
    if (!f.estimator.empty()) s.estimator = parse_estimator(f.estimator);
    if (f.delta) s.delta = *f.delta;
    if (f.noise_std) s.noise_std = *f.noise_std;
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("--delta must lie in (0, 1)");
    if (s.noise_std < 0.0) throw std::invalid_argument("--noise-std must be non-negative");
    return s;
}

fs::path out_dir(const CommonFlags& f) {
    fs::create_directories(f.out_dir);
    return f.out_dir;
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

/// Cached roadmap in the output directory, rebuilt when the key differs.
Roadmap roadmap_for(const Scenario& s, const fs::path& dir) {
    const fs::path file = dir / "roadmap.bin";
    const std::uint64_t key = roadmap_key(s.env, s.arm, s.roadmap);
    if (fs::exists(file)) {
        try {
            return Roadmap::load(file, key);
        } catch (const RoadmapError& e) {
            std::cerr << "roadmap cache stale (" << e.what() << "), rebuilding\n";
        }
    }
    Roadmap rm = Roadmap::build(s.arm, s.env, s.roadmap);
    rm.save(file, key);
    return rm;
}

/// Owns everything a World borrows.
struct Context {
    Scenario scenario;
    Roadmap roadmap;
    std::unique_ptr<RiskEstimator> estimator;

    [[nodiscard]] World world() const {
        return {scenario.arm, scenario.env, roadmap, *estimator, LqrWeights::identity(scenario.arm.dof())};
    }
};

std::unique_ptr<RiskEstimator> make_estimator(const Scenario& s, const std::string& model_path, std::uint64_t seed) {
    auto est = std::make_unique<RiskEstimator>(s.estimator, s.arm, s.env);
    switch (s.estimator) {
        case EstimatorKind::quadrature: est->with_rule(QuadratureRule::gauss_hermite(s.quadrature_points)); break;
        case EstimatorKind::monte_carlo: est->with_monte_carlo(s.mc_samples, seed); break;
        case EstimatorKind::learned:
            if (model_path.empty()) throw std::invalid_argument("--model is required for the learned estimator");
            est->with_model(std::make_shared<const RiskModel>(RiskModel::load(model_path)));
            break;
    }
    return est;
}

Context context(const CommonFlags& f) {
    Context c{load(f), Roadmap{}, nullptr};
    c.roadmap = roadmap_for(c.scenario, out_dir(f));
    c.estimator = make_estimator(c.scenario, f.model, f.seed);
    return c;
}

std::vector<QueryPair> queries_for(const Context& c, const CommonFlags& f, int count) {
    if (!c.scenario.queries.empty()) return c.scenario.queries;
    QueryGenerationSpec spec = c.scenario.query_spec;
    if (f.seed_set) spec.seed = f.seed;
    if (count > 0) spec.count = count;
    return generate_queries(c.scenario, c.world(), spec);
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json trajectory_json(const Trajectory& t) {
    json w = json::array();
    for (const auto& q : t.waypoints) w.push_back(vec_json(q));
    return {{"dt", t.dt}, {"waypoints", w}};
}

json stats_json(const ExecutionStats& s) {
    return {{"n_executions", s.n_executions},     {"discrete_rate", s.discrete_rate},
            {"continuous_rate", s.continuous_rate}, {"satisfied_discrete", s.satisfied_discrete},
            {"satisfied_continuous", s.satisfied_continuous}, {"mean_path_length", s.mean_path_length}};
}

json plan_json(const PlanResult& r) {
    return {{"status", to_string(r.status)},
            {"iterations", r.iterations},
            {"planning_seconds", r.planning_seconds},
            {"additive_risk", r.additive_risk},
            {"nominal_length", path_length(r.trajectory.waypoints)},
            {"risks", r.risks},
            {"bounds", r.allocation.delta},
            {"margins", r.margins},
            {"ira_iterations", r.ira_iterations},
            {"ira_objective_trace", r.ira_objective_trace},
            {"trajectory", trajectory_json(r.trajectory)}};
}

// ---------------------------------------------------------------------------
// SVG output

class Svg {
  public:
    Svg(double w, double h) : w_(w), h_(h) {}
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        body_ << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2 << "' stroke='" << stroke
              << "' stroke-width='" << width << "'/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << h << "' fill='" << fill
              << "'/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        body_ << "<polyline fill='none' stroke='" << stroke << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : pts) body_ << x << ',' << y << ' ';
        body_ << "'/>\n";
    }
    void path(const std::string& d, const std::string& fill) {
        body_ << "<path d='" << d << "' fill='" << fill << "' stroke='white'/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12, const std::string& anchor = "start") {
        body_ << "<text x='" << x << "' y='" << y << "' font-size='" << size << "' font-family='sans-serif' text-anchor='"
              << anchor << "'>" << s << "</text>\n";
    }
    void save(const fs::path& file) const {
        std::ofstream out(file);
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w_ << "' height='" << h_ << "'>\n"
            << "<rect width='100%' height='100%' fill='white'/>\n"
            << body_.str() << "</svg>\n";
    }

  private:
    double w_, h_;
    std::ostringstream body_;
};

std::string num(double v, int prec = 3) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

/// Per-waypoint risk estimates against their bounds.
void risk_profile_svg(const PlanResult& r, const fs::path& file) {
    const double W = 640, H = 360, L = 60, R = 20, T = 30, B = 40;
    Svg svg(W, H);
    const int n = static_cast<int>(r.risks.size());
    double ymax = 1e-6;
    for (int i = 0; i < n; ++i) ymax = std::max({ymax, r.risks[i], r.allocation.delta[i]});
    ymax *= 1.1;
    auto px = [&](int i) { return L + (W - L - R) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.5); };
    auto py = [&](double v) { return H - B - (H - T - B) * v / ymax; };
    svg.line(L, H - B, W - R, H - B, "black");
    svg.line(L, T, L, H - B, "black");
    std::vector<std::pair<double, double>> risk, bound;
    for (int i = 0; i < n; ++i) {
        risk.emplace_back(px(i), py(r.risks[i]));
        bound.emplace_back(px(i), py(r.allocation.delta[i]));
    }
    svg.polyline(bound, "#d62728");
    svg.polyline(risk, "#1f77b4");
    svg.text(W / 2, 18, "per-waypoint collision risk (blue) and bound (red)", 13, "middle");
    svg.text(W / 2, H - 8, "waypoint", 12, "middle");
    svg.text(L - 6, py(ymax / 1.1) + 4, num(ymax / 1.1), 10, "end");
    svg.text(L - 6, H - B + 4, "0", 10, "end");
    svg.save(file);
}

/// Baseline versus planner continuous collision rate per query.
void rates_svg(const std::vector<BenchmarkRow>& rows, const fs::path& file) {
    const double W = 720, H = 360, L = 50, R = 20, T = 30, B = 40;
    Svg svg(W, H);
    const int n = std::max<int>(1, static_cast<int>(rows.size()));
    const double slot = (W - L - R) / n;
    svg.line(L, H - B, W - R, H - B, "black");
    svg.line(L, T, L, H - B, "black");
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        const auto& r = rows[i];
        if (r.prefiltered_out) continue;
        const double x = L + i * slot;
        const double hb = (H - T - B) * r.baseline.continuous_rate;
        const double hp = (H - T - B) * r.post_ira.continuous_rate;
        if (r.baseline_status == PlanStatus::success) svg.rect(x + 0.1 * slot, H - B - hb, 0.4 * slot, hb, "#999999");
        if (r.status == PlanStatus::success) svg.rect(x + 0.5 * slot, H - B - hp, 0.4 * slot, hp, "#1f77b4");
    }
    svg.text(W / 2, 18, "continuous collision rate per query: baseline (grey), planner (blue)", 13, "middle");
    svg.text(W / 2, H - 8, "query", 12, "middle");
    svg.text(L - 6, T + 4, "1", 10, "end");
    svg.text(L - 6, H - B + 4, "0", 10, "end");
    svg.save(file);
}

/// Outcome breakdown pie.
void breakdown_svg(const std::vector<BenchmarkRow>& rows, const fs::path& file) {
    std::map<std::string, int> counts;
    for (const auto& r : rows) {
        if (r.prefiltered_out) {
            ++counts["prefiltered out"];
        } else if (r.status != PlanStatus::success) {
            ++counts[to_string(r.status)];
        } else {
            ++counts[r.post_ira.satisfied_continuous ? "satisfied" : "violated"];
        }
    }
    const std::vector<std::string> colors{"#2ca02c", "#d62728", "#ff7f0e", "#9467bd", "#8c564b"};
    const double W = 520, H = 320, cx = 160, cy = 170, rad = 120;
    Svg svg(W, H);
    svg.text(W / 2, 20, "outcome breakdown", 13, "middle");
    const double total = static_cast<double>(rows.size());
    double angle = -0.5 * std::acos(-1.0);
    int k = 0;
    for (const auto& [label, count] : counts) {
        const double sweep = 2.0 * std::acos(-1.0) * count / std::max(1.0, total);
        const std::string& c = colors[k % colors.size()];
        if (count == static_cast<int>(total)) {
            svg.path("M " + num(cx - rad, 6) + ' ' + num(cy, 6) + " a " + num(rad, 6) + ' ' + num(rad, 6) +
                         " 0 1 0 " + num(2 * rad, 6) + " 0 a " + num(rad, 6) + ' ' + num(rad, 6) + " 0 1 0 " +
                         num(-2 * rad, 6) + " 0",
                     c);
        } else {
            const double x1 = cx + rad * std::cos(angle), y1 = cy + rad * std::sin(angle);
            const double x2 = cx + rad * std::cos(angle + sweep), y2 = cy + rad * std::sin(angle + sweep);
            svg.path("M " + num(cx, 6) + ' ' + num(cy, 6) + " L " + num(x1, 6) + ' ' + num(y1, 6) + " A " +
                         num(rad, 6) + ' ' + num(rad, 6) + " 0 " + (sweep > std::acos(-1.0) ? "1" : "0") + " 1 " +
                         num(x2, 6) + ' ' + num(y2, 6) + " Z",
                     c);
        }
        svg.rect(320, 60 + 24 * k, 14, 14, c);
        svg.text(340, 72 + 24 * k, label + " (" + std::to_string(count) + ")");
        angle += sweep;
        ++k;
    }
    svg.save(file);
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

PlanStatus parse_status(const std::string& s) {
    for (auto st : {PlanStatus::success, PlanStatus::seed_failure, PlanStatus::infeasible_after_max_iter}) {
        if (to_string(st) == s) return st;
    }
    throw std::invalid_argument("unknown plan status '" + s + "'");
}

std::vector<BenchmarkRow> read_benchmark_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    if (line != "# ccmp-benchmark v" + std::to_string(kBenchmarkCsvVersion)) {
        throw std::invalid_argument(file.string() + ": unsupported CSV version line '" + line + "'");
    }
    std::getline(in, line);
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    std::vector<BenchmarkRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != header.size()) throw std::invalid_argument(file.string() + ": ragged row");
        auto d = [&](const char* name) { return std::stod(c.at(col.at(name))); };
        auto b = [&](const char* name) { return c.at(col.at(name)) == "1"; };
        BenchmarkRow r;
        r.query = static_cast<int>(d("query"));
        r.prefiltered_out = b("prefiltered_out");
        r.start_risk = d("start_risk");
        r.goal_risk = d("goal_risk");
        r.baseline_status = parse_status(c.at(col.at("baseline_status")));
        r.baseline_length = d("baseline_length");
        r.baseline.discrete_rate = d("baseline_discrete_rate");
        r.baseline.continuous_rate = d("baseline_continuous_rate");
        r.baseline.satisfied_continuous = b("baseline_satisfied");
        r.status = parse_status(c.at(col.at("status")));
        r.iterations = static_cast<int>(d("iterations"));
        r.planning_seconds = d("planning_seconds");
        r.additive_risk = d("additive_risk");
        r.nominal_length = d("nominal_length");
        r.pre_ira.mean_path_length = d("pre_ira_length");
        r.pre_ira.discrete_rate = d("pre_ira_discrete_rate");
        r.pre_ira.continuous_rate = d("pre_ira_continuous_rate");
        r.pre_ira.satisfied_continuous = b("pre_ira_satisfied");
        r.ira_iterations = static_cast<int>(d("ira_iterations"));
        r.refine_seconds = d("refine_seconds");
        r.post_ira.mean_path_length = d("executed_length");
        r.post_ira.discrete_rate = d("discrete_rate");
        r.post_ira.continuous_rate = d("continuous_rate");
        r.post_ira.satisfied_discrete = b("satisfied_discrete");
        r.post_ira.satisfied_continuous = b("satisfied_continuous");
        rows.push_back(r);
    }
    return rows;
}

void write_dataset_csv(const fs::path& file, const std::vector<TrainingSample>& data) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    const int d = data.empty() ? 0 : static_cast<int>(data[0].mean.size());
    for (int j = 0; j < d; ++j) out << "mean_" << j << ',';
    for (int j = 0; j < d; ++j) out << "sigma_" << j << ',';
    out << "label\n" << std::setprecision(17);
    for (const auto& s : data) {
        for (int j = 0; j < d; ++j) out << s.mean[j] << ',';
        for (int j = 0; j < d; ++j) out << s.sigma[j] << ',';
        out << s.label << '\n';
    }
}

std::vector<TrainingSample> read_dataset_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    if (header.empty() || header.back() != "label" || header.size() % 2 != 1) {
        throw std::invalid_argument(file.string() + ": not a dataset CSV");
    }
    const int d = static_cast<int>(header.size() / 2);
    std::vector<TrainingSample> data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (static_cast<int>(c.size()) != 2 * d + 1) throw std::invalid_argument(file.string() + ": ragged row");
        TrainingSample s{Eigen::VectorXd(d), Eigen::VectorXd(d), std::stod(c.back())};
        for (int j = 0; j < d; ++j) {
            s.mean[j] = std::stod(c[j]);
            s.sigma[j] = std::stod(c[d + j]);
        }
        data.push_back(std::move(s));
    }
    return data;
}

void emit_report(const std::vector<BenchmarkRow>& rows, const fs::path& dir) {
    const BenchmarkSummary sum = summarize(rows);
    write_json(dir / "summary.json", to_json(sum));
    rates_svg(rows, dir / "collision_rates.svg");
    breakdown_svg(rows, dir / "breakdown.svg");
    std::cout << std::fixed << std::setprecision(3) << "queries " << sum.n_queries << " (prefiltered out "
              << sum.n_prefiltered_out << "), planner successes " << sum.n_success << ", baseline successes "
              << sum.n_baseline_success << "\n"
              << "continuous collision rate: baseline " << sum.baseline_rate << ", planner " << sum.planner_rate
              << " (reduction " << sum.risk_reduction << ", " << sum.n_paired << " paired)\n"
              << "satisfaction at 1.5 delta: planner " << sum.satisfaction_rate << ", baseline "
              << sum.baseline_satisfaction_rate << "\n"
              << "mean iterations: satisfied " << sum.mean_iterations_satisfied << ", violated "
              << sum.mean_iterations_violated << "\n"
              << "IRA-active plans " << sum.n_ira_active << ": executed length " << sum.ira_length_before << " -> "
              << sum.ira_length_after << ", satisfaction " << sum.ira_satisfaction_before << " -> "
              << sum.ira_satisfaction_after << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ccmp: chance-constrained motion planning toolkit"};
    app.require_subcommand(1);

    CommonFlags f;
    int count = 0;
    int query_index = 0;
    int n_exec = -1;
    std::string input;

    auto* gen_env = app.add_subcommand("gen-env", "write the scenario (arm, environment, parameters) as JSON");
    add_common(gen_env, f);

    auto* gen_queries = app.add_subcommand("gen-queries", "sample collision-free, prefiltered start/goal pairs");
    add_common(gen_queries, f);
    gen_queries->add_option("--count", count, "number of queries")->check(CLI::PositiveNumber);

    auto* build_rm = app.add_subcommand("build-roadmap", "build and cache the roadmap");
    add_common(build_rm, f);

    auto* plan_cmd = app.add_subcommand("plan", "plan one query with risk reallocation and IRA");
    add_common(plan_cmd, f);
    plan_cmd->add_option("--query", query_index, "query index")->check(CLI::NonNegativeNumber);

    auto* sim_cmd = app.add_subcommand("simulate", "plan one query and execute it under noise");
    add_common(sim_cmd, f);
    sim_cmd->add_option("--query", query_index, "query index")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--executions", n_exec, "noisy executions")->check(CLI::PositiveNumber);

    auto* bench_cmd = app.add_subcommand("benchmark", "baseline vs planner over all queries");
    add_common(bench_cmd, f);
    bench_cmd->add_option("--count", count, "queries to generate when the scenario has none")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--executions", n_exec, "noisy executions per plan")->check(CLI::PositiveNumber);

    auto* train_cmd = app.add_subcommand("train-risk-model", "generate a labelled dataset and fit the regressor");
    add_common(train_cmd, f);
    train_cmd->add_option("--dataset", input, "existing dataset CSV to train on");
    train_cmd->add_option("--samples", count, "dataset size")->check(CLI::PositiveNumber);

    auto* report_cmd = app.add_subcommand("report", "recompute aggregates and plots from a benchmark CSV");
    add_common(report_cmd, f);
    report_cmd->add_option("--input", input, "benchmark CSV (default: <out-dir>/benchmark.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_env) {
            const Scenario s = load(f);
            const fs::path file = out_dir(f) / "scenario.json";
            save_scenario(file, s);
            std::cout << "wrote " << file.string() << " (" << s.arm.dof() << " joints, " << s.env.obstacles().size()
                      << " obstacles)\n";
        } else if (*gen_queries) {
            Context c = context(f);
            c.scenario.queries.clear();
            c.scenario.queries = queries_for(c, f, count);
            const fs::path file = out_dir(f) / "scenario.json";
            save_scenario(file, c.scenario);
            std::cout << "wrote " << c.scenario.queries.size() << " queries to " << file.string() << "\n";
        } else if (*build_rm) {
            const Scenario s = load(f);
            const fs::path dir = out_dir(f);
            const Roadmap rm = Roadmap::build(s.arm, s.env, s.roadmap);
            rm.save(dir / "roadmap.bin", roadmap_key(s.env, s.arm, s.roadmap));
            std::cout << "nodes " << rm.size() << ", edges " << rm.edge_count() << ", pruned " << rm.pruned_count()
                      << "; wrote " << (dir / "roadmap.bin").string() << "\n";
        } else if (*plan_cmd || *sim_cmd) {
            const Context c = context(f);
            const auto queries = queries_for(c, f, query_index + 1);
            if (query_index >= static_cast<int>(queries.size())) throw std::invalid_argument("--query out of range");
            const PlanQuery q = c.scenario.make_query(queries[query_index]);
            const PlanResult r = plan_and_refine(q, c.world(), c.scenario.planner_params());
            const fs::path dir = out_dir(f);
            json j = plan_json(r);
            if (r.ok()) risk_profile_svg(r, dir / "risk_profile.svg");
            std::cout << "status " << to_string(r.status) << ", iterations " << r.iterations << ", additive risk "
                      << r.additive_risk << ", IRA iterations " << r.ira_iterations << "\n";
            if (*sim_cmd && r.ok()) {
                const ExecutionStats st = evaluate(r.trajectory, q.noise, c.scenario.arm, c.scenario.env,
                                                   LqrWeights::identity(c.scenario.arm.dof()),
                                                   n_exec > 0 ? n_exec : c.scenario.n_executions, q.delta, f.seed,
                                                   f.workers);
                j["execution"] = stats_json(st);
                std::cout << "continuous collision rate " << st.continuous_rate << ", discrete " << st.discrete_rate
                          << ", satisfied " << (st.satisfied_continuous ? "yes" : "no") << "\n";
            }
            write_json(dir / (*sim_cmd ? "simulate.json" : "plan.json"), j);
        } else if (*bench_cmd) {
            const Context c = context(f);
            const auto queries = queries_for(c, f, count);
            BenchmarkOptions opts;
            opts.n_executions = n_exec > 0 ? n_exec : c.scenario.n_executions;
            opts.seed = f.seed;
            opts.workers = f.workers;
            const auto rows = run_benchmark(c.scenario, c.world(), queries, opts);
            const fs::path dir = out_dir(f);
            std::ofstream csv(dir / "benchmark.csv");
            write_csv(csv, rows);
            csv.close();
            emit_report(rows, dir);
        } else if (*train_cmd) {
            Scenario s = load(f);
            const fs::path dir = out_dir(f);
            std::vector<TrainingSample> data;
            if (!input.empty()) {
                data = read_dataset_csv(input);
            } else {
                if (count > 0) s.dataset.n_total = count;
                s.dataset.workers = f.workers;
                data = generate_training_set(s.arm, s.env, s.dataset, f.seed);
                write_dataset_csv(dir / "dataset.csv", data);
            }
            TrainingOptions opts = s.training;
            if (f.seed_set) opts.seed = f.seed;
            const int n = static_cast<int>(data.size());
            if (opts.holdout >= n / 2) opts.holdout = n / 10;
            const RiskModel model = train_risk_model(data, opts);
            model.save(dir / "risk_model.bin");
            const auto& h = model.history();
            // Held-out score recomputed from the reloaded model.
            const RiskModel reloaded = RiskModel::load(dir / "risk_model.bin");
            std::cout << "samples " << data.size() << ", best epoch " << h.best_epoch << ", held-out MSE " << h.val_mse
                      << ", R2 " << h.val_r2 << "\n";
            const RegressionScore all = score_model(reloaded, data);
            std::cout << "reloaded model on all samples: MSE " << all.mse << ", R2 " << all.r2 << "\n";
        } else if (*report_cmd) {
            const fs::path dir = out_dir(f);
            const fs::path file = input.empty() ? dir / "benchmark.csv" : fs::path(input);
            emit_report(read_benchmark_csv(file), dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
