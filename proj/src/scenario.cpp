#include "ccmp/scenario.hpp"

#include "ccmp/parallel.hpp"

#include <cmath>
#include <fstream>

namespace ccmp {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json point_to_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

Vec2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("point must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json arm_to_json(const ArmModel& arm) {
    return {{"link_lengths", arm.link_lengths()},
            {"link_radius", arm.link_radius()},
            {"base", point_to_json(arm.base())},
            {"joint_lower", vec_to_json(arm.lower())},
            {"joint_upper", vec_to_json(arm.upper())}};
}

ArmModel arm_from_json(const json& j) {
    return {j.at("link_lengths").get<std::vector<double>>(), j.at("link_radius").get<double>(),
            point_from_json(j.at("base")), vec_from_json(j.at("joint_lower")), vec_from_json(j.at("joint_upper"))};
}

std::string observation_name(ObservationKind k) {
    return k == ObservationKind::joint_encoders ? "joint_encoders" : "ee_pose";
}

ObservationKind parse_observation(const std::string& s) {
    if (s == "joint_encoders") return ObservationKind::joint_encoders;
    if (s == "ee_pose") return ObservationKind::ee_pose;
    throw std::invalid_argument("unknown observation model '" + s + "'");
}

// Six obstacles on a ring around the base: circles and squares alternating.
Environment standard_environment() {
    constexpr double ring = 0.7;
    constexpr double size = 0.15;  // circle radius, square half-diagonal
    const double pi = std::acos(-1.0);
    std::vector<Obstacle> obs;
    for (int k = 0; k < 6; ++k) {
        const double a = pi / 6.0 + k * pi / 3.0;
        const Vec2 c(ring * std::cos(a), ring * std::sin(a));
        if (k % 2 == 0) {
            obs.push_back({"c" + std::to_string(k / 2 + 1), Circle{c, size}});
        } else {
            std::vector<Vec2> pts;
            for (int m = 0; m < 4; ++m) {
                const double b = a + pi / 4.0 + m * pi / 2.0;
                pts.emplace_back(c.x() + size * std::cos(b), c.y() + size * std::sin(b));
            }
            obs.push_back({"p" + std::to_string(k / 2 + 1), ConvexPolygon{std::move(pts)}});
        }
    }
    return {std::move(obs), Bounds{{-1.6, -1.6}, {1.6, 1.6}}};
}

}  // namespace

NoiseModel Scenario::noise() const {
    return observation == ObservationKind::joint_encoders ? NoiseModel::joint_encoders(arm.dof(), noise_std, dt)
                                                          : NoiseModel::end_effector(arm.dof(), noise_std, dt);
}

PlannerParams Scenario::planner_params() const {
    PlannerParams p;
    p.optimizer = optimizer;
    p.allocation = allocation;
    p.dt = dt;
    return p;
}

PlanQuery Scenario::make_query(const QueryPair& q) const {
    return {q.start, q.goal, delta, noise(), max_iterations};
}

Scenario standard_scenario() {
    Scenario s;
    s.name = "standard";
    s.env = standard_environment();
    s.roadmap.seed = 1;
    return s;
}

Scenario arm6_scenario() {
    Scenario s = standard_scenario();
    s.name = "arm6";
    s.arm = ArmModel::uniform({0.30, 0.25, 0.20, 0.20, 0.15, 0.10}, 0.03, Vec2(0.0, 0.0), 2.9);
    return s;
}

Scenario builtin_scenario(const std::string& name) {
    if (name == "standard") return standard_scenario();
    if (name == "arm6") return arm6_scenario();
    throw std::invalid_argument("unknown built-in scenario '" + name + "'");
}

json environment_to_json(const Environment& env) {
    json obstacles = json::array();
    for (const auto& o : env.obstacles()) {
        if (const auto* c = std::get_if<Circle>(&o.shape())) {
            obstacles.push_back({{"id", o.id()}, {"circle", {{"center", point_to_json(c->center)}, {"radius", c->radius}}}});
        } else {
            json verts = json::array();
            for (const auto& v : std::get<ConvexPolygon>(o.shape()).vertices) verts.push_back(point_to_json(v));
            obstacles.push_back({{"id", o.id()}, {"polygon", verts}});
        }
    }
    return {{"bounds", {{"min", point_to_json(env.bounds().lo)}, {"max", point_to_json(env.bounds().hi)}}},
            {"obstacles", obstacles}};
}

Environment environment_from_json(const json& j) {
    Bounds b{point_from_json(j.at("bounds").at("min")), point_from_json(j.at("bounds").at("max"))};
    std::vector<Obstacle> obs;
    for (const auto& o : j.at("obstacles")) {
        const auto id = o.at("id").get<std::string>();
        if (o.contains("circle")) {
            obs.emplace_back(id, Circle{point_from_json(o["circle"].at("center")), o["circle"].at("radius").get<double>()});
        } else if (o.contains("polygon")) {
            ConvexPolygon poly;
            for (const auto& v : o["polygon"]) poly.vertices.push_back(point_from_json(v));
            obs.emplace_back(id, std::move(poly));
        } else {
            throw std::invalid_argument("obstacle '" + id + "' has no circle or polygon");
        }
    }
    return {std::move(obs), b};
}

json to_json(const Scenario& s) {
    json queries = json::array();
    for (const auto& q : s.queries) queries.push_back({{"start", vec_to_json(q.start)}, {"goal", vec_to_json(q.goal)}});
    const auto& o = s.optimizer;
    const auto& a = s.allocation;
    return {
        {"schema_version", kScenarioSchemaVersion},
        {"name", s.name},
        {"arm", arm_to_json(s.arm)},
        {"environment", environment_to_json(s.env)},
        {"noise", {{"observation", observation_name(s.observation)}, {"sigma", s.noise_std}, {"dt", s.dt}}},
        {"delta", s.delta},
        {"estimator", to_string(s.estimator)},
        {"quadrature_points", s.quadrature_points},
        {"mc_samples", s.mc_samples},
        {"max_iterations", s.max_iterations},
        {"n_executions", s.n_executions},
        {"optimizer",
         {{"base_margin", o.base_margin},
          {"margin_step", o.margin_step},
          {"penalty_weight", o.penalty_weight},
          {"penalty_growth", o.penalty_growth},
          {"max_outer_iterations", o.max_outer_iterations},
          {"max_inner_iterations", o.max_inner_iterations},
          {"tolerance", o.tolerance},
          {"feasibility_tol", o.feasibility_tol},
          {"margin_slack", o.margin_slack},
          {"edge_samples", o.edge_samples}}},
        {"allocation",
         {{"alpha", a.alpha},
          {"eta", a.eta},
          {"epsilon", a.epsilon},
          {"d_step", a.d_step},
          {"max_ira_iterations", a.max_ira_iterations}}},
        {"roadmap",
         {{"n_nodes", s.roadmap.n_nodes}, {"k_neighbors", s.roadmap.k_neighbors}, {"seed", s.roadmap.seed}}},
        {"dataset",
         {{"n_total", s.dataset.n_total},
          {"uniform_fraction", s.dataset.uniform_fraction},
          {"sigma_max", s.dataset.sigma_max},
          {"label_samples", s.dataset.label_samples}}},
        {"training",
         {{"hidden", s.training.hidden},
          {"epochs", s.training.epochs},
          {"batch_size", s.training.batch_size},
          {"learning_rate", s.training.learning_rate},
          {"holdout", s.training.holdout},
          {"seed", s.training.seed}}},
        {"query_generation",
         {{"count", s.query_spec.count},
          {"seed", s.query_spec.seed},
          {"min_separation", s.query_spec.min_separation},
          {"max_attempts", s.query_spec.max_attempts}}},
        {"queries", queries},
    };
}

Scenario scenario_from_json(const json& j) {
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kScenarioSchemaVersion) {
            throw std::invalid_argument("unsupported scenario schema version " + std::to_string(version));
        }
        Scenario s;
        s.name = j.value("name", s.name);
        s.arm = arm_from_json(j.at("arm"));
        s.env = environment_from_json(j.at("environment"));
        if (j.contains("noise")) {
            const auto& n = j["noise"];
            s.observation = parse_observation(n.value("observation", observation_name(s.observation)));
            s.noise_std = n.value("sigma", s.noise_std);
            s.dt = n.value("dt", s.dt);
        }
        s.delta = j.value("delta", s.delta);
        s.estimator = parse_estimator(j.value("estimator", to_string(s.estimator)));
        s.quadrature_points = j.value("quadrature_points", s.quadrature_points);
        s.mc_samples = j.value("mc_samples", s.mc_samples);
        s.max_iterations = j.value("max_iterations", s.max_iterations);
        s.n_executions = j.value("n_executions", s.n_executions);
        if (j.contains("optimizer")) {
            const auto& o = j["optimizer"];
            auto& p = s.optimizer;
            p.base_margin = o.value("base_margin", p.base_margin);
            p.margin_step = o.value("margin_step", p.margin_step);
            p.penalty_weight = o.value("penalty_weight", p.penalty_weight);
            p.penalty_growth = o.value("penalty_growth", p.penalty_growth);
            p.max_outer_iterations = o.value("max_outer_iterations", p.max_outer_iterations);
            p.max_inner_iterations = o.value("max_inner_iterations", p.max_inner_iterations);
            p.tolerance = o.value("tolerance", p.tolerance);
            p.feasibility_tol = o.value("feasibility_tol", p.feasibility_tol);
            p.margin_slack = o.value("margin_slack", p.margin_slack);
            p.edge_samples = o.value("edge_samples", p.edge_samples);
        }
        if (j.contains("allocation")) {
            const auto& a = j["allocation"];
            auto& p = s.allocation;
            p.alpha = a.value("alpha", p.alpha);
            p.eta = a.value("eta", p.eta);
            p.epsilon = a.value("epsilon", p.epsilon);
            p.d_step = a.value("d_step", p.d_step);
            p.max_ira_iterations = a.value("max_ira_iterations", p.max_ira_iterations);
        }
        if (j.contains("roadmap")) {
            const auto& r = j["roadmap"];
            s.roadmap.n_nodes = r.value("n_nodes", s.roadmap.n_nodes);
            s.roadmap.k_neighbors = r.value("k_neighbors", s.roadmap.k_neighbors);
            s.roadmap.seed = r.value("seed", s.roadmap.seed);
        }
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            s.dataset.n_total = d.value("n_total", s.dataset.n_total);
            s.dataset.uniform_fraction = d.value("uniform_fraction", s.dataset.uniform_fraction);
            s.dataset.sigma_max = d.value("sigma_max", s.dataset.sigma_max);
            s.dataset.label_samples = d.value("label_samples", s.dataset.label_samples);
        }
        if (j.contains("training")) {
            const auto& t = j["training"];
            s.training.hidden = t.value("hidden", s.training.hidden);
            s.training.epochs = t.value("epochs", s.training.epochs);
            s.training.batch_size = t.value("batch_size", s.training.batch_size);
            s.training.learning_rate = t.value("learning_rate", s.training.learning_rate);
            s.training.holdout = t.value("holdout", s.training.holdout);
            s.training.seed = t.value("seed", s.training.seed);
        }
        if (j.contains("query_generation")) {
            const auto& q = j["query_generation"];
            s.query_spec.count = q.value("count", s.query_spec.count);
            s.query_spec.seed = q.value("seed", s.query_spec.seed);
            s.query_spec.min_separation = q.value("min_separation", s.query_spec.min_separation);
            s.query_spec.max_attempts = q.value("max_attempts", s.query_spec.max_attempts);
        }
        for (const auto& q : j.value("queries", json::array())) {
            QueryPair p{vec_from_json(q.at("start")), vec_from_json(q.at("goal"))};
            if (p.start.size() != s.arm.dof() || p.goal.size() != s.arm.dof()) {
                throw std::invalid_argument("query dimension does not match arm");
            }
            s.queries.push_back(std::move(p));
        }
        if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
        if (s.noise_std < 0.0 || s.dt <= 0.0) throw std::invalid_argument("noise sigma/dt out of range");
        s.allocation.validate();
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
}

void save_scenario(const std::filesystem::path& file, const Scenario& s) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << to_json(s).dump(2) << '\n';
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(file.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

Scenario resolve_scenario(const std::string& name_or_path) {
    if (name_or_path == "standard" || name_or_path == "arm6") return builtin_scenario(name_or_path);
    return load_scenario(name_or_path);
}

std::vector<QueryPair> generate_queries(const Scenario& s, const World& world, const QueryGenerationSpec& spec) {
    std::vector<QueryPair> out;
    const PlannerParams params = s.planner_params();
    auto rng = substream(spec.seed, 0);
    int attempts = 0;
    while (static_cast<int>(out.size()) < spec.count) {
        if (++attempts > spec.max_attempts) throw SamplingCapExceeded("query generation cap exceeded");
        QueryPair q{sample_collision_free(world.arm, world.env, rng), sample_collision_free(world.arm, world.env, rng)};
        if ((q.start - q.goal).norm() < spec.min_separation) continue;
        if (!world.roadmap.connect(world.arm, world.env, q.start) || !world.roadmap.connect(world.arm, world.env, q.goal)) {
            continue;
        }
        if (prefilter(s.make_query(q), world, params).verdict != PrefilterVerdict::feasible_candidate) continue;
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace ccmp
