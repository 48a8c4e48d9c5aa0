#include "ccmp/scenario.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ccmp;
using namespace ccmp::testing;

TEST_CASE("built-in scenarios") {
    const Scenario s = standard_scenario();
    CHECK(s.arm.dof() == 3);
    CHECK(s.env.obstacles().size() == 6);
    CHECK(s.delta == 0.1);
    CHECK(s.dt == 0.3);
    const Scenario six = arm6_scenario();
    CHECK(six.arm.dof() == 6);
    double reach3 = 0.0, reach6 = 0.0;
    for (double l : s.arm.link_lengths()) reach3 += l;
    for (double l : six.arm.link_lengths()) reach6 += l;
    CHECK(reach6 == doctest::Approx(reach3));
    CHECK(builtin_scenario("arm6").arm.dof() == 6);
    CHECK_THROWS_AS((void)builtin_scenario("nope"), std::invalid_argument);
    // The home configuration of the arm is collision-free in the standard scene.
    CHECK_FALSE(in_collision(s.arm, s.env, config({0.0, 0.0, 0.0})));
}

TEST_CASE("JSON round trip") {
    Scenario s = standard_scenario();
    s.delta = 0.07;
    s.allocation.alpha = 0.6;
    s.roadmap.n_nodes = 321;
    s.training.hidden = {32, 32};
    s.queries.push_back({config({0.1, 0.2, 0.3}), config({-0.1, -0.2, -0.3})});
    const Scenario back = scenario_from_json(to_json(s));
    CHECK(back.name == s.name);
    CHECK(back.delta == 0.07);
    CHECK(back.allocation.alpha == 0.6);
    CHECK(back.roadmap.n_nodes == 321);
    CHECK(back.training.hidden == std::vector<int>{32, 32});
    REQUIRE(back.queries.size() == 1);
    CHECK(back.queries[0].goal == s.queries[0].goal);
    CHECK(back.arm.link_lengths() == s.arm.link_lengths());
    CHECK(back.env.obstacles().size() == s.env.obstacles().size());
    CHECK(to_json(back) == to_json(s));

    const auto file = std::filesystem::temp_directory_path() / "ccmp_test_scenario.json";
    save_scenario(file, s);
    CHECK(to_json(load_scenario(file)) == to_json(s));
    CHECK(to_json(resolve_scenario(file.string())) == to_json(s));
    std::filesystem::remove(file);
    CHECK(resolve_scenario("standard").name == "standard");
}

TEST_CASE("schema errors") {
    nlohmann::json j = to_json(standard_scenario());
    SUBCASE("version") {
        j["schema_version"] = 99;
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
    SUBCASE("missing arm") {
        j.erase("arm");
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
    SUBCASE("delta out of range") {
        j["delta"] = 1.2;
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
    SUBCASE("bad estimator") {
        j["estimator"] = "oracle";
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
    SUBCASE("query of the wrong dimension") {
        j["queries"] = nlohmann::json::array({{{"start", {0.0, 0.0}}, {"goal", {0.0, 0.0}}}});
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
    SUBCASE("wrong type") {
        j["delta"] = "small";
        CHECK_THROWS_AS((void)scenario_from_json(j), std::invalid_argument);
    }
}

TEST_CASE("environment JSON") {
    const Environment env = standard_scenario().env;
    const Environment back = environment_from_json(environment_to_json(env));
    REQUIRE(back.obstacles().size() == env.obstacles().size());
    std::mt19937_64 rng(1);
    const Capsule cap{{0.2, 0.3}, {0.9, -0.2}, 0.03};
    for (std::size_t i = 0; i < env.obstacles().size(); ++i) {
        CHECK(back.obstacles()[i].id() == env.obstacles()[i].id());
        CHECK(signed_distance(cap, back.obstacles()[i]) == signed_distance(cap, env.obstacles()[i]));
    }
}

TEST_CASE("query generation") {
    Scenario s = standard_scenario();
    s.roadmap.n_nodes = 300;
    const Roadmap rm = Roadmap::build(s.arm, s.env, s.roadmap);
    const RiskEstimator est(EstimatorKind::quadrature, s.arm, s.env);
    const World world{s.arm, s.env, rm, est, LqrWeights::identity(3)};
    QueryGenerationSpec spec;
    spec.count = 10;
    const auto a = generate_queries(s, world, spec);
    const auto b = generate_queries(s, world, spec);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].start == b[i].start);
        CHECK(a[i].goal == b[i].goal);
        CHECK_FALSE(in_collision(s.arm, s.env, a[i].start));
        CHECK_FALSE(in_collision(s.arm, s.env, a[i].goal));
        CHECK((a[i].start - a[i].goal).norm() >= spec.min_separation);
        CHECK(prefilter(s.make_query(a[i]), world, s.planner_params()).verdict ==
              PrefilterVerdict::feasible_candidate);
    }
    spec.seed = 8;
    CHECK(generate_queries(s, world, spec)[0].start != a[0].start);
    spec.min_separation = 100.0;
    spec.max_attempts = 50;
    CHECK_THROWS_AS((void)generate_queries(s, world, spec), SamplingCapExceeded);
}
