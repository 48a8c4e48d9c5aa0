#include "ccmp/risk.hpp"
#include "ccmp/scenario.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ccmp;
using namespace ccmp::testing;

namespace {

const double kSqrtPi = std::sqrt(std::acos(-1.0));

// One unit link and a wedge whose near vertex sits at distance 0.5 on the ray
// at 0.5 rad: the arm collides iff q > 0.5 - asin(r / 0.5).
struct Wedge1D {
    ArmModel arm = ArmModel::uniform({1.0}, 0.02, Vec2(0, 0), 2.9);
    Environment env{{ray_wedge("w", 0.5, 0.5, 1.5, 1.0)}, Bounds{{-3, -3}, {3, 3}}};
    double boundary = 0.5 - std::asin(0.02 / 0.5);
};

}  // namespace

TEST_CASE("Gauss-Hermite rules") {
    const auto r2 = QuadratureRule::gauss_hermite(2);
    REQUIRE(r2.abscissas.size() == 2);
    CHECK(std::abs(r2.abscissas[0] + 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(r2.abscissas[1] - 1.0 / std::sqrt(2.0)) < 1e-12);
    for (double w : r2.weights) CHECK(std::abs(w - kSqrtPi / 2.0) < 1e-12);
    for (double u : r2.unit_nodes) CHECK(std::abs(std::abs(u) - 1.0) < 1e-12);
    for (double p : r2.probabilities) CHECK(std::abs(p - 0.5) < 1e-12);

    const auto r3 = QuadratureRule::gauss_hermite(3);
    REQUIRE(r3.abscissas.size() == 3);
    CHECK(std::abs(r3.abscissas[0] + std::sqrt(1.5)) < 1e-12);
    CHECK(std::abs(r3.abscissas[1]) < 1e-12);
    CHECK(std::abs(r3.abscissas[2] - std::sqrt(1.5)) < 1e-12);
    CHECK(std::abs(r3.weights[0] - kSqrtPi / 6.0) < 1e-12);
    CHECK(std::abs(r3.weights[1] - 2.0 * kSqrtPi / 3.0) < 1e-12);
    CHECK(std::abs(r3.weights[2] - kSqrtPi / 6.0) < 1e-12);
    for (const auto& rule : {r2, r3}) {
        double sum = 0.0, second = 0.0;
        for (int j = 0; j < rule.n_points; ++j) {
            sum += rule.probabilities[j];
            second += rule.probabilities[j] * rule.unit_nodes[j] * rule.unit_nodes[j];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(second == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)QuadratureRule::gauss_hermite(4), std::invalid_argument);
}

TEST_CASE("Hermite polynomials") {
    CHECK(hermite(0, 0.7) == 1.0);
    CHECK(hermite(1, 0.7) == doctest::Approx(1.4));
    CHECK(hermite(2, 0.7) == doctest::Approx(4 * 0.49 - 2));
    CHECK(hermite(3, 0.7) == doctest::Approx(8 * 0.343 - 12 * 0.7));
}

TEST_CASE("one-joint wedge: corners, quadrature and Monte Carlo against the normal tail") {
    const Wedge1D w;
    const WaypointBelief b{config({w.boundary - 0.01}), config({0.02})};
    CHECK(corner_collision_fraction(b, w.arm, w.env) == 0.5);
    CHECK(gh_collision_probability(b, w.arm, w.env, QuadratureRule::gauss_hermite(2)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gh_collision_probability(b, w.arm, w.env, QuadratureRule::gauss_hermite(3)) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    const double p = 1.0 - normal_cdf(0.01 / 0.02);
    const int n = 100000;
    std::mt19937_64 rng(1);
    const double est = mc_collision_probability(b, w.arm, w.env, n, rng);
    CHECK(std::abs(est - p) <= 3.0 * std::sqrt(p * (1 - p) / n));

    const WaypointBelief exact{config({w.boundary - 0.01}), config({0.0})};
    CHECK(mc_collision_probability(exact, w.arm, w.env, 1000, rng) == 0.0);
    CHECK(gh_collision_probability(exact, w.arm, w.env, QuadratureRule::gauss_hermite(3)) == 0.0);
}

TEST_CASE("two-joint corner fraction") {
    const Wedge1D w;
    const ArmModel arm = ArmModel::uniform({0.5, 0.5}, 0.02, Vec2(0, 0), 2.9);
    const double q1 = w.boundary - 0.01;
    const Vec2 elbow = 0.5 * Vec2(std::cos(q1), std::sin(q1));
    const Vec2 target = elbow + 0.4 * Vec2(std::cos(q1 + 1.0), std::sin(q1 + 1.0));
    const Environment scene({ray_wedge("w", 0.5, 0.5, 1.5, 1.0), Obstacle("c", Circle{target, 0.05})},
                            Bounds{{-3, -3}, {3, 3}});
    const WaypointBelief b{config({q1, 0.5}), config({0.02, 0.5})};
    int hits = 0;
    for (double s1 : {-1.0, 1.0}) {
        for (double s2 : {-1.0, 1.0}) hits += in_collision(arm, scene, config({q1 + 0.02 * s1, 0.5 + 0.5 * s2}));
    }
    REQUIRE(hits == 3);
    CHECK(corner_collision_fraction(b, arm, scene) == 0.75);
    CHECK(gh_collision_probability(b, arm, scene, QuadratureRule::gauss_hermite(2)) ==
          doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("two-point quadrature equals the corner fraction") {
    const Scenario s = standard_scenario();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> sig(0.0, 0.2);
    const auto rule = QuadratureRule::gauss_hermite(2);
    for (int i = 0; i < 200; ++i) {
        const WaypointBelief b{sample_uniform(s.arm, rng), config({sig(rng), sig(rng), sig(rng)})};
        CHECK(gh_collision_probability(b, s.arm, s.env, rule) ==
              doctest::Approx(corner_collision_fraction(b, s.arm, s.env)).epsilon(1e-12));
    }
}

TEST_CASE("quadrature nodes are clamped to the joint limits") {
    const ArmModel arm = ArmModel::uniform({1.0}, 0.02, Vec2(0, 0), 1.0);
    // Obstacle reachable only beyond the joint limit.
    const Environment env({ray_wedge("w", 1.3, 0.3, 0.9, 0.5)}, Bounds{{-3, -3}, {3, 3}});
    REQUIRE(in_collision(arm, env, config({1.5})));
    const WaypointBelief b{config({0.95}), config({0.5})};
    CHECK(corner_collision_fraction(b, arm, env) == 0.0);
    std::mt19937_64 rng(4);
    CHECK(mc_collision_probability(b, arm, env, 2000, rng) == 0.0);
}

TEST_CASE("trajectory risk aggregation") {
    const std::vector<double> r{0.1, 0.1};
    const TrajectoryRisk tr = trajectory_risk(r);
    CHECK(tr.additive == doctest::Approx(0.2));
    CHECK(tr.multiplicative == doctest::Approx(0.19));
    const std::vector<double> big{0.7, 0.6};
    CHECK(trajectory_risk(big).additive == 1.0);
    CHECK(trajectory_risk(std::vector<double>{}).additive == 0.0);
}

TEST_CASE("training set generation") {
    const Scenario s = standard_scenario();
    DatasetSpec spec;
    spec.n_total = 300;
    spec.label_samples = 400;
    const auto data = generate_training_set(s.arm, s.env, spec, 11);
    REQUIRE(data.size() == 300);
    double set1 = 0.0, set2 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& d = data[i];
        CHECK(d.label >= 0.0);
        CHECK(d.label <= 1.0);
        CHECK((d.sigma.array() >= 0.0).all());
        CHECK((d.sigma.array() <= spec.sigma_max).all());
        CHECK(within_limits(s.arm, d.mean));
        if (i < 100) {
            set1 += d.label;
        } else {
            set2 += d.label;
            CHECK_FALSE(in_collision(s.arm, s.env, d.mean));
        }
    }
    CHECK(set2 / 200 < set1 / 100);

    const auto again = generate_training_set(s.arm, s.env, spec, 11);
    CHECK(again[17].label == data[17].label);
    CHECK(again[250].mean == data[250].mean);

    const auto file = std::filesystem::temp_directory_path() / "ccmp_test_dataset.bin";
    save_dataset(file, data);
    const auto loaded = load_dataset(file);
    REQUIRE(loaded.size() == data.size());
    CHECK(loaded[123].label == data[123].label);
    CHECK(loaded[123].sigma == data[123].sigma);
    std::filesystem::remove(file);
}

TEST_CASE("learned model fits a constant and round-trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.9, 2.9), sig(0.0, 0.035);
    std::vector<TrainingSample> data;
    for (int i = 0; i < 1500; ++i) {
        data.push_back({config({u(rng), u(rng), u(rng)}), config({sig(rng), sig(rng), sig(rng)}), 0.3});
    }
    TrainingOptions opts;
    opts.hidden = {16, 16};
    opts.epochs = 30;
    opts.holdout = 300;
    opts.seed = 2;
    const RiskModel model = train_risk_model(data, opts);
    CHECK(model.dof() == 3);
    CHECK(model.history().best_epoch >= 0);
    const WaypointBelief probe{config({0.3, -1.0, 2.0}), config({0.01, 0.02, 0.03})};
    CHECK(std::abs(model.predict(probe) - 0.3) < 0.03);
    const RegressionScore score = score_model(model, data);
    CHECK(score.mean_abs_error < 0.03);

    const auto file = std::filesystem::temp_directory_path() / "ccmp_test_model.bin";
    model.save(file);
    const RiskModel loaded = RiskModel::load(file);
    CHECK(loaded.predict(probe) == model.predict(probe));
    CHECK(loaded.hidden() == model.hidden());
    CHECK(loaded.history().best_epoch == model.history().best_epoch);
    CHECK(loaded.history().val_mse == model.history().val_mse);
    CHECK(loaded.history().val_r2 == model.history().val_r2);
    std::filesystem::remove(file);

    CHECK_THROWS_AS((void)model.predict({config({0.1, 0.2}), config({0.01, 0.01})}), std::invalid_argument);
    data.resize(500);
    CHECK_THROWS_AS((void)train_risk_model(data, opts), std::invalid_argument);
}

TEST_CASE("estimator selection") {
    CHECK(parse_estimator("quadrature") == EstimatorKind::quadrature);
    CHECK(parse_estimator("learned") == EstimatorKind::learned);
    CHECK(parse_estimator("mc") == EstimatorKind::monte_carlo);
    CHECK(parse_estimator("monte_carlo") == EstimatorKind::monte_carlo);
    CHECK_THROWS_AS((void)parse_estimator("magic"), std::invalid_argument);
    CHECK(to_string(EstimatorKind::quadrature) == "quadrature");

    const Wedge1D w;
    const WaypointBelief b{config({w.boundary - 0.01}), config({0.02})};
    const RiskEstimator q(EstimatorKind::quadrature, w.arm, w.env);
    CHECK(q.estimate(b) == doctest::Approx(0.5));
    RiskEstimator mc(EstimatorKind::monte_carlo, w.arm, w.env);
    mc.with_monte_carlo(5000, 9);
    CHECK(mc.estimate(b, 3) == mc.estimate(b, 3));
    CHECK(std::abs(mc.estimate(b, 3) - (1.0 - normal_cdf(0.5))) < 0.03);
}
