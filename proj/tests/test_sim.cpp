#include "ccmp/scenario.hpp"
#include "ccmp/sim.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace ccmp;
using namespace ccmp::testing;

namespace {

// P(X <= k) by direct summation of the pmf with the multiplicative recurrence.
double binomial_cdf_direct(int k, int n, double p) {
    double pmf = std::pow(1.0 - p, n);
    double cdf = pmf;
    for (int i = 1; i <= k; ++i) {
        pmf *= (n - i + 1) / static_cast<double>(i) * p / (1.0 - p);
        cdf += pmf;
    }
    return cdf;
}

Trajectory hold(const Configuration& q, int steps) {
    Trajectory t;
    t.waypoints.assign(steps + 1, q);
    return t;
}

}  // namespace

TEST_CASE("binomial CDF") {
    CHECK(binomial_cdf(10, 100, 0.1) == doctest::Approx(0.5832).epsilon(5e-4));
    CHECK(binomial_cdf(15, 100, 0.1) == doctest::Approx(0.9601).epsilon(5e-4));
    CHECK(binomial_cdf(5, 100, 0.05) == doctest::Approx(0.6160).epsilon(5e-4));
    CHECK(binomial_cdf(7, 100, 0.05) == doctest::Approx(0.8720).epsilon(5e-4));
    for (int n : {1, 7, 30, 100}) {
        for (double p : {0.01, 0.1, 0.37}) {
            for (int k = 0; k <= n; k += std::max(1, n / 5)) {
                CHECK(binomial_cdf(k, n, p) == doctest::Approx(binomial_cdf_direct(k, n, p)).epsilon(1e-10));
            }
        }
    }
    CHECK(binomial_cdf(0, 1, 0.5) == doctest::Approx(0.5));
    CHECK(binomial_cdf(100, 100, 0.3) == doctest::Approx(1.0));
    CHECK(binomial_cdf(0, 10, 0.0) == 1.0);
    CHECK(binomial_cdf(9, 10, 1.0) == 0.0);
}

TEST_CASE("noise-free execution follows the nominal") {
    const Scenario s = standard_scenario();
    const Trajectory t = straight_line(config({0.0, 0.5, 0.2}), config({-0.4, 0.9, 0.6}), 8, 0.3);
    const NoiseModel zero = NoiseModel::zero(3);
    const Gains g = compute_gains(t, zero, s.arm, LqrWeights::identity(3));
    std::mt19937_64 rng(1);
    const ExecutionTrace tr = execute_noisy(t, zero, s.arm, s.env, g, rng);
    REQUIRE(tr.states.size() == 8);
    CHECK(tr.controls.size() == 7);
    for (int i = 0; i < 8; ++i) CHECK((tr.states[i] - t.waypoints[i]).norm() == 0.0);
}

TEST_CASE("continuous collision includes every discrete collision") {
    const Scenario s = standard_scenario();
    const Trajectory t = straight_line(config({0.2, 0.3, 0.1}), config({1.6, -0.5, 0.4}), 12, 0.3);
    const NoiseModel noise = NoiseModel::joint_encoders(3, 0.03, 0.3);
    const Gains g = compute_gains(t, noise, s.arm, LqrWeights::identity(3));
    int discrete = 0, continuous = 0;
    for (int i = 0; i < 300; ++i) {
        std::mt19937_64 rng(100 + i);
        const ExecutionTrace tr = execute_noisy(t, noise, s.arm, s.env, g, rng);
        if (tr.collided_discrete) CHECK(tr.collided_continuous);
        CHECK(tr.first_collision.has_value() == tr.collided_continuous);
        for (const auto& q : tr.states) CHECK(within_limits(s.arm, q));
        discrete += tr.collided_discrete;
        continuous += tr.collided_continuous;
    }
    CHECK(continuous >= discrete);
}

TEST_CASE("evaluation is reproducible and worker-independent") {
    const Scenario s = standard_scenario();
    const Trajectory t = straight_line(config({0.2, 0.3, 0.1}), config({1.6, -0.5, 0.4}), 12, 0.3);
    const NoiseModel noise = NoiseModel::joint_encoders(3, 0.02, 0.3);
    const LqrWeights w = LqrWeights::identity(3);
    const ExecutionStats a = evaluate(t, noise, s.arm, s.env, w, 200, 0.1, 5, 1);
    const ExecutionStats b = evaluate(t, noise, s.arm, s.env, w, 200, 0.1, 5, 3);
    CHECK(a.continuous_rate == b.continuous_rate);
    CHECK(a.discrete_rate == b.discrete_rate);
    CHECK(a.mean_path_length == b.mean_path_length);
    CHECK(a.continuous_rate >= a.discrete_rate);
    CHECK(a.satisfied_continuous == (a.continuous_rate <= kSatisfactionFactor * 0.1));
    CHECK_THROWS_AS((void)evaluate(t, noise, s.arm, s.env, w, 0, 0.1, 5), std::invalid_argument);

    // 100 executions agree with 1000 within sampling error.
    const ExecutionStats many = evaluate(t, noise, s.arm, s.env, w, 1000, 0.1, 9);
    const ExecutionStats few = evaluate(t, noise, s.arm, s.env, w, 100, 0.1, 9);
    const double p = many.continuous_rate;
    CHECK(std::abs(few.continuous_rate - p) <= 3.0 * std::sqrt(std::max(p * (1 - p), 0.01) / 100) + 1e-12);
}

TEST_CASE("tracking error decays once noise stops") {
    const Scenario s = standard_scenario();
    const Trajectory t = hold(config({0.3, 0.6, -0.4}), 60);
    const NoiseModel noise = NoiseModel::joint_encoders(3, 0.02, 0.3);
    const Gains g = compute_gains(t, noise, s.arm, LqrWeights::identity(3));
    ExecutionOptions opts;
    opts.noise_off_after = 5;
    for (int i = 0; i < 20; ++i) {
        std::mt19937_64 rng(i);
        const ExecutionTrace tr = execute_noisy(t, noise, s.arm, s.env, g, rng, opts);
        double peak = 0.0;
        for (int k = 0; k <= 6; ++k) peak = std::max(peak, tr.deviations[k].norm());
        CHECK(tr.deviations.back().norm() < 0.05 * peak);
    }
}

TEST_CASE("huge initial uncertainty next to an obstacle collides most of the time") {
    const ArmModel arm = ArmModel::uniform({1.0}, 0.02, Vec2(0, 0), 2.9);
    const Environment env({ray_wedge("w", 0.5, 0.5, 1.5, 1.0)}, Bounds{{-3, -3}, {3, 3}});
    const double boundary = 0.5 - std::asin(0.02 / 0.5);
    const Trajectory t = hold(config({boundary - 0.001}), 10);
    NoiseModel noise = NoiseModel::joint_encoders(1, kDefaultNoiseStd, 0.3);
    noise.initial_cov *= 1e4;
    const ExecutionStats st = evaluate(t, noise, arm, env, LqrWeights::identity(1), 400, 0.1, 3);
    CHECK(st.continuous_rate > 0.5);
    CHECK_FALSE(st.satisfied_continuous);
}
