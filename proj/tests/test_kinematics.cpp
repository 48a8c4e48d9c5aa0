#include "ccmp/kinematics.hpp"

#include "support.hpp"

#include <Eigen/Geometry>
#include <doctest.h>

#include <numeric>

using namespace ccmp;
using namespace ccmp::testing;

namespace {

ArmModel two_link() { return ArmModel::uniform({1.0, 1.0}, 0.05, Vec2(0.0, 0.0), 2.9); }

// Joint positions by composing planar homogeneous transforms.
std::vector<Vec2> transform_chain(const ArmModel& arm, const Configuration& q) {
    Eigen::Isometry2d frame = Eigen::Isometry2d::Identity();
    frame.translate(arm.base());
    std::vector<Vec2> out{frame.translation()};
    for (int j = 0; j < arm.dof(); ++j) {
        frame.rotate(Eigen::Rotation2Dd(q[j]));
        frame.translate(Vec2(arm.link_lengths()[j], 0.0));
        out.push_back(frame.translation());
    }
    return out;
}

Eigen::Vector3d pose(const ArmModel& arm, const Configuration& q) {
    const auto ee = forward_kinematics(arm, q).ee;
    return {ee.x, ee.y, ee.heading};
}

}  // namespace

TEST_CASE("forward kinematics examples") {
    const ArmModel arm = two_link();
    auto fk = forward_kinematics(arm, config({0.0, 0.0}));
    CHECK(fk.ee.x == doctest::Approx(2.0));
    CHECK(fk.ee.y == doctest::Approx(0.0));
    CHECK(fk.ee.heading == doctest::Approx(0.0));
    CHECK(fk.joints.size() == 3);
    fk = forward_kinematics(arm, config({kPi / 2, 0.0}));
    CHECK(fk.ee.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fk.ee.y == doctest::Approx(2.0));
    CHECK(fk.ee.heading == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS((void)forward_kinematics(arm, config({0.0})), std::invalid_argument);
}

TEST_CASE("forward kinematics matches transform composition") {
    const ArmModel arm({0.5, 0.4, 0.3, 0.2}, 0.03, Vec2(0.3, -0.2), Eigen::VectorXd::Constant(4, -2.9),
                       Eigen::VectorXd::Constant(4, 2.9));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const Configuration q = sample_uniform(arm, rng);
        const auto fk = forward_kinematics(arm, q);
        const auto oracle = transform_chain(arm, q);
        for (std::size_t k = 0; k < oracle.size(); ++k) CHECK((fk.joints[k] - oracle[k]).norm() < 1e-12);
        CHECK(fk.ee.heading == doctest::Approx(q.sum()).epsilon(1e-14));
    }
}

TEST_CASE("joint positions of a truncated arm are a prefix") {
    const ArmModel arm = three_link_arm();
    const ArmModel shorter = ArmModel::uniform({0.5, 0.4}, 0.03, Vec2(0.0, 0.0), 2.9);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const Configuration q = sample_uniform(arm, rng);
        const auto full = forward_kinematics(arm, q).joints;
        const auto part = forward_kinematics(shorter, q.head(2)).joints;
        for (std::size_t k = 0; k < part.size(); ++k) CHECK((full[k] - part[k]).norm() < 1e-14);
    }
}

TEST_CASE("end-effector Jacobian") {
    const ArmModel arm = two_link();
    const Eigen::MatrixXd j = ee_jacobian(arm, config({0.0, 0.0}));
    Eigen::MatrixXd expected(3, 2);
    expected << 0, 0, 2, 1, 1, 1;
    CHECK((j - expected).norm() < 1e-14);

    const ArmModel arm3 = three_link_arm();
    std::mt19937_64 rng(4);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const Configuration q = sample_uniform(arm3, rng);
        const Eigen::MatrixXd jac = ee_jacobian(arm3, q);
        CHECK((jac.row(2).array() == 1.0).all());
        for (int c = 0; c < 3; ++c) {
            Configuration qp = q, qm = q;
            qp[c] += h;
            qm[c] -= h;
            const Eigen::Vector3d fd = (pose(arm3, qp) - pose(arm3, qm)) / (2 * h);
            CHECK((fd - jac.col(c)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("first-order Taylor residual of the Jacobian shrinks quadratically") {
    const ArmModel arm = three_link_arm();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Configuration q = sample_uniform(arm, rng);
        Configuration dir(3);
        for (int j = 0; j < 3; ++j) dir[j] = n(rng);
        const Eigen::MatrixXd jac = ee_jacobian(arm, q);
        std::vector<double> xs, ys;
        for (double eps : {1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3}) {
            const double res = (pose(arm, q + eps * dir) - pose(arm, q) - eps * jac * dir).norm();
            xs.push_back(std::log(eps));
            ys.push_back(std::log(res));
        }
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        CHECK(sxy / sxx >= 1.9);
    }
}

TEST_CASE("link capsules") {
    const ArmModel one = ArmModel::uniform({1.0}, 0.05, Vec2(0.0, 0.0), 2.9);
    const auto caps = link_capsules(one, config({0.0}));
    REQUIRE(caps.size() == 1);
    CHECK((caps[0].a - Vec2(0, 0)).norm() < 1e-15);
    CHECK((caps[0].b - Vec2(1, 0)).norm() < 1e-15);
    CHECK(caps[0].radius == 0.05);

    const ArmModel arm = three_link_arm();
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        const Configuration q = sample_uniform(arm, rng);
        const auto fk = forward_kinematics(arm, q);
        const auto c = link_capsules(arm, q);
        for (int k = 0; k < 3; ++k) {
            CHECK(c[k].a == fk.joints[k]);
            CHECK(c[k].b == fk.joints[k + 1]);
        }
    }
}

TEST_CASE("capsule collision agrees with dense sampling of the arm") {
    const ArmModel arm = three_link_arm();
    const Obstacle circ("c", Circle{{0.6, 0.3}, 0.15});
    const Environment env({circ}, Bounds{{-2, -2}, {2, 2}});
    std::mt19937_64 rng(12);
    int compared = 0;
    while (compared < 100) {
        const Configuration q = sample_uniform(arm, rng);
        const auto caps = link_capsules(arm, q);
        const double clr = clearance(arm, env, q);
        if (std::abs(clr) < 2e-3) continue;
        // Oracle: points on each link's centre line, with the link radius added to the circle.
        bool hit = false;
        for (const auto& c : caps) {
            for (int s = 0; s <= 1000 && !hit; ++s) {
                const Vec2 p = c.a + (c.b - c.a) * (s / 1000.0);
                hit = (p - Vec2(0.6, 0.3)).norm() < 0.15 + c.radius;
            }
        }
        CHECK(hit == (clr < 0.0));
        ++compared;
    }
}

TEST_CASE("clamp") {
    const ArmModel arm = three_link_arm();
    const Configuration inside = config({0.1, -0.2, 2.0});
    CHECK(clamp(arm, inside) == inside);
    const Configuration over = config({2.9 + 0.5, 0.0, -3.5});
    const Configuration c = clamp(arm, over);
    CHECK(c[0] == 2.9);
    CHECK(c[2] == -2.9);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const Configuration q = config({u(rng), u(rng), u(rng)});
        CHECK(clamp(arm, clamp(arm, q)) == clamp(arm, q));
        CHECK(within_limits(arm, clamp(arm, q)));
    }
}

TEST_CASE("arm model invariants") {
    CHECK_THROWS_AS(ArmModel::uniform({}, 0.03, Vec2(0, 0), 2.9), std::invalid_argument);
    CHECK_THROWS_AS(ArmModel::uniform({0.5, -0.1}, 0.03, Vec2(0, 0), 2.9), std::invalid_argument);
    CHECK_THROWS_AS(ArmModel::uniform({0.5}, 0.0, Vec2(0, 0), 2.9), std::invalid_argument);
    CHECK_THROWS_AS(ArmModel({0.5}, 0.03, Vec2(0, 0), config({1.0}), config({0.5})), std::invalid_argument);
}

TEST_CASE("collision-free sampling") {
    const ArmModel arm = three_link_arm();
    std::mt19937_64 rng(10);
    const Environment empty = empty_environment();
    std::mt19937_64 probe = rng;
    CHECK(sample_collision_free(arm, empty, rng) == sample_uniform(arm, probe));

    const Environment env({Obstacle("c", Circle{{0.5, 0.2}, 0.3}), Obstacle("d", Circle{{-0.4, -0.6}, 0.25})},
                          Bounds{{-1.6, -1.6}, {1.6, 1.6}});
    for (int i = 0; i < 200; ++i) {
        const Configuration q = sample_collision_free(arm, env, rng);
        CHECK(within_limits(arm, q));
        CHECK_FALSE(in_collision(arm, env, q));
    }

    // Acceptance rate of uniform draws against a grid estimate of the free fraction.
    const int g = 30;
    int free_cells = 0;
    for (int a = 0; a < g; ++a) {
        for (int b = 0; b < g; ++b) {
            for (int c = 0; c < g; ++c) {
                const Configuration q = config({-2.9 + 5.8 * (a + 0.5) / g, -2.9 + 5.8 * (b + 0.5) / g,
                                                -2.9 + 5.8 * (c + 0.5) / g});
                free_cells += !in_collision(arm, env, q);
            }
        }
    }
    const double grid_fraction = static_cast<double>(free_cells) / (g * g * g);
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) accepted += !in_collision(arm, env, sample_uniform(arm, rng));
    CHECK(std::abs(accepted / 10000.0 - grid_fraction) <= 0.05);

    const Environment blocked({Obstacle("c", Circle{{0.0, 0.0}, 0.2})}, Bounds{{-1.6, -1.6}, {1.6, 1.6}});
    CHECK_THROWS_AS((void)sample_collision_free(arm, blocked, rng, 50), SamplingCapExceeded);
}

TEST_CASE("segment collision check matches exhaustive checkpoints") {
    const ArmModel arm = three_link_arm();
    const Environment env({Obstacle("c", Circle{{0.6, 0.4}, 0.12})}, Bounds{{-1.6, -1.6}, {1.6, 1.6}});
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        const Configuration a = sample_collision_free(arm, env, rng);
        const Configuration b = sample_collision_free(arm, env, rng);
        bool exhaustive = true;
        for (int k = 0; k <= 50 && exhaustive; ++k) exhaustive = !in_collision(arm, env, a + (b - a) * (k / 50.0));
        CHECK(segment_collision_free(arm, env, a, b, 50) == exhaustive);
    }
}
