#include "ccmp/geometry.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace ccmp;
using namespace ccmp::testing;

namespace {

// Independent half-plane containment test for a counter-clockwise polygon.
bool inside_ccw(const Vec2& p, const std::vector<Vec2>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        const Vec2 e = b - a;
        const Vec2 w = p - a;
        if (e.x() * w.y() - e.y() * w.x() < 0.0) return false;
    }
    return true;
}

double seg_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + s * ab)).norm();
}

// Capsule/polygon overlap from 10^4 capsule boundary points plus polygon
// vertices falling inside the capsule.
bool dense_overlap(const Capsule& c, const std::vector<Vec2>& poly) {
    const Vec2 ab = c.b - c.a;
    const Vec2 dir = ab.norm() > 0.0 ? Vec2(ab.normalized()) : Vec2(1.0, 0.0);
    const Vec2 nrm(-dir.y(), dir.x());
    const int n = 2500;
    for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        const Vec2 m = c.a + s * ab;
        if (inside_ccw(m + c.radius * nrm, poly) || inside_ccw(m - c.radius * nrm, poly)) return true;
        const double phi = kPi * s;
        const Vec2 arc_b = c.b + c.radius * (std::cos(phi - kPi / 2) * dir + std::sin(phi - kPi / 2) * nrm);
        const Vec2 arc_a = c.a - c.radius * (std::cos(phi - kPi / 2) * dir + std::sin(phi - kPi / 2) * nrm);
        if (inside_ccw(arc_a, poly) || inside_ccw(arc_b, poly)) return true;
    }
    for (const Vec2& v : poly) {
        if (seg_dist(v, c.a, c.b) < c.radius) return true;
    }
    return false;
}

std::vector<Vec2> random_convex_polygon(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> centre(-0.5, 0.5);
    std::uniform_real_distribution<double> radius(0.1, 0.4);
    std::uniform_int_distribution<int> count(3, 7);
    const int n = count(rng);
    const Vec2 c(centre(rng), centre(rng));
    const double r = radius(rng);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::vector<Vec2> v;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * (i + 0.5 + jitter(rng)) / n;
        v.push_back(c + r * Vec2(std::cos(a), std::sin(a)));
    }
    return v;
}

Capsule random_capsule(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::uniform_real_distribution<double> r(0.01, 0.1);
    return {{u(rng), u(rng)}, {u(rng), u(rng)}, r(rng)};
}

}  // namespace

TEST_CASE("capsule versus circle examples") {
    const Capsule cap{{0.0, 0.0}, {1.0, 0.0}, 0.1};
    CHECK(signed_distance(cap, Obstacle("c", Circle{{0.5, 0.5}, 0.2})) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(signed_distance(cap, Obstacle("c", Circle{{0.5, 0.0}, 0.2})) == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("obstacle invariants are enforced") {
    CHECK_THROWS_AS(Obstacle("c", Circle{{0.0, 0.0}, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Obstacle("p", ConvexPolygon{{{0, 0}, {1, 0}}}), std::invalid_argument);
    // clockwise
    CHECK_THROWS_AS(Obstacle("p", ConvexPolygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}), std::invalid_argument);
    // non-convex
    CHECK_THROWS_AS(Obstacle("p", ConvexPolygon{{{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}}), std::invalid_argument);
    CHECK_NOTHROW(Obstacle("p", ConvexPolygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}));
}

TEST_CASE("environment rejects obstacles outside the bounds") {
    std::vector<Obstacle> obs{Obstacle("c", Circle{{0.9, 0.0}, 0.2})};
    CHECK_THROWS_AS(Environment(obs, Bounds{{-1, -1}, {1, 1}}), std::invalid_argument);
}

TEST_CASE("polygon signed distance sign agrees with dense sampling") {
    std::mt19937_64 rng(11);
    int compared = 0;
    int hits = 0;
    while (compared < 50) {
        const auto poly = random_convex_polygon(rng);
        const Capsule cap = random_capsule(rng);
        const double sd = signed_distance(cap, Obstacle("p", ConvexPolygon{poly}));
        if (std::abs(sd) < 2e-3) continue;  // below the sampling resolution
        CHECK((sd < 0.0) == dense_overlap(cap, poly));
        hits += sd < 0.0;
        ++compared;
    }
    CHECK(hits > 5);
    CHECK(hits < 45);
}

TEST_CASE("polygon signed distance matches closed form outside and inside") {
    const Obstacle square("s", ConvexPolygon{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}});
    // Degenerate capsule (a point) above the square.
    CHECK(signed_distance(Capsule{{0.2, 1.5}, {0.2, 1.5}, 0.1}, square) == doctest::Approx(0.4));
    // Diagonal from a corner.
    CHECK(signed_distance(Capsule{{2, 2}, {2, 2}, 0.1}, square) == doctest::Approx(std::sqrt(2.0) - 0.1));
    // Deepest inside: penetration is the max edge half-plane distance.
    CHECK(signed_distance(Capsule{{0.5, 0.0}, {0.5, 0.0}, 0.1}, square) == doctest::Approx(-0.6));
}

TEST_CASE("signed distance is translation invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const auto poly = random_convex_polygon(rng);
        const Capsule cap = random_capsule(rng);
        const Obstacle obs("p", ConvexPolygon{poly});
        const Vec2 off(shift(rng), shift(rng));
        const Capsule moved{cap.a + off, cap.b + off, cap.radius};
        CHECK(std::abs(signed_distance(cap, obs) - signed_distance(moved, obs.translated(off))) < 1e-9);
        const Obstacle circ("c", Circle{poly[0], 0.2});
        CHECK(std::abs(signed_distance(cap, circ) - signed_distance(moved, circ.translated(off))) < 1e-9);
    }
}

TEST_CASE("signed distance is Lipschitz in the capsule endpoints") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const Obstacle obs("p", ConvexPolygon{random_convex_polygon(rng)});
        const Capsule cap = random_capsule(rng);
        const Vec2 da = Vec2(n(rng), n(rng)).normalized() * h;
        const Vec2 db = Vec2(n(rng), n(rng)).normalized() * h;
        const double d0 = signed_distance(cap, obs);
        const double d1 = signed_distance(Capsule{cap.a + da, cap.b + db, cap.radius}, obs);
        CHECK(std::abs(d1 - d0) <= 1.0 * h + 1e-12);
    }
}

TEST_CASE("analytic gradient matches finite differences on non-degenerate samples") {
    std::mt19937_64 rng(21);
    const double h = 1e-6;
    int checked = 0;
    int agree = 0;
    for (int i = 0; i < 200; ++i) {
        const Obstacle obs = i % 2 == 0 ? Obstacle("p", ConvexPolygon{random_convex_polygon(rng)})
                                        : Obstacle("c", Circle{{0.1, -0.1}, 0.25});
        const Capsule cap = random_capsule(rng);
        const DistanceResult r = signed_distance_with_gradient(cap, obs);
        CHECK(r.distance == doctest::Approx(signed_distance(cap, obs)).epsilon(1e-12));
        if (r.degenerate) continue;
        Eigen::Vector4d fd;
        for (int k = 0; k < 4; ++k) {
            Capsule p = cap, m = cap;
            (k < 2 ? p.a : p.b)[k % 2] += h;
            (k < 2 ? m.a : m.b)[k % 2] -= h;
            fd[k] = (signed_distance(p, obs) - signed_distance(m, obs)) / (2 * h);
        }
        const Eigen::Vector4d an(r.grad_a.x(), r.grad_a.y(), r.grad_b.x(), r.grad_b.y());
        ++checked;
        agree += (fd - an).norm() < 1e-5;
    }
    CHECK(checked >= 150);
    CHECK(agree >= checked - 2);  // a sample may straddle a feature switch within h
}

TEST_CASE("in_collision equals the disjunction of per-pair signed distances") {
    std::mt19937_64 rng(3);
    CHECK_FALSE(in_collision(std::vector<Capsule>{{{0, 0}, {1, 0}, 0.1}}, empty_environment()));
    for (int scene = 0; scene < 100; ++scene) {
        std::vector<Obstacle> obs;
        obs.emplace_back("p", ConvexPolygon{random_convex_polygon(rng)});
        obs.emplace_back("c", Circle{{0.3, 0.3}, 0.15});
        const Environment env(obs, Bounds{{-2, -2}, {2, 2}});
        std::vector<Capsule> caps{random_capsule(rng), random_capsule(rng)};
        bool any = false;
        double min_sd = 1e9;
        for (const auto& c : caps) {
            for (const auto& o : obs) {
                const double sd = signed_distance(c, o);
                any = any || sd < 0.0;
                min_sd = std::min(min_sd, sd);
            }
        }
        CHECK(in_collision(caps, env) == any);
        CHECK(clearance(caps, env) <= min_sd + 1e-12);
        CHECK((clearance(caps, env) < 0.0) == in_collision(caps, env));
    }
}

TEST_CASE("leaving the workspace bounds counts as collision") {
    const Environment env = empty_environment(1.0);
    CHECK(in_collision(std::vector<Capsule>{{{0, 0}, {1.2, 0}, 0.05}}, env));
    CHECK_FALSE(in_collision(std::vector<Capsule>{{{0, 0}, {0.8, 0}, 0.05}}, env));
}

TEST_CASE("inflated obstacles never have larger signed distance") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const Obstacle obs("p", ConvexPolygon{random_convex_polygon(rng)});
        const Capsule cap = random_capsule(rng);
        CHECK(signed_distance(cap, obs.inflated(0.05)) <= signed_distance(cap, obs) + 1e-12);
    }
}
