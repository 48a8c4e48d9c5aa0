#pragma once

#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/trajectory.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace ccmp::testing {

inline const double kPi = std::acos(-1.0);

inline Environment empty_environment(double half_width = 3.0) {
    return {{}, Bounds{{-half_width, -half_width}, {half_width, half_width}}};
}

inline ArmModel three_link_arm() { return ArmModel::uniform({0.5, 0.4, 0.3}, 0.03, Vec2(0.0, 0.0), 2.9); }

inline Configuration config(std::initializer_list<double> values) {
    Configuration q(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) q[i++] = v;
    return q;
}

/// Straight joint-space line with n waypoints.
inline Trajectory straight_line(const Configuration& a, const Configuration& b, int n, double dt) {
    Trajectory t;
    t.dt = dt;
    for (int i = 0; i < n; ++i) t.waypoints.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
    return t;
}

/// Quadrilateral on the counter-clockwise side of the ray at angle theta from
/// the origin, with one edge along the ray from distance near to far.
inline Obstacle ray_wedge(const std::string& id, double theta, double near, double far, double width) {
    const Vec2 u(std::cos(theta), std::sin(theta));
    const Vec2 n(-u.y(), u.x());
    return {id, ConvexPolygon{{near * u, far * u, far * u + width * n, near * u + width * n}}};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace ccmp::testing
