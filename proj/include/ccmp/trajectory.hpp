#pragma once

#include "ccmp/kinematics.hpp"

#include <vector>

namespace ccmp {

/// Nominal trajectory: waypoints x*_0 .. x*_T at a fixed interval dt.
struct Trajectory {
    std::vector<Configuration> waypoints;
    double dt{0.3};

    [[nodiscard]] int size() const noexcept { return static_cast<int>(waypoints.size()); }
    /// Number of steps T (waypoints - 1).
    [[nodiscard]] int steps() const noexcept { return size() - 1; }
};

/// Sum of Euclidean joint-space segment lengths (radians).
[[nodiscard]] double path_length(const std::vector<Configuration>& waypoints);

/// Sum of squared segment lengths (the optimizer's smoothness objective).
[[nodiscard]] double squared_displacement(const std::vector<Configuration>& waypoints);

}  // namespace ccmp
