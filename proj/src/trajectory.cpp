#include "ccmp/trajectory.hpp"

namespace ccmp {

double path_length(const std::vector<Configuration>& waypoints) {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) total += (waypoints[i] - waypoints[i - 1]).norm();
    return total;
}

double squared_displacement(const std::vector<Configuration>& waypoints) {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) total += (waypoints[i] - waypoints[i - 1]).squaredNorm();
    return total;
}

}  // namespace ccmp
