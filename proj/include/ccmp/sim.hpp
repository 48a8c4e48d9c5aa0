#pragma once

// Noisy closed-loop execution of a nominal trajectory (Kalman filter + LQR
// tracking) with waypoint and interpolated-edge collision accounting.

#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/lqg.hpp"
#include "ccmp/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace ccmp {

struct ExecutionOptions {
    int edge_points{100};      // interpolated checks per realized edge
    int noise_off_after{-1};   // >= 0: no process/observation noise for steps t > k
};

struct ExecutionTrace {
    std::vector<Configuration> states;     // realized configurations
    std::vector<Eigen::VectorXd> deviations;  // true state deviation from nominal (2d)
    std::vector<Eigen::VectorXd> controls;    // applied deviation controls, one per step
    bool collided_discrete{false};
    bool collided_continuous{false};
    std::optional<int> first_collision;  // first waypoint index, or edge start index if only an edge collides
};

[[nodiscard]] ExecutionTrace execute_noisy(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                                           const Environment& env, const Gains& gains, std::mt19937_64& rng,
                                           const ExecutionOptions& options = {});

struct ExecutionStats {
    int n_executions{0};
    double discrete_rate{0.0};
    double continuous_rate{0.0};
    bool satisfied_discrete{false};
    bool satisfied_continuous{false};
    double mean_path_length{0.0};  // realized, radians
};

inline constexpr double kSatisfactionFactor = 1.5;
inline constexpr int kDefaultExecutions = 100;

/// n_exec executions, execution i drawing from substream(seed, i).
[[nodiscard]] ExecutionStats evaluate(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                                      const Environment& env, const LqrWeights& weights, int n_exec, double delta,
                                      std::uint64_t seed, int workers = 1);

/// P(X <= k) for X ~ Binomial(n, p), summed in log space.
[[nodiscard]] double binomial_cdf(int k, int n, double p);

}  // namespace ccmp
