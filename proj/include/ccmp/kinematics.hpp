#pragma once

// Planar serial arm with revolute joints and capsule links.

#include "ccmp/geometry.hpp"

#include <Eigen/Core>

#include <random>
#include <stdexcept>
#include <vector>

namespace ccmp {

/// Joint-space point (radians).
using Configuration = Eigen::VectorXd;

struct EndEffectorPose {
    double x{0.0};
    double y{0.0};
    double heading{0.0};
};

struct ForwardKinematics {
    std::vector<Vec2> joints;  // d + 1 entries, base first, tip last
    EndEffectorPose ee;
};

class SamplingCapExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ArmModel {
  public:
    ArmModel(std::vector<double> link_lengths, double link_radius, Vec2 base,
             Eigen::VectorXd joint_lower, Eigen::VectorXd joint_upper);

    /// Uniform limits on every joint.
    static ArmModel uniform(std::vector<double> link_lengths, double link_radius, Vec2 base,
                            double limit);

    [[nodiscard]] int dof() const noexcept { return static_cast<int>(lengths_.size()); }
    [[nodiscard]] const std::vector<double>& link_lengths() const noexcept { return lengths_; }
    [[nodiscard]] double link_radius() const noexcept { return radius_; }
    [[nodiscard]] const Vec2& base() const noexcept { return base_; }
    [[nodiscard]] const Eigen::VectorXd& lower() const noexcept { return lower_; }
    [[nodiscard]] const Eigen::VectorXd& upper() const noexcept { return upper_; }

    /// Upper bound on how far any point of link j's far half moves per radian
    /// of joint i, summed over joints: used for conservative sweep tests.
    /// reach()[i] = sum of link lengths from joint i to the tip.
    [[nodiscard]] const std::vector<double>& reach() const noexcept { return reach_; }

  private:
    std::vector<double> lengths_;
    double radius_;
    Vec2 base_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    std::vector<double> reach_;
};

/// Throws std::invalid_argument on dimension mismatch.
[[nodiscard]] ForwardKinematics forward_kinematics(const ArmModel& arm, const Configuration& q);

/// 3 x d Jacobian of (x, y, heading) with respect to q.
[[nodiscard]] Eigen::MatrixXd ee_jacobian(const ArmModel& arm, const Configuration& q);

[[nodiscard]] std::vector<Capsule> link_capsules(const ArmModel& arm, const Configuration& q);

[[nodiscard]] Configuration clamp(const ArmModel& arm, const Configuration& q);

[[nodiscard]] bool within_limits(const ArmModel& arm, const Configuration& q);

[[nodiscard]] bool in_collision(const ArmModel& arm, const Environment& env, const Configuration& q);

/// Minimum clearance of the arm at q (negative iff in collision).
[[nodiscard]] double clearance(const ArmModel& arm, const Environment& env, const Configuration& q);

/// Upper bound on the workspace displacement of any arm point when moving
/// from q0 to q1 along the straight joint-space segment.
[[nodiscard]] double sweep_bound(const ArmModel& arm, const Configuration& q0, const Configuration& q1);

/// Checks q(s) = q0 + s (q1 - q0) at s = k / n_steps for k = 0..n_steps (both
/// endpoints included). Skips checkpoints provably free by the clearance
/// sweep bound, so the result equals checking every checkpoint.
[[nodiscard]] bool segment_collision_free(const ArmModel& arm, const Environment& env,
                                          const Configuration& q0, const Configuration& q1,
                                          int n_steps);

/// Uniform sample over the joint box.
[[nodiscard]] Configuration sample_uniform(const ArmModel& arm, std::mt19937_64& rng);

/// Rejection sampling; throws SamplingCapExceeded after max_attempts draws.
[[nodiscard]] Configuration sample_collision_free(const ArmModel& arm, const Environment& env,
                                                  std::mt19937_64& rng, int max_attempts = 100000);

}  // namespace ccmp
