#pragma once

// A priori belief propagation along a nominal trajectory under LQR tracking
// and Kalman filtering (LQG-MP). Each joint is a double integrator driven by
// an acceleration command; the state is interleaved per joint as
// [pos_0, vel_0, pos_1, vel_1, ...].

#include "ccmp/kinematics.hpp"
#include "ccmp/trajectory.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace ccmp {

enum class ObservationKind { joint_encoders, ee_pose };

inline constexpr double kDefaultNoiseStd = 0.0044;  // rad

struct NoiseModel {
    Eigen::VectorXd sigma_x;  // position process noise std per joint (rad)
    Eigen::VectorXd sigma_v;  // velocity process noise std per joint (rad/s)
    ObservationKind observation{ObservationKind::joint_encoders};
    std::vector<Eigen::Matrix2d> encoder_cov;  // per joint, joint_encoders only
    Eigen::Matrix3d ee_cov{Eigen::Matrix3d::Zero()};
    Eigen::MatrixXd initial_cov;  // Sigma_0, 2d x 2d

    /// sigma_v = sigma / dt; encoder and initial covariances per joint diag(sigma^2, sigma_v^2).
    static NoiseModel joint_encoders(int dof, double sigma, double dt);
    /// Same process noise, end-effector pose observed with ee_cov
    /// (default diag(0.005^2, 0.005^2, 0.01^2)).
    static NoiseModel end_effector(int dof, double sigma, double dt);
    /// All noise sources zero.
    static NoiseModel zero(int dof, ObservationKind kind = ObservationKind::joint_encoders);

    [[nodiscard]] int dof() const noexcept { return static_cast<int>(sigma_x.size()); }
    [[nodiscard]] int observation_dim() const noexcept {
        return observation == ObservationKind::joint_encoders ? 2 * dof() : 3;
    }
    [[nodiscard]] Eigen::MatrixXd process_cov() const;
    [[nodiscard]] Eigen::MatrixXd observation_cov() const;

    /// Throws std::invalid_argument if any covariance is asymmetric or has a
    /// negative eigenvalue, or if a std is negative.
    void validate() const;
};

struct LqrWeights {
    Eigen::MatrixXd Q;  // 2d x 2d
    Eigen::MatrixXd R;  // d x d
    static LqrWeights identity(int dof);
};

struct LinearModel {
    Eigen::MatrixXd A;  // 2d x 2d
    Eigen::MatrixXd B;  // 2d x d
};

[[nodiscard]] LinearModel double_integrator(int dof, double dt);

/// Observation Jacobian H_t at a nominal configuration.
[[nodiscard]] Eigen::MatrixXd observation_matrix(const NoiseModel& noise, const ArmModel& arm,
                                                 const Configuration& q);

class LqgError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Finite-horizon LQR on the deviation dynamics. Returns K_t for
/// t = 0..T-1, with the deviation control u_t = K_t x_t.
[[nodiscard]] std::vector<Eigen::MatrixXd> lqr_gains(const Trajectory& traj, const LqrWeights& weights);

struct KalmanGains {
    std::vector<Eigen::MatrixXd> L;        // T+1 entries; L[0] is unused (zero)
    std::vector<Eigen::MatrixXd> H;        // T+1 observation matrices
    std::vector<Eigen::MatrixXd> P_prior;  // predicted error covariance (P_prior[0] = Sigma_0)
    std::vector<Eigen::MatrixXd> P_post;   // updated error covariance
};

/// Forward Kalman recursion on the deviation model. Throws LqgError when the
/// innovation covariance is numerically singular.
[[nodiscard]] KalmanGains kalman_gains(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm);

struct Gains {
    LinearModel model;
    std::vector<Eigen::MatrixXd> K;  // T entries
    KalmanGains kalman;
};

[[nodiscard]] Gains compute_gains(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                                  const LqrWeights& weights);

struct BeliefTrajectory {
    std::vector<Eigen::MatrixXd> joint_cov;          // C_t over (true deviation, estimate)
    std::vector<Eigen::MatrixXd> state_control_cov;  // Lambda_t C_t Lambda_t^T
    std::vector<Configuration> mean;                 // x*_t
    std::vector<Eigen::MatrixXd> config_cov;         // d x d position marginal
    std::vector<Eigen::VectorXd> sigma;              // per-joint position std

    [[nodiscard]] int size() const noexcept { return static_cast<int>(mean.size()); }
};

[[nodiscard]] BeliefTrajectory propagate(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                                         const LqrWeights& weights);
[[nodiscard]] BeliefTrajectory propagate(const Trajectory& traj, const NoiseModel& noise, const Gains& gains);

/// (S + S^T)/2 with negative eigenvalues clamped to zero.
[[nodiscard]] Eigen::MatrixXd symmetrize_psd(const Eigen::MatrixXd& S);

/// Indices of the position entries in the interleaved state.
[[nodiscard]] inline int pos_index(int joint) { return 2 * joint; }
[[nodiscard]] inline int vel_index(int joint) { return 2 * joint + 1; }

}  // namespace ccmp
