#include "ccmp/sim.hpp"

#include "ccmp/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ccmp {

namespace {

// S with S S^T = cov for a symmetric PSD cov.
Eigen::MatrixXd cov_sqrt(const Eigen::MatrixXd& cov) {
    if (cov.size() == 0) return cov;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd draw(const Eigen::MatrixXd& sqrt_cov, std::normal_distribution<double>& normal,
                     std::mt19937_64& rng) {
    Eigen::VectorXd z(sqrt_cov.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return sqrt_cov * z;
}

// Realized configuration for a deviation; clamps and writes the clamp back.
Configuration realize(const ArmModel& arm, const Configuration& nominal, Eigen::VectorXd& dev) {
    const int d = arm.dof();
    Configuration q(d);
    for (int j = 0; j < d; ++j) {
        q[j] = std::clamp(nominal[j] + dev[pos_index(j)], arm.lower()[j], arm.upper()[j]);
        dev[pos_index(j)] = q[j] - nominal[j];
    }
    return q;
}

Eigen::Vector3d ee_pose(const ArmModel& arm, const Configuration& q) {
    const EndEffectorPose ee = forward_kinematics(arm, q).ee;
    return {ee.x, ee.y, ee.heading};
}

}  // namespace

ExecutionTrace execute_noisy(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                             const Environment& env, const Gains& gains, std::mt19937_64& rng,
                             const ExecutionOptions& options) {
    const int d = arm.dof();
    const int T = traj.steps();
    if (noise.dof() != d) throw std::invalid_argument("noise model and arm dimensions differ");
    if (static_cast<int>(gains.K.size()) != T || static_cast<int>(gains.kalman.L.size()) != T + 1) {
        throw std::invalid_argument("gains were computed for a different trajectory");
    }
    const Eigen::MatrixXd& A = gains.model.A;
    const Eigen::MatrixXd& B = gains.model.B;
    const Eigen::MatrixXd m_sqrt = cov_sqrt(noise.process_cov());
    const Eigen::MatrixXd n_sqrt = cov_sqrt(noise.observation_cov());
    const Eigen::MatrixXd x0_sqrt = cov_sqrt(noise.initial_cov);
    std::normal_distribution<double> normal(0.0, 1.0);

    ExecutionTrace trace;
    trace.states.reserve(T + 1);
    Eigen::VectorXd dev = draw(x0_sqrt, normal, rng);
    Eigen::VectorXd est = Eigen::VectorXd::Zero(2 * d);
    trace.states.push_back(realize(arm, traj.waypoints[0], dev));
    trace.deviations.push_back(dev);

    for (int t = 1; t <= T; ++t) {
        const bool noisy = options.noise_off_after < 0 || t <= options.noise_off_after;
        const Eigen::VectorXd u = gains.K[t - 1] * est;
        trace.controls.push_back(u);
        dev = A * dev + B * u;
        if (noisy) dev += draw(m_sqrt, normal, rng);
        const Configuration q = realize(arm, traj.waypoints[t], dev);

        Eigen::VectorXd z;
        if (noise.observation == ObservationKind::joint_encoders) {
            z = dev;
        } else {
            z = ee_pose(arm, q) - ee_pose(arm, traj.waypoints[t]);
        }
        if (noisy) z += draw(n_sqrt, normal, rng);

        const Eigen::VectorXd predicted = A * est + B * u;
        est = predicted + gains.kalman.L[t] * (z - gains.kalman.H[t] * predicted);
        trace.states.push_back(q);
        trace.deviations.push_back(dev);
    }

    for (int t = 0; t <= T; ++t) {
        if (in_collision(arm, env, trace.states[t])) {
            trace.collided_discrete = true;
            trace.collided_continuous = true;
            if (!trace.first_collision) trace.first_collision = t;
            break;
        }
    }
    if (!trace.collided_continuous) {
        for (int t = 0; t < T; ++t) {
            if (!segment_collision_free(arm, env, trace.states[t], trace.states[t + 1], options.edge_points + 1)) {
                trace.collided_continuous = true;
                trace.first_collision = t;
                break;
            }
        }
    }
    return trace;
}

ExecutionStats evaluate(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm, const Environment& env,
                        const LqrWeights& weights, int n_exec, double delta, std::uint64_t seed, int workers) {
    if (n_exec < 1) throw std::invalid_argument("n_exec must be at least 1");
    const Gains gains = compute_gains(traj, noise, arm, weights);
    std::vector<char> discrete(n_exec), continuous(n_exec);
    std::vector<double> length(n_exec);
    parallel_for(static_cast<std::size_t>(n_exec), workers, [&](std::size_t i) {
        auto rng = substream(seed, i);
        const ExecutionTrace tr = execute_noisy(traj, noise, arm, env, gains, rng);
        discrete[i] = tr.collided_discrete;
        continuous[i] = tr.collided_continuous;
        length[i] = path_length(tr.states);
    });
    ExecutionStats s;
    s.n_executions = n_exec;
    int nd = 0;
    int nc = 0;
    double total_length = 0.0;
    for (int i = 0; i < n_exec; ++i) {
        nd += discrete[i];
        nc += continuous[i];
        total_length += length[i];
    }
    s.discrete_rate = static_cast<double>(nd) / n_exec;
    s.continuous_rate = static_cast<double>(nc) / n_exec;
    s.satisfied_discrete = s.discrete_rate <= kSatisfactionFactor * delta;
    s.satisfied_continuous = s.continuous_rate <= kSatisfactionFactor * delta;
    s.mean_path_length = total_length / n_exec;
    return s;
}

double binomial_cdf(int k, int n, double p) {
    if (n < 0 || k < 0 || k > n || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_cdf: bad arguments");
    if (k == n || p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lgn = std::lgamma(n + 1.0);
    double total = 0.0;
    for (int i = 0; i <= k; ++i) {
        total += std::exp(lgn - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * lp + (n - i) * lq);
    }
    return std::min(1.0, total);
}

}  // namespace ccmp
