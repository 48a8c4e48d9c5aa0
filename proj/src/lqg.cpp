#include "ccmp/lqg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace ccmp {

namespace {

void check_psd(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + " must be square");
    if (!m.isApprox(m.transpose(), 1e-9) && (m - m.transpose()).norm() > 1e-12) {
        throw std::invalid_argument(std::string(what) + " must be symmetric");
    }
    if (m.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, m.norm())) {
        throw std::invalid_argument(std::string(what) + " must be positive semidefinite");
    }
}

}  // namespace

NoiseModel NoiseModel::joint_encoders(int dof, double sigma, double dt) {
    NoiseModel nm;
    const double sv = sigma / dt;
    nm.sigma_x = Eigen::VectorXd::Constant(dof, sigma);
    nm.sigma_v = Eigen::VectorXd::Constant(dof, sv);
    nm.observation = ObservationKind::joint_encoders;
    Eigen::Matrix2d per_joint = Eigen::Vector2d(sigma * sigma, sv * sv).asDiagonal();
    nm.encoder_cov.assign(dof, per_joint);
    nm.initial_cov = Eigen::MatrixXd::Zero(2 * dof, 2 * dof);
    for (int j = 0; j < dof; ++j) nm.initial_cov.block<2, 2>(2 * j, 2 * j) = per_joint;
    return nm;
}

NoiseModel NoiseModel::end_effector(int dof, double sigma, double dt) {
    NoiseModel nm = joint_encoders(dof, sigma, dt);
    nm.observation = ObservationKind::ee_pose;
    nm.encoder_cov.clear();
    nm.ee_cov = Eigen::Vector3d(0.005 * 0.005, 0.005 * 0.005, 0.01 * 0.01).asDiagonal();
    return nm;
}

NoiseModel NoiseModel::zero(int dof, ObservationKind kind) {
    NoiseModel nm;
    nm.sigma_x = Eigen::VectorXd::Zero(dof);
    nm.sigma_v = Eigen::VectorXd::Zero(dof);
    nm.observation = kind;
    if (kind == ObservationKind::joint_encoders) nm.encoder_cov.assign(dof, Eigen::Matrix2d::Zero());
    nm.initial_cov = Eigen::MatrixXd::Zero(2 * dof, 2 * dof);
    return nm;
}

Eigen::MatrixXd NoiseModel::process_cov() const {
    const int d = dof();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    for (int j = 0; j < d; ++j) {
        m(pos_index(j), pos_index(j)) = sigma_x[j] * sigma_x[j];
        m(vel_index(j), vel_index(j)) = sigma_v[j] * sigma_v[j];
    }
    return m;
}

Eigen::MatrixXd NoiseModel::observation_cov() const {
    if (observation == ObservationKind::ee_pose) return ee_cov;
    const int d = dof();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    for (int j = 0; j < d; ++j) m.block<2, 2>(2 * j, 2 * j) = encoder_cov[j];
    return m;
}

void NoiseModel::validate() const {
    const int d = dof();
    if (sigma_v.size() != d) throw std::invalid_argument("sigma_v must have one entry per joint");
    if ((sigma_x.array() < 0.0).any() || (sigma_v.array() < 0.0).any()) {
        throw std::invalid_argument("noise stds must be non-negative");
    }
    if (initial_cov.rows() != 2 * d || initial_cov.cols() != 2 * d) {
        throw std::invalid_argument("initial covariance must be 2d x 2d");
    }
    check_psd(initial_cov, "initial covariance");
    if (observation == ObservationKind::joint_encoders) {
        if (static_cast<int>(encoder_cov.size()) != d) {
            throw std::invalid_argument("one encoder covariance per joint required");
        }
        for (const auto& c : encoder_cov) check_psd(c, "encoder covariance");
    } else {
        check_psd(ee_cov, "end-effector covariance");
    }
}

LqrWeights LqrWeights::identity(int dof) {
    return {Eigen::MatrixXd::Identity(2 * dof, 2 * dof), Eigen::MatrixXd::Identity(dof, dof)};
}

LinearModel double_integrator(int dof, double dt) {
    LinearModel m{Eigen::MatrixXd::Identity(2 * dof, 2 * dof), Eigen::MatrixXd::Zero(2 * dof, dof)};
    for (int j = 0; j < dof; ++j) {
        m.A(pos_index(j), vel_index(j)) = dt;
        m.B(pos_index(j), j) = 0.5 * dt * dt;
        m.B(vel_index(j), j) = dt;
    }
    return m;
}

Eigen::MatrixXd observation_matrix(const NoiseModel& noise, const ArmModel& arm, const Configuration& q) {
    const int d = noise.dof();
    if (noise.observation == ObservationKind::joint_encoders) return Eigen::MatrixXd::Identity(2 * d, 2 * d);
    const Eigen::MatrixXd jac = ee_jacobian(arm, q);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 2 * d);
    for (int j = 0; j < d; ++j) h.col(pos_index(j)) = jac.col(j);
    return h;
}

std::vector<Eigen::MatrixXd> lqr_gains(const Trajectory& traj, const LqrWeights& weights) {
    const auto d = weights.R.rows();
    if (weights.Q.rows() != 2 * d || weights.Q.cols() != 2 * d || weights.R.cols() != d) {
        throw std::invalid_argument("LQR weight dimensions inconsistent");
    }
    const LinearModel m = double_integrator(static_cast<int>(d), traj.dt);
    const int T = traj.steps();
    std::vector<Eigen::MatrixXd> K(T);
    Eigen::MatrixXd P = weights.Q;
    for (int t = T - 1; t >= 0; --t) {
        const Eigen::MatrixXd S = weights.R + m.B.transpose() * P * m.B;
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) throw LqgError("singular control weight in Riccati recursion");
        K[t] = -llt.solve(m.B.transpose() * P * m.A);
        P = weights.Q + m.A.transpose() * P * (m.A + m.B * K[t]);
        P = 0.5 * (P + P.transpose());
    }
    return K;
}

KalmanGains kalman_gains(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm) {
    noise.validate();
    const int d = noise.dof();
    const int T = traj.steps();
    const LinearModel m = double_integrator(d, traj.dt);
    const Eigen::MatrixXd M = noise.process_cov();
    const Eigen::MatrixXd N = noise.observation_cov();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2 * d, 2 * d);
    KalmanGains kg;
    kg.L.resize(T + 1);
    kg.H.resize(T + 1);
    kg.P_prior.resize(T + 1);
    kg.P_post.resize(T + 1);
    kg.H[0] = observation_matrix(noise, arm, traj.waypoints[0]);
    kg.L[0] = Eigen::MatrixXd::Zero(2 * d, kg.H[0].rows());
    kg.P_prior[0] = noise.initial_cov;
    kg.P_post[0] = noise.initial_cov;
    for (int t = 1; t <= T; ++t) {
        const Eigen::MatrixXd& H = kg.H[t] = observation_matrix(noise, arm, traj.waypoints[t]);
        const Eigen::MatrixXd prior = symmetrize_psd(m.A * kg.P_post[t - 1] * m.A.transpose() + M);
        const Eigen::MatrixXd S = H * prior * H.transpose() + N;
        const Eigen::MatrixXd PHt = prior * H.transpose();
        if (PHt.norm() == 0.0) {
            kg.L[t] = Eigen::MatrixXd::Zero(2 * d, H.rows());
        } else {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
            lu.setThreshold(1e-14);
            if (!lu.isInvertible()) throw LqgError("innovation covariance is singular");
            kg.L[t] = lu.solve(PHt.transpose()).transpose();
        }
        kg.P_prior[t] = prior;
        // Joseph form keeps the update symmetric and PSD.
        const Eigen::MatrixXd IKH = I - kg.L[t] * H;
        kg.P_post[t] = symmetrize_psd(IKH * prior * IKH.transpose() + kg.L[t] * N * kg.L[t].transpose());
    }
    return kg;
}

Gains compute_gains(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm, const LqrWeights& weights) {
    if (noise.dof() != arm.dof()) throw std::invalid_argument("noise model and arm dimensions differ");
    return {double_integrator(arm.dof(), traj.dt), lqr_gains(traj, weights), kalman_gains(traj, noise, arm)};
}

BeliefTrajectory propagate(const Trajectory& traj, const NoiseModel& noise, const ArmModel& arm,
                           const LqrWeights& weights) {
    return propagate(traj, noise, compute_gains(traj, noise, arm, weights));
}

BeliefTrajectory propagate(const Trajectory& traj, const NoiseModel& noise, const Gains& gains) {
    const int d = noise.dof();
    const int n = 2 * d;
    const int T = traj.steps();
    if (static_cast<int>(gains.K.size()) != T || static_cast<int>(gains.kalman.L.size()) != T + 1) {
        throw std::invalid_argument("gains were computed for a different trajectory");
    }
    for (const auto& q : traj.waypoints) {
        if (q.size() != d) throw std::invalid_argument("trajectory and noise model dimensions differ");
    }
    const Eigen::MatrixXd& A = gains.model.A;
    const Eigen::MatrixXd& B = gains.model.B;
    const Eigen::MatrixXd M = noise.process_cov();
    const Eigen::MatrixXd N = noise.observation_cov();
    const int k = static_cast<int>(N.rows());

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + k, n + k);
    G.topLeftCorner(n, n) = M;
    G.bottomRightCorner(k, k) = N;

    BeliefTrajectory bt;
    bt.joint_cov.resize(T + 1);
    bt.state_control_cov.resize(T + 1);
    bt.mean = traj.waypoints;
    bt.config_cov.resize(T + 1);
    bt.sigma.resize(T + 1);

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    C.topLeftCorner(n, n) = noise.initial_cov;
    bt.joint_cov[0] = C;
    Eigen::MatrixXd E(2 * n, 2 * n);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * n, n + k);
    for (int t = 1; t <= T; ++t) {
        const Eigen::MatrixXd& K = gains.K[t - 1];
        const Eigen::MatrixXd& L = gains.kalman.L[t];
        const Eigen::MatrixXd& H = gains.kalman.H[t];
        const Eigen::MatrixXd LHA = L * H * A;
        E.topLeftCorner(n, n) = A;
        E.topRightCorner(n, n) = B * K;
        E.bottomLeftCorner(n, n) = LHA;
        E.bottomRightCorner(n, n) = A + B * K - LHA;
        F.topLeftCorner(n, n).setIdentity();
        F.bottomLeftCorner(n, n) = L * H;
        F.bottomRightCorner(n, k) = L;
        C = symmetrize_psd(E * C * E.transpose() + F * G * F.transpose());
        bt.joint_cov[t] = C;
    }
    for (int t = 0; t <= T; ++t) {
        const Eigen::MatrixXd& Ct = bt.joint_cov[t];
        if (t < T) {
            Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n + d, 2 * n);
            lambda.topLeftCorner(n, n).setIdentity();
            lambda.bottomRightCorner(d, n) = gains.K[t];
            bt.state_control_cov[t] = lambda * Ct * lambda.transpose();
        } else {
            bt.state_control_cov[t] = Ct.topLeftCorner(n, n);
        }
        Eigen::MatrixXd cc(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) cc(i, j) = Ct(pos_index(i), pos_index(j));
        }
        bt.config_cov[t] = cc;
        bt.sigma[t] = cc.diagonal().cwiseMax(0.0).cwiseSqrt();
    }
    return bt;
}

Eigen::MatrixXd symmetrize_psd(const Eigen::MatrixXd& S) {
    Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    if (sym.size() == 0) return sym;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sym);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= 0.0).all() && ldlt.isPositive()) {
        // LDLT can accept tiny indefinite matrices through pivoting noise; confirm
        // with the smallest eigenvalue only when D has near-zero entries.
        if (ldlt.vectorD().minCoeff() > 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) return sym;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& vals = eig.eigenvalues();
    if (vals.minCoeff() >= 0.0) return sym;
    const Eigen::VectorXd clamped = vals.cwiseMax(0.0);
    Eigen::MatrixXd out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace ccmp
