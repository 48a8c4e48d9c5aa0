#include "ccmp/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace ccmp {

namespace {

void check_dim(const ArmModel& arm, const Configuration& q) {
    if (q.size() != arm.dof()) {
        throw std::invalid_argument("configuration has " + std::to_string(q.size()) +
                                    " entries, arm has " + std::to_string(arm.dof()) + " joints");
    }
}

}  // namespace

ArmModel::ArmModel(std::vector<double> link_lengths, double link_radius, Vec2 base,
                   Eigen::VectorXd joint_lower, Eigen::VectorXd joint_upper)
    : lengths_(std::move(link_lengths)),
      radius_(link_radius),
      base_(base),
      lower_(std::move(joint_lower)),
      upper_(std::move(joint_upper)) {
    if (lengths_.empty()) throw std::invalid_argument("arm needs at least one link");
    if (!(radius_ > 0.0)) throw std::invalid_argument("link radius must be positive");
    const auto d = static_cast<Eigen::Index>(lengths_.size());
    if (lower_.size() != d || upper_.size() != d) {
        throw std::invalid_argument("joint limit vectors must have one entry per link");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(lengths_[j] > 0.0)) throw std::invalid_argument("link lengths must be positive");
        if (!(lower_[j] < upper_[j])) throw std::invalid_argument("joint lower limit must be below upper");
    }
    reach_.assign(lengths_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t j = lengths_.size(); j-- > 0;) {
        acc += lengths_[j];
        reach_[j] = acc;
    }
}

ArmModel ArmModel::uniform(std::vector<double> link_lengths, double link_radius, Vec2 base, double limit) {
    const auto d = static_cast<Eigen::Index>(link_lengths.size());
    return ArmModel(std::move(link_lengths), link_radius, base, Eigen::VectorXd::Constant(d, -limit),
                    Eigen::VectorXd::Constant(d, limit));
}

ForwardKinematics forward_kinematics(const ArmModel& arm, const Configuration& q) {
    check_dim(arm, q);
    ForwardKinematics fk;
    fk.joints.reserve(arm.dof() + 1);
    Vec2 p = arm.base();
    fk.joints.push_back(p);
    double angle = 0.0;
    for (int j = 0; j < arm.dof(); ++j) {
        angle += q[j];
        p += arm.link_lengths()[j] * Vec2(std::cos(angle), std::sin(angle));
        fk.joints.push_back(p);
    }
    fk.ee = {p.x(), p.y(), angle};
    return fk;
}

Eigen::MatrixXd ee_jacobian(const ArmModel& arm, const Configuration& q) {
    const ForwardKinematics fk = forward_kinematics(arm, q);
    const Vec2& tip = fk.joints.back();
    Eigen::MatrixXd jac(3, arm.dof());
    for (int i = 0; i < arm.dof(); ++i) {
        const Vec2 r = tip - fk.joints[i];
        jac(0, i) = -r.y();
        jac(1, i) = r.x();
        jac(2, i) = 1.0;
    }
    return jac;
}

std::vector<Capsule> link_capsules(const ArmModel& arm, const Configuration& q) {
    const ForwardKinematics fk = forward_kinematics(arm, q);
    std::vector<Capsule> caps;
    caps.reserve(arm.dof());
    for (int j = 0; j < arm.dof(); ++j) caps.push_back({fk.joints[j], fk.joints[j + 1], arm.link_radius()});
    return caps;
}

Configuration clamp(const ArmModel& arm, const Configuration& q) {
    check_dim(arm, q);
    return q.cwiseMax(arm.lower()).cwiseMin(arm.upper());
}

bool within_limits(const ArmModel& arm, const Configuration& q) {
    check_dim(arm, q);
    return (q.array() >= arm.lower().array()).all() && (q.array() <= arm.upper().array()).all();
}

bool in_collision(const ArmModel& arm, const Environment& env, const Configuration& q) {
    const auto caps = link_capsules(arm, q);
    return in_collision(caps, env);
}

double clearance(const ArmModel& arm, const Environment& env, const Configuration& q) {
    const auto caps = link_capsules(arm, q);
    return clearance(caps, env);
}

double sweep_bound(const ArmModel& arm, const Configuration& q0, const Configuration& q1) {
    double bound = 0.0;
    for (int i = 0; i < arm.dof(); ++i) bound += arm.reach()[i] * std::abs(q1[i] - q0[i]);
    return bound;
}

bool segment_collision_free(const ArmModel& arm, const Environment& env, const Configuration& q0,
                            const Configuration& q1, int n_steps) {
    if (n_steps < 1) n_steps = 1;
    const double step_move = sweep_bound(arm, q0, q1) / n_steps;
    int k = 0;
    while (k <= n_steps) {
        const double s = static_cast<double>(k) / n_steps;
        const Configuration q = q0 + s * (q1 - q0);
        const double c = clearance(arm, env, q);
        if (c < 0.0) return false;
        int advance = 1;
        if (step_move > 0.0) {
            const double free_steps = std::ceil(c / step_move) - 1.0;
            if (free_steps >= 1.0) {
                advance = free_steps > n_steps ? n_steps + 1 : static_cast<int>(free_steps) + 1;
            }
        } else {
            return true;
        }
        k += advance;
    }
    return true;
}

Configuration sample_uniform(const ArmModel& arm, std::mt19937_64& rng) {
    Configuration q(arm.dof());
    for (int j = 0; j < arm.dof(); ++j) {
        std::uniform_real_distribution<double> dist(arm.lower()[j], arm.upper()[j]);
        q[j] = dist(rng);
    }
    return q;
}

Configuration sample_collision_free(const ArmModel& arm, const Environment& env, std::mt19937_64& rng,
                                    int max_attempts) {
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Configuration q = sample_uniform(arm, rng);
        if (!in_collision(arm, env, q)) return q;
    }
    throw SamplingCapExceeded("no collision-free configuration after " + std::to_string(max_attempts) +
                              " draws");
}

}  // namespace ccmp
