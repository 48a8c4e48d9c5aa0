#include "ccmp/trajopt.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace ccmp {

namespace {

Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

struct PointSegment {
    double distance{0.0};
    Vec2 grad_point{0.0, 0.0};
    Vec2 grad_a{0.0, 0.0};
    Vec2 grad_b{0.0, 0.0};
};

// Distance from p to segment ab with gradients; all gradients are zero when
// p lies on the segment.
PointSegment point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 diff = p - (a + s * ab);
    PointSegment out;
    out.distance = diff.norm();
    if (out.distance > 0.0) {
        const Vec2 u = diff / out.distance;
        out.grad_point = u;
        out.grad_a = -(1.0 - s) * u;
        out.grad_b = -s * u;
    }
    return out;
}

// Signed distance from p to a convex polygon (negative inside) with its
// gradient in grad_point.
PointSegment point_polygon(const Vec2& p, const Obstacle& obs) {
    const auto normals = obs.normals();
    const auto offsets = obs.offsets();
    std::size_t best_edge = 0;
    double best_plane = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < normals.size(); ++k) {
        const double v = normals[k].dot(p) - offsets[k];
        if (v > best_plane) {
            best_plane = v;
            best_edge = k;
        }
    }
    PointSegment out;
    if (best_plane <= 0.0) {
        out.distance = best_plane;
        out.grad_point = normals[best_edge];
        return out;
    }
    const auto& verts = std::get<ConvexPolygon>(obs.shape()).vertices;
    out.distance = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < verts.size(); ++k) {
        const PointSegment ps = point_segment(p, verts[k], verts[(k + 1) % verts.size()]);
        if (ps.distance < out.distance) out = ps;
    }
    return out;
}

// d(signed distance of link j vs obstacle)/dq by central differences; used
// only where the closest feature is not unique.
Eigen::VectorXd fd_link_gradient(const ArmModel& arm, const Configuration& q, int link, const Obstacle& obs) {
    constexpr double h = 1e-7;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(arm.dof());
    for (int i = 0; i <= link; ++i) {
        Configuration qp = q;
        Configuration qm = q;
        qp[i] += h;
        qm[i] -= h;
        const double fp = signed_distance(link_capsules(arm, qp)[link], obs);
        const double fm = signed_distance(link_capsules(arm, qm)[link], obs);
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Solves the symmetric block-tridiagonal system with diagonal blocks `diag`
// and off-diagonal blocks -2I.
std::vector<Eigen::VectorXd> solve_block_tridiagonal(std::vector<Eigen::MatrixXd> diag,
                                                     std::vector<Eigen::VectorXd> rhs) {
    const std::size_t n = diag.size();
    std::vector<Eigen::LLT<Eigen::MatrixXd>> fact(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            diag[t] -= 4.0 * fact[t - 1].solve(Eigen::MatrixXd::Identity(diag[t].rows(), diag[t].cols()));
            rhs[t] += 2.0 * fact[t - 1].solve(rhs[t - 1]);
        }
        fact[t].compute(diag[t]);
    }
    std::vector<Eigen::VectorXd> x(n);
    for (std::size_t t = n; t-- > 0;) {
        if (t + 1 < n) rhs[t] += 2.0 * x[t + 1];
        x[t] = fact[t].solve(rhs[t]);
    }
    return x;
}

}  // namespace

void ConflictSet::add(int waypoint, double step) { entries_[waypoint] += step; }

double ConflictSet::margin(int waypoint) const {
    const auto it = entries_.find(waypoint);
    return it == entries_.end() ? 0.0 : it->second;
}

std::vector<double> waypoint_margins(int n_waypoints, const ConflictSet& conflicts, const OptimizerParams& params) {
    std::vector<double> margins(n_waypoints, params.base_margin);
    for (int t = 0; t < n_waypoints; ++t) margins[t] += conflicts.margin(t);
    return margins;
}

PenalizedObjective::PenalizedObjective(const ArmModel& arm, const Environment& env, std::vector<double> margins,
                                       double mu, const OptimizerParams& params)
    : arm_(&arm), env_(&env), margins_(std::move(margins)), mu_(mu), params_(params) {}

double PenalizedObjective::penalty_at(const Configuration& q, double target, Eigen::VectorXd* grad,
                                      Eigen::MatrixXd* gn) const {
    const ArmModel& arm = *arm_;
    const int d = arm.dof();
    const ForwardKinematics fk = forward_kinematics(arm, q);
    double total = 0.0;
    Eigen::VectorXd gq(d);

    auto accumulate = [&](double h, const Eigen::VectorXd& sd_grad) {
        total += h * h;
        if (grad != nullptr) *grad -= 2.0 * h * sd_grad;
        if (gn != nullptr) *gn += 2.0 * sd_grad * sd_grad.transpose();
    };

    for (int j = 0; j < d; ++j) {
        const Capsule cap{fk.joints[j], fk.joints[j + 1], arm.link_radius()};
        const double reach = cap.radius + target;
        const Vec2 lo = cap.a.cwiseMin(cap.b) - Vec2::Constant(reach);
        const Vec2 hi = cap.a.cwiseMax(cap.b) + Vec2::Constant(reach);
        for (const auto& obs : env_->obstacles()) {
            if ((lo.array() > obs.bbox_max().array()).any() || (hi.array() < obs.bbox_min().array()).any()) {
                continue;
            }
            // Chain rule from endpoint gradients to joint space.
            auto to_joints = [&](const Vec2& ga, const Vec2& gb) {
                gq.setZero();
                for (int i = 0; i <= j; ++i) {
                    gq[i] += ga.dot(perp(fk.joints[j] - fk.joints[i]));
                    gq[i] += gb.dot(perp(fk.joints[j + 1] - fk.joints[i]));
                }
                return gq;
            };
            if (std::holds_alternative<Circle>(obs.shape())) {
                const DistanceResult res = signed_distance_with_gradient(cap, obs);
                const double h = target - res.distance;
                if (h <= 0.0) continue;
                if (grad == nullptr && gn == nullptr) {
                    total += h * h;
                    continue;
                }
                accumulate(h, res.degenerate ? fd_link_gradient(arm, q, j, obs) : to_joints(res.grad_a, res.grad_b));
                continue;
            }
            // Polygons: one hinge per smooth distance feature, so the penalty
            // has no kink where the closest feature switches.
            const auto& verts = std::get<ConvexPolygon>(obs.shape()).vertices;
            const double clear = target + cap.radius;
            for (int end = 0; end < 2; ++end) {
                const PointSegment ps = point_polygon(end == 0 ? cap.a : cap.b, obs);
                const double h = clear - ps.distance;
                if (h <= 0.0) continue;
                if (grad == nullptr && gn == nullptr) {
                    total += h * h;
                    continue;
                }
                accumulate(h, end == 0 ? to_joints(ps.grad_point, Vec2::Zero()) : to_joints(Vec2::Zero(), ps.grad_point));
            }
            for (const Vec2& v : verts) {
                const PointSegment pv = point_segment(v, cap.a, cap.b);
                const double h = clear - pv.distance;
                if (h <= 0.0 || pv.distance <= 0.0) continue;
                if (grad == nullptr && gn == nullptr) {
                    total += h * h;
                    continue;
                }
                accumulate(h, to_joints(pv.grad_a, pv.grad_b));
            }
            // Penetration adds (target - sd)^2 - target^2 - sd, which is zero at contact.
            const DistanceResult res = signed_distance_with_gradient(cap, obs);
            if (res.distance >= 0.0) continue;
            const double h = target - res.distance;
            total += h * h - target * target - res.distance;
            if (grad == nullptr && gn == nullptr) continue;
            const Eigen::VectorXd g_sd = res.degenerate ? fd_link_gradient(arm, q, j, obs) : to_joints(res.grad_a, res.grad_b);
            if (grad != nullptr) *grad -= (2.0 * h + 1.0) * g_sd;
            if (gn != nullptr) *gn += 2.0 * g_sd * g_sd.transpose();
        }
    }

    const Bounds& bounds = env_->bounds();
    for (int k = 1; k <= d; ++k) {
        const Vec2& p = fk.joints[k];
        const double inside = bounds.inside_distance(p);
        if (inside >= 0.0) continue;
        Vec2 inward;
        if (inside == p.x() - bounds.lo.x()) {
            inward = {1.0, 0.0};
        } else if (inside == bounds.hi.x() - p.x()) {
            inward = {-1.0, 0.0};
        } else if (inside == p.y() - bounds.lo.y()) {
            inward = {0.0, 1.0};
        } else {
            inward = {0.0, -1.0};
        }
        gq.setZero();
        for (int i = 0; i < k; ++i) gq[i] = inward.dot(perp(p - fk.joints[i]));
        accumulate(-inside, gq);
    }
    return total;
}

double PenalizedObjective::value(const std::vector<Configuration>& waypoints) const {
    double total = squared_displacement(waypoints);
    const int n = static_cast<int>(waypoints.size());
    for (int t = 1; t + 1 < n; ++t) {
        total += mu_ * penalty_at(waypoints[t], margins_[t] + params_.margin_slack, nullptr, nullptr);
    }
    const int es = params_.edge_samples;
    for (int t = 0; t + 1 < n && es > 0; ++t) {
        const double target = std::min(margins_[t], margins_[t + 1]) + params_.margin_slack;
        for (int k = 1; k <= es; ++k) {
            const double s = static_cast<double>(k) / (es + 1);
            const Configuration q = (1.0 - s) * waypoints[t] + s * waypoints[t + 1];
            total += mu_ * penalty_at(q, target, nullptr, nullptr);
        }
    }
    return total;
}

double PenalizedObjective::value_and_gradient(const std::vector<Configuration>& waypoints,
                                              std::vector<Eigen::VectorXd>& grad,
                                              std::vector<Eigen::MatrixXd>* hessian_blocks) const {
    const int n = static_cast<int>(waypoints.size());
    const int d = arm_->dof();
    grad.assign(n, Eigen::VectorXd::Zero(d));
    if (hessian_blocks != nullptr) hessian_blocks->assign(n, Eigen::MatrixXd::Zero(d, d));
    double total = squared_displacement(waypoints);
    for (int t = 1; t + 1 < n; ++t) {
        grad[t] += 2.0 * (2.0 * waypoints[t] - waypoints[t - 1] - waypoints[t + 1]);
    }
    Eigen::VectorXd g(d);
    Eigen::MatrixXd gn(d, d);
    for (int t = 1; t + 1 < n; ++t) {
        g.setZero();
        gn.setZero();
        total += mu_ * penalty_at(waypoints[t], margins_[t] + params_.margin_slack, &g, &gn);
        grad[t] += mu_ * g;
        if (hessian_blocks != nullptr) (*hessian_blocks)[t] += mu_ * gn;
    }
    const int es = params_.edge_samples;
    for (int t = 0; t + 1 < n && es > 0; ++t) {
        const double target = std::min(margins_[t], margins_[t + 1]) + params_.margin_slack;
        for (int k = 1; k <= es; ++k) {
            const double s = static_cast<double>(k) / (es + 1);
            const Configuration q = (1.0 - s) * waypoints[t] + s * waypoints[t + 1];
            g.setZero();
            gn.setZero();
            total += mu_ * penalty_at(q, target, &g, &gn);
            if (t >= 1) {
                grad[t] += mu_ * (1.0 - s) * g;
                if (hessian_blocks != nullptr) (*hessian_blocks)[t] += mu_ * (1.0 - s) * (1.0 - s) * gn;
            }
            if (t + 1 <= n - 2) {
                grad[t + 1] += mu_ * s * g;
                if (hessian_blocks != nullptr) (*hessian_blocks)[t + 1] += mu_ * s * s * gn;
            }
        }
    }
    return total;
}

double PenalizedObjective::worst_margin_violation(const std::vector<Configuration>& waypoints) const {
    double worst = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(waypoints.size());
    for (int t = 1; t + 1 < n; ++t) {
        const auto caps = link_capsules(*arm_, waypoints[t]);
        for (const auto& cap : caps) {
            for (const auto& obs : env_->obstacles()) {
                worst = std::min(worst, signed_distance(cap, obs) - margins_[t]);
            }
            worst = std::min({worst, env_->bounds().inside_distance(cap.a), env_->bounds().inside_distance(cap.b)});
        }
    }
    return worst;
}

Trajectory optimize(const Trajectory& seed, const ConflictSet& conflicts, const ArmModel& arm,
                    const Environment& env, const OptimizerParams& params, OptimizeReport* report) {
    return optimize_with_margins(seed, waypoint_margins(seed.size(), conflicts, params), arm, env, params, report);
}

Trajectory optimize_with_margins(const Trajectory& seed, const std::vector<double>& margins, const ArmModel& arm,
                                 const Environment& env, const OptimizerParams& params, OptimizeReport* report) {
    if (seed.size() < 2) throw std::invalid_argument("trajectory needs at least 2 waypoints");
    if (static_cast<int>(margins.size()) != seed.size()) throw std::invalid_argument("one margin per waypoint");
    Trajectory traj = seed;
    const int n = traj.size();
    const int d = arm.dof();
    OptimizeReport local;
    OptimizeReport& rep = report != nullptr ? *report : local;
    rep = {};
    if (n == 2) return traj;

    for (int t = 1; t + 1 < n; ++t) traj.waypoints[t] = clamp(arm, traj.waypoints[t]);

    double mu = params.penalty_weight;
    std::vector<Eigen::VectorXd> grad;
    std::vector<Eigen::MatrixXd> gn_blocks;
    for (int outer = 0; outer < params.max_outer_iterations; ++outer) {
        const PenalizedObjective objective(arm, env, margins, mu, params);
        rep.outer_iterations = outer + 1;
        rep.final_mu = mu;
        double f = objective.value_and_gradient(traj.waypoints, grad, &gn_blocks);
        for (int it = 0; it < params.max_inner_iterations; ++it) {
            rep.objective_trace.push_back(f);
            ++rep.inner_iterations;
            std::vector<Eigen::MatrixXd> diag(n - 2);
            std::vector<Eigen::VectorXd> rhs(n - 2);
            for (int t = 1; t + 1 < n; ++t) {
                diag[t - 1] = gn_blocks[t] + Eigen::MatrixXd::Identity(d, d) * (4.0 + 1e-9);
                rhs[t - 1] = -grad[t];
            }
            const auto step = solve_block_tridiagonal(std::move(diag), std::move(rhs));

            double alpha = 1.0;
            bool accepted = false;
            std::vector<Configuration> candidate = traj.waypoints;
            double f_new = f;
            while (alpha > 1e-10) {
                double slope = 0.0;
                for (int t = 1; t + 1 < n; ++t) {
                    candidate[t] = clamp(arm, traj.waypoints[t] + alpha * step[t - 1]);
                    slope += grad[t].dot(candidate[t] - traj.waypoints[t]);
                }
                f_new = objective.value(candidate);
                if (f_new <= f + 1e-4 * slope && f_new <= f) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            assert(f_new <= f);
            traj.waypoints.swap(candidate);
            const double decrease = f - f_new;
            f = objective.value_and_gradient(traj.waypoints, grad, &gn_blocks);
            if (decrease <= params.tolerance * std::max(1.0, std::abs(f))) break;
        }
        rep.last_iterate = traj.waypoints;
        if (objective.worst_margin_violation(traj.waypoints) >= -params.feasibility_tol) return traj;
        mu *= params.penalty_growth;
    }
    throw OptimizerInfeasible("collision margins not met after " + std::to_string(params.max_outer_iterations) +
                              " penalty escalations");
}

std::vector<int> unsafe_edges(const Trajectory& traj, const ArmModel& arm, const Environment& env, int points) {
    std::vector<int> out;
    for (int t = 0; t + 1 < traj.size(); ++t) {
        if (!segment_collision_free(arm, env, traj.waypoints[t], traj.waypoints[t + 1], points + 1)) {
            out.push_back(t);
        }
    }
    return out;
}

bool edge_safe(const Trajectory& traj, const ArmModel& arm, const Environment& env, int points) {
    for (int t = 0; t + 1 < traj.size(); ++t) {
        if (!segment_collision_free(arm, env, traj.waypoints[t], traj.waypoints[t + 1], points + 1)) return false;
    }
    return true;
}

}  // namespace ccmp
