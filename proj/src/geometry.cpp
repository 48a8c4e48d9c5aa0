#include "ccmp/geometry.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ccmp {

namespace {

double cross(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

struct SegmentParam {
    double s;  // parameter on the capsule segment
    double u;  // parameter on the other segment
};

// Closest points between segments p(s) = a + s(b-a) and q(u) = c + u(d-c).
SegmentParam closest_segment_params(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const Vec2 d1 = b - a;
    const Vec2 d2 = d - c;
    const Vec2 r = a - c;
    const double aa = d1.squaredNorm();
    const double ee = d2.squaredNorm();
    const double ff = d2.dot(r);
    constexpr double tiny = 1e-300;
    if (aa <= tiny && ee <= tiny) return {0.0, 0.0};
    if (aa <= tiny) return {0.0, std::clamp(ff / ee, 0.0, 1.0)};
    const double cc = d1.dot(r);
    if (ee <= tiny) return {std::clamp(-cc / aa, 0.0, 1.0), 0.0};
    const double bb = d1.dot(d2);
    const double denom = aa * ee - bb * bb;
    double s = denom > 0.0 ? std::clamp((bb * ff - cc * ee) / denom, 0.0, 1.0) : 0.0;
    double u = (bb * s + ff) / ee;
    if (u < 0.0) {
        u = 0.0;
        s = std::clamp(-cc / aa, 0.0, 1.0);
    } else if (u > 1.0) {
        u = 1.0;
        s = std::clamp((bb - cc) / aa, 0.0, 1.0);
    }
    return {s, u};
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross(d - c, a - c);
    const double d2 = cross(d - c, b - c);
    const double d3 = cross(b - a, c - a);
    const double d4 = cross(b - a, d - a);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

DistanceResult circle_distance(const Capsule& cap, const Circle& circle) {
    const Vec2 d = cap.b - cap.a;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((circle.center - cap.a).dot(d) / len2, 0.0, 1.0) : 0.0;
    const Vec2 p = cap.a + s * d;
    const Vec2 diff = p - circle.center;
    const double dist = diff.norm();
    DistanceResult out;
    out.distance = dist - circle.radius - cap.radius;
    if (dist > 0.0) {
        const Vec2 n = diff / dist;
        out.grad_a = (1.0 - s) * n;
        out.grad_b = s * n;
    } else {
        out.degenerate = true;
    }
    return out;
}

// Half-plane value of edge i at point p: positive outside that edge.
double edge_value(const Obstacle& obs, std::size_t i, const Vec2& p) {
    return obs.normals()[i].dot(p) - obs.offsets()[i];
}

// min over s in [0,1] of max_i (n_i . p(s) - c_i), evaluated at the finite
// candidate set {0, 1, pairwise crossings}.
DistanceResult polygon_penetration(const Capsule& cap, const Obstacle& obs) {
    const auto normals = obs.normals();
    const std::size_t m = normals.size();
    const Vec2 dir = cap.b - cap.a;

    auto value_at = [&](double s, std::size_t* argmax, int* n_active) {
        const Vec2 p = cap.a + s * dir;
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = edge_value(obs, i, p);
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (argmax != nullptr) *argmax = arg;
        if (n_active != nullptr) {
            int count = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (edge_value(obs, i, p) >= best - 1e-12) ++count;
            }
            *n_active = count;
        }
        return best;
    };

    double best_s = 0.0;
    double best_v = value_at(0.0, nullptr, nullptr);
    auto consider = [&](double s) {
        if (!(s >= 0.0 && s <= 1.0)) return;
        const double v = value_at(s, nullptr, nullptr);
        if (v < best_v) {
            best_v = v;
            best_s = s;
        }
    };
    consider(1.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const Vec2 dn = normals[i] - normals[j];
            const double slope = dn.dot(dir);
            if (std::abs(slope) < 1e-15) continue;
            const double s = ((obs.offsets()[i] - obs.offsets()[j]) - dn.dot(cap.a)) / slope;
            consider(s);
        }
    }

    DistanceResult out;
    out.distance = best_v;
    std::size_t arg = 0;
    int n_active = 0;
    value_at(best_s, &arg, &n_active);
    const bool interior = best_s > 1e-12 && best_s < 1.0 - 1e-12;
    if (n_active == 1) {
        out.grad_a = (1.0 - best_s) * normals[arg];
        out.grad_b = best_s * normals[arg];
    } else if (n_active == 2 && interior) {
        // Kink minimiser: dual weights from stationarity in s.
        const Vec2 p = cap.a + best_s * dir;
        std::size_t other = arg;
        for (std::size_t i = 0; i < m; ++i) {
            if (i != arg && edge_value(obs, i, p) >= best_v - 1e-12) other = i;
        }
        const double gi = normals[arg].dot(dir);
        const double gj = normals[other].dot(dir);
        const double lam_i = gj / (gj - gi);
        const Vec2 n = lam_i * normals[arg] + (1.0 - lam_i) * normals[other];
        out.grad_a = (1.0 - best_s) * n;
        out.grad_b = best_s * n;
    } else {
        out.degenerate = true;
        out.grad_a = (1.0 - best_s) * normals[arg];
        out.grad_b = best_s * normals[arg];
    }
    return out;
}

DistanceResult polygon_distance(const Capsule& cap, const Obstacle& obs) {
    DistanceResult pen = polygon_penetration(cap, obs);
    if (pen.distance < 0.0) {
        pen.distance -= cap.radius;
        return pen;
    }
    const auto& verts = std::get<ConvexPolygon>(obs.shape()).vertices;
    const std::size_t m = verts.size();
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_p = cap.a;
    Vec2 best_o = verts[0];
    double best_s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& c = verts[i];
        const Vec2& d = verts[(i + 1) % m];
        if (segments_cross(cap.a, cap.b, c, d)) {
            best = 0.0;
            break;
        }
        const SegmentParam prm = closest_segment_params(cap.a, cap.b, c, d);
        const Vec2 p = cap.a + prm.s * (cap.b - cap.a);
        const Vec2 o = c + prm.u * (d - c);
        const double dist = (p - o).norm();
        if (dist < best) {
            best = dist;
            best_p = p;
            best_o = o;
            best_s = prm.s;
        }
    }
    DistanceResult out;
    out.distance = best - cap.radius;
    if (best > 0.0) {
        const Vec2 n = (best_p - best_o) / best;
        out.grad_a = (1.0 - best_s) * n;
        out.grad_b = best_s * n;
    } else {
        out.degenerate = true;
    }
    return out;
}

void validate_polygon(const ConvexPolygon& poly) {
    const auto& v = poly.vertices;
    if (v.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
    double turning = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 e0 = v[(i + 1) % v.size()] - v[i];
        const Vec2 e1 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
        const double c = cross(e0, e1);
        if (!(c > 0.0)) throw std::invalid_argument("polygon must be strictly convex and counter-clockwise");
        turning += std::atan2(c, e0.dot(e1));
    }
    if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) {
        throw std::invalid_argument("polygon winds more than once");
    }
}

}  // namespace

Obstacle::Obstacle(std::string id, Shape shape) : id_(std::move(id)), shape_(std::move(shape)) {
    if (const auto* c = std::get_if<Circle>(&shape_)) {
        if (!(c->radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
        bbox_min_ = c->center - Vec2::Constant(c->radius);
        bbox_max_ = c->center + Vec2::Constant(c->radius);
        return;
    }
    const auto& poly = std::get<ConvexPolygon>(shape_);
    validate_polygon(poly);
    const auto& v = poly.vertices;
    bbox_min_ = v[0];
    bbox_max_ = v[0];
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 e = v[(i + 1) % v.size()] - v[i];
        const Vec2 n = Vec2(e.y(), -e.x()).normalized();
        normals_.push_back(n);
        offsets_.push_back(n.dot(v[i]));
        bbox_min_ = bbox_min_.cwiseMin(v[i]);
        bbox_max_ = bbox_max_.cwiseMax(v[i]);
    }
}

Obstacle Obstacle::inflated(double eps) const {
    if (const auto* c = std::get_if<Circle>(&shape_)) {
        return Obstacle(id_, Circle{c->center, c->radius + eps});
    }
    // Intersect consecutive offset edge lines.
    const std::size_t m = normals_.size();
    ConvexPolygon out;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t prev = (i + m - 1) % m;
        Eigen::Matrix2d lhs;
        lhs.row(0) = normals_[prev].transpose();
        lhs.row(1) = normals_[i].transpose();
        const Vec2 rhs(offsets_[prev] + eps, offsets_[i] + eps);
        out.vertices.push_back(lhs.partialPivLu().solve(rhs));
    }
    return Obstacle(id_, out);
}

Obstacle Obstacle::translated(const Vec2& offset) const {
    if (const auto* c = std::get_if<Circle>(&shape_)) {
        return Obstacle(id_, Circle{c->center + offset, c->radius});
    }
    ConvexPolygon out = std::get<ConvexPolygon>(shape_);
    for (auto& v : out.vertices) v += offset;
    return Obstacle(id_, out);
}

double Bounds::inside_distance(const Vec2& p) const noexcept {
    return std::min({p.x() - lo.x(), hi.x() - p.x(), p.y() - lo.y(), hi.y() - p.y()});
}

Environment::Environment(std::vector<Obstacle> obstacles, Bounds bounds)
    : obstacles_(std::move(obstacles)), bounds_(bounds) {
    if (!(bounds_.lo.x() < bounds_.hi.x() && bounds_.lo.y() < bounds_.hi.y())) {
        throw std::invalid_argument("degenerate workspace bounds");
    }
    for (const auto& o : obstacles_) {
        if (!bounds_.contains(o.bbox_min()) || !bounds_.contains(o.bbox_max())) {
            throw std::invalid_argument("obstacle '" + o.id() + "' leaves the workspace bounds");
        }
    }
}

double signed_distance(const Capsule& capsule, const Obstacle& obstacle) {
    return signed_distance_with_gradient(capsule, obstacle).distance;
}

DistanceResult signed_distance_with_gradient(const Capsule& capsule, const Obstacle& obstacle) {
    if (const auto* c = std::get_if<Circle>(&obstacle.shape())) return circle_distance(capsule, *c);
    return polygon_distance(capsule, obstacle);
}

bool in_collision(std::span<const Capsule> capsules, const Environment& env) {
    for (const auto& cap : capsules) {
        if (!env.bounds().contains(cap.a) || !env.bounds().contains(cap.b)) return true;
    }
    for (const auto& cap : capsules) {
        const Vec2 lo = cap.a.cwiseMin(cap.b) - Vec2::Constant(cap.radius);
        const Vec2 hi = cap.a.cwiseMax(cap.b) + Vec2::Constant(cap.radius);
        for (const auto& obs : env.obstacles()) {
            if ((lo.array() > obs.bbox_max().array()).any() || (hi.array() < obs.bbox_min().array()).any()) {
                continue;
            }
            if (signed_distance(cap, obs) < 0.0) return true;
        }
    }
    return false;
}

double clearance(std::span<const Capsule> capsules, const Environment& env) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cap : capsules) {
        best = std::min({best, env.bounds().inside_distance(cap.a), env.bounds().inside_distance(cap.b)});
        for (const auto& obs : env.obstacles()) best = std::min(best, signed_distance(cap, obs));
    }
    return best;
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> vertices) {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& vi = vertices[i];
        const Vec2& vj = vertices[j];
        if ((vi.y() > p.y()) != (vj.y() > p.y())) {
            const double x_cross = vj.x() + (p.y() - vj.y()) * (vi.x() - vj.x()) / (vi.y() - vj.y());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + s * d - p).norm();
}

}  // namespace ccmp
