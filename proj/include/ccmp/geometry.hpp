#pragma once

// Planar workspace: capsule-shaped links against circle and convex-polygon
// obstacles, with exact signed distances.

#include <Eigen/Core>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ccmp {

using Vec2 = Eigen::Vector2d;

struct Circle {
    Vec2 center{0.0, 0.0};
    double radius{0.0};
};

/// Strictly convex polygon, counter-clockwise winding.
struct ConvexPolygon {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Circle, ConvexPolygon>;

class Obstacle {
  public:
    /// Throws std::invalid_argument if the shape violates its invariants.
    Obstacle(std::string id, Shape shape);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }

    /// Outward unit normals and offsets of the polygon edges (n·p <= c inside).
    /// Empty for circles.
    [[nodiscard]] std::span<const Vec2> normals() const noexcept { return normals_; }
    [[nodiscard]] std::span<const double> offsets() const noexcept { return offsets_; }

    [[nodiscard]] Vec2 bbox_min() const noexcept { return bbox_min_; }
    [[nodiscard]] Vec2 bbox_max() const noexcept { return bbox_max_; }

    /// Minkowski enlargement by eps (circle radius grows, polygon edges move
    /// outward; polygon vertices become offset corners, so the result is a
    /// conservative polygonal superset of the exact rounded polygon).
    [[nodiscard]] Obstacle inflated(double eps) const;

    /// Rigid translation.
    [[nodiscard]] Obstacle translated(const Vec2& offset) const;

  private:
    std::string id_;
    Shape shape_;
    std::vector<Vec2> normals_;
    std::vector<double> offsets_;
    Vec2 bbox_min_;
    Vec2 bbox_max_;
};

struct Bounds {
    Vec2 lo{-1.0, -1.0};
    Vec2 hi{1.0, 1.0};

    [[nodiscard]] bool contains(const Vec2& p) const noexcept {
        return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
    }
    /// Distance from p to the nearest wall; negative outside.
    [[nodiscard]] double inside_distance(const Vec2& p) const noexcept;
};

class Environment {
  public:
    Environment() = default;
    /// Throws std::invalid_argument if any obstacle pokes outside the bounds.
    Environment(std::vector<Obstacle> obstacles, Bounds bounds);

    [[nodiscard]] const std::vector<Obstacle>& obstacles() const noexcept { return obstacles_; }
    [[nodiscard]] const Bounds& bounds() const noexcept { return bounds_; }

  private:
    std::vector<Obstacle> obstacles_;
    Bounds bounds_{};
};

struct Capsule {
    Vec2 a{0.0, 0.0};
    Vec2 b{0.0, 0.0};
    double radius{0.0};
};

/// Closest-feature result of a capsule/obstacle query. The gradient fields
/// hold d(signed distance)/d(endpoint); `degenerate` flags a configuration
/// where the closest feature is not unique and the gradient is unreliable.
struct DistanceResult {
    double distance{0.0};
    Vec2 grad_a{0.0, 0.0};
    Vec2 grad_b{0.0, 0.0};
    bool degenerate{false};
};

/// Segment-to-shape signed distance minus the capsule radius. Negative iff
/// the capsule penetrates the obstacle.
[[nodiscard]] double signed_distance(const Capsule& capsule, const Obstacle& obstacle);

/// Same value as signed_distance, plus gradients w.r.t. the capsule endpoints.
[[nodiscard]] DistanceResult signed_distance_with_gradient(const Capsule& capsule,
                                                           const Obstacle& obstacle);

/// True iff any capsule penetrates any obstacle or any capsule endpoint
/// leaves the workspace bounds.
[[nodiscard]] bool in_collision(std::span<const Capsule> capsules, const Environment& env);

/// Minimum over all capsule/obstacle signed distances and all endpoint
/// inside-distances to the bounds. Negative iff in_collision.
[[nodiscard]] double clearance(std::span<const Capsule> capsules, const Environment& env);

/// Even-odd point-in-polygon test (boundary counts as inside for convex input).
[[nodiscard]] bool point_in_polygon(const Vec2& p, std::span<const Vec2> vertices);

/// Distance between point p and segment [a, b].
[[nodiscard]] double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace ccmp
