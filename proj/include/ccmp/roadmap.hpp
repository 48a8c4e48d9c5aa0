#pragma once

// Sparse probabilistic roadmap with an all-pairs shortest-path cache, and the
// online seed query built on it.

#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace ccmp {

inline constexpr double kEdgeResolution = 0.01;   // rad
inline constexpr double kWaypointSpacing = 0.16;  // rad

struct RoadmapParams {
    int n_nodes{1000};
    int k_neighbors{10};
    std::uint64_t seed{0};
};

struct RoadmapEdge {
    int to;
    double weight;
};

class RoadmapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Roadmap {
  public:
    /// Samples n_nodes collision-free configurations, links each to its
    /// k nearest neighbours when the straight segment is free at
    /// kEdgeResolution, keeps the largest connected component and caches
    /// all-pairs shortest paths. Deterministic in params.seed.
    static Roadmap build(const ArmModel& arm, const Environment& env, const RoadmapParams& params);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const std::vector<Configuration>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<std::vector<RoadmapEdge>>& adjacency() const noexcept { return adjacency_; }
    [[nodiscard]] std::size_t edge_count() const noexcept;
    [[nodiscard]] const RoadmapParams& params() const noexcept { return params_; }
    [[nodiscard]] int pruned_count() const noexcept { return pruned_; }

    [[nodiscard]] double distance(int from, int to) const { return dist_(from, to); }
    [[nodiscard]] const Eigen::MatrixXd& distances() const noexcept { return dist_; }
    [[nodiscard]] int next_hop(int from, int to) const {
        return next_[static_cast<std::size_t>(from) * nodes_.size() + to];
    }
    /// Node indices from..to reconstructed from the next-hop cache.
    [[nodiscard]] std::vector<int> path(int from, int to) const;

    /// start + cached shortest path + goal, or nullopt if either endpoint has
    /// no collision-free straight connection to any node.
    [[nodiscard]] std::optional<std::vector<Configuration>> query(const ArmModel& arm, const Environment& env,
                                                                  const Configuration& start,
                                                                  const Configuration& goal) const;

    /// Index of the nearest node reachable from q by a free segment.
    [[nodiscard]] std::optional<int> connect(const ArmModel& arm, const Environment& env,
                                             const Configuration& q) const;

    /// Binary cache keyed by the environment, arm and build parameters.
    void save(const std::filesystem::path& file, std::uint64_t key) const;
    /// Throws RoadmapError if the file is malformed or was built for a different key.
    static Roadmap load(const std::filesystem::path& file, std::uint64_t expected_key);

    /// Re-runs all-pairs shortest paths over the current adjacency.
    void compute_all_pairs();

    friend bool operator==(const Roadmap& a, const Roadmap& b);

  private:
    std::vector<Configuration> nodes_;
    std::vector<std::vector<RoadmapEdge>> adjacency_;
    Eigen::MatrixXd dist_;
    std::vector<std::int32_t> next_;
    RoadmapParams params_{};
    int pruned_{0};
};

/// Number of equal sub-segments needed so each is at most max_step long.
[[nodiscard]] int subdivisions(double length, double max_step);

/// Linear interpolation so consecutive waypoints are at most max_step apart.
/// Endpoints are preserved exactly. Throws std::invalid_argument if max_step <= 0.
[[nodiscard]] Trajectory interpolate(const std::vector<Configuration>& path, double max_step, double dt);

/// Arc-length resampling to exactly n_waypoints (fixed-T mode).
[[nodiscard]] Trajectory resample(const std::vector<Configuration>& path, int n_waypoints, double dt);

/// Stable FNV-1a hashes used to key cache files.
[[nodiscard]] std::uint64_t hash_environment(const Environment& env);
[[nodiscard]] std::uint64_t hash_arm(const ArmModel& arm);
[[nodiscard]] std::uint64_t roadmap_key(const Environment& env, const ArmModel& arm, const RoadmapParams& params);

}  // namespace ccmp
