#include "ccmp/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace ccmp {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'M', 'P', 'R', 'M', '0', '1'};

int edge_steps(double length) {
    return std::max(1, static_cast<int>(std::ceil(length / kEdgeResolution - 1e-9)));
}

class Fnv1a {
  public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ULL;
        }
    }
    void f64(double v) { bytes(&v, sizeof v); }
    void i64(std::int64_t v) { bytes(&v, sizeof v); }
    void str(const std::string& s) {
        i64(static_cast<std::int64_t>(s.size()));
        bytes(s.data(), s.size());
    }
    [[nodiscard]] std::uint64_t value() const { return h_; }

  private:
    std::uint64_t h_{14695981039346656037ULL};
};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw RoadmapError("truncated roadmap file");
    return v;
}

}  // namespace

std::size_t Roadmap::edge_count() const noexcept {
    std::size_t total = 0;
    for (const auto& adj : adjacency_) total += adj.size();
    return total / 2;
}

Roadmap Roadmap::build(const ArmModel& arm, const Environment& env, const RoadmapParams& params) {
    if (params.n_nodes < 2) throw std::invalid_argument("roadmap needs at least 2 nodes");
    if (params.k_neighbors < 1) throw std::invalid_argument("k_neighbors must be positive");
    std::mt19937_64 rng(params.seed);
    const int n = params.n_nodes;
    std::vector<Configuration> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) samples.push_back(sample_collision_free(arm, env, rng));

    // k-nearest-neighbour candidate edges, deduplicated as (min, max) pairs.
    std::set<std::pair<int, int>> candidates;
    const int k = std::min(params.k_neighbors, n - 1);
    std::vector<std::pair<double, int>> by_dist(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) by_dist[j] = {(samples[i] - samples[j]).norm(), j};
        std::partial_sort(by_dist.begin(), by_dist.begin() + k + 1, by_dist.end());
        int taken = 0;
        for (int idx = 0; idx < n && taken < k; ++idx) {
            const int j = by_dist[idx].second;
            if (j == i) continue;
            candidates.insert({std::min(i, j), std::max(i, j)});
            ++taken;
        }
    }

    std::vector<std::vector<RoadmapEdge>> adj(n);
    for (const auto& [i, j] : candidates) {
        const double len = (samples[i] - samples[j]).norm();
        if (segment_collision_free(arm, env, samples[i], samples[j], edge_steps(len))) {
            adj[i].push_back({j, len});
            adj[j].push_back({i, len});
        }
    }

    // Largest connected component (ties broken by lowest node index).
    std::vector<int> component(n, -1);
    int best_comp = -1;
    int best_size = 0;
    int comp_id = 0;
    for (int s = 0; s < n; ++s) {
        if (component[s] >= 0) continue;
        int size = 0;
        std::vector<int> stack{s};
        component[s] = comp_id;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            ++size;
            for (const auto& e : adj[u]) {
                if (component[e.to] < 0) {
                    component[e.to] = comp_id;
                    stack.push_back(e.to);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best_comp = comp_id;
        }
        ++comp_id;
    }
    if (best_size < 2) throw RoadmapError("roadmap has no edges after pruning");

    std::vector<int> remap(n, -1);
    Roadmap rm;
    for (int i = 0; i < n; ++i) {
        if (component[i] == best_comp) {
            remap[i] = rm.size();
            rm.nodes_.push_back(samples[i]);
        }
    }
    rm.adjacency_.resize(rm.nodes_.size());
    for (int i = 0; i < n; ++i) {
        if (remap[i] < 0) continue;
        for (const auto& e : adj[i]) rm.adjacency_[remap[i]].push_back({remap[e.to], e.weight});
    }
    rm.params_ = params;
    rm.pruned_ = n - rm.size();
    rm.compute_all_pairs();
    return rm;
}

void Roadmap::compute_all_pairs() {
    const int n = size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    dist_ = Eigen::MatrixXd::Constant(n, n, inf);
    next_.assign(static_cast<std::size_t>(n) * n, -1);
    using Item = std::pair<double, int>;
    std::vector<int> first(n);
    for (int src = 0; src < n; ++src) {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        auto drow = dist_.row(src);
        drow[src] = 0.0;
        first[src] = src;
        heap.push({0.0, src});
        while (!heap.empty()) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (d > drow[u]) continue;
            for (const auto& e : adjacency_[u]) {
                const double nd = d + e.weight;
                if (nd < drow[e.to]) {
                    drow[e.to] = nd;
                    first[e.to] = (u == src) ? e.to : first[u];
                    heap.push({nd, e.to});
                }
            }
        }
        for (int v = 0; v < n; ++v) {
            if (std::isfinite(drow[v])) next_[static_cast<std::size_t>(src) * n + v] = first[v];
        }
    }
}

std::vector<int> Roadmap::path(int from, int to) const {
    std::vector<int> out{from};
    int cur = from;
    while (cur != to) {
        cur = next_hop(cur, to);
        if (cur < 0) return {};
        out.push_back(cur);
    }
    return out;
}

std::optional<int> Roadmap::connect(const ArmModel& arm, const Environment& env, const Configuration& q) const {
    std::vector<std::pair<double, int>> order;
    order.reserve(nodes_.size());
    for (int i = 0; i < size(); ++i) order.emplace_back((nodes_[i] - q).norm(), i);
    std::sort(order.begin(), order.end());
    for (const auto& [d, i] : order) {
        if (segment_collision_free(arm, env, q, nodes_[i], edge_steps(d))) return i;
    }
    return std::nullopt;
}

std::optional<std::vector<Configuration>> Roadmap::query(const ArmModel& arm, const Environment& env,
                                                         const Configuration& start,
                                                         const Configuration& goal) const {
    const auto s = connect(arm, env, start);
    if (!s) return std::nullopt;
    const auto g = connect(arm, env, goal);
    if (!g) return std::nullopt;
    std::vector<Configuration> out{start};
    auto push = [&out](const Configuration& q) {
        if (!(out.back().array() == q.array()).all()) out.push_back(q);
    };
    for (const int idx : path(*s, *g)) push(nodes_[idx]);
    push(goal);
    if (out.size() == 1) out.push_back(goal);
    return out;
}

void Roadmap::save(const std::filesystem::path& file, std::uint64_t key) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw RoadmapError("cannot write " + file.string());
    out.write(kMagic, sizeof kMagic);
    write_pod(out, key);
    write_pod(out, static_cast<std::int64_t>(params_.n_nodes));
    write_pod(out, static_cast<std::int64_t>(params_.k_neighbors));
    write_pod(out, params_.seed);
    write_pod(out, static_cast<std::int64_t>(pruned_));
    const auto n = static_cast<std::int64_t>(nodes_.size());
    const auto d = static_cast<std::int64_t>(n > 0 ? nodes_[0].size() : 0);
    write_pod(out, n);
    write_pod(out, d);
    for (const auto& q : nodes_) out.write(reinterpret_cast<const char*>(q.data()), sizeof(double) * d);
    for (const auto& adj : adjacency_) {
        write_pod(out, static_cast<std::int64_t>(adj.size()));
        for (const auto& e : adj) {
            write_pod(out, static_cast<std::int32_t>(e.to));
            write_pod(out, e.weight);
        }
    }
    out.write(reinterpret_cast<const char*>(dist_.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
    out.write(reinterpret_cast<const char*>(next_.data()),
              static_cast<std::streamsize>(sizeof(std::int32_t) * next_.size()));
    if (!out) throw RoadmapError("failed writing " + file.string());
}

Roadmap Roadmap::load(const std::filesystem::path& file, std::uint64_t expected_key) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw RoadmapError("cannot open " + file.string());
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw RoadmapError("not a roadmap cache file");
    const auto key = read_pod<std::uint64_t>(in);
    if (key != expected_key) throw RoadmapError("roadmap cache was built for a different scenario");
    Roadmap rm;
    rm.params_.n_nodes = static_cast<int>(read_pod<std::int64_t>(in));
    rm.params_.k_neighbors = static_cast<int>(read_pod<std::int64_t>(in));
    rm.params_.seed = read_pod<std::uint64_t>(in);
    rm.pruned_ = static_cast<int>(read_pod<std::int64_t>(in));
    const auto n = read_pod<std::int64_t>(in);
    const auto d = read_pod<std::int64_t>(in);
    if (n < 0 || d < 0 || n > 1'000'000 || d > 64) throw RoadmapError("corrupt roadmap header");
    rm.nodes_.assign(n, Configuration(d));
    for (auto& q : rm.nodes_) in.read(reinterpret_cast<char*>(q.data()), sizeof(double) * d);
    rm.adjacency_.resize(n);
    for (auto& adj : rm.adjacency_) {
        const auto count = read_pod<std::int64_t>(in);
        if (count < 0 || count > n) throw RoadmapError("corrupt adjacency");
        for (std::int64_t i = 0; i < count; ++i) {
            const auto to = read_pod<std::int32_t>(in);
            const auto w = read_pod<double>(in);
            adj.push_back({to, w});
        }
    }
    rm.dist_.resize(n, n);
    in.read(reinterpret_cast<char*>(rm.dist_.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
    rm.next_.resize(static_cast<std::size_t>(n) * n);
    in.read(reinterpret_cast<char*>(rm.next_.data()), static_cast<std::streamsize>(sizeof(std::int32_t) * n * n));
    if (!in) throw RoadmapError("truncated roadmap file");
    return rm;
}

bool operator==(const Roadmap& a, const Roadmap& b) {
    if (a.nodes_.size() != b.nodes_.size() || a.pruned_ != b.pruned_) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        if (!(a.nodes_[i].array() == b.nodes_[i].array()).all()) return false;
        if (a.adjacency_[i].size() != b.adjacency_[i].size()) return false;
        for (std::size_t j = 0; j < a.adjacency_[i].size(); ++j) {
            if (a.adjacency_[i][j].to != b.adjacency_[i][j].to ||
                a.adjacency_[i][j].weight != b.adjacency_[i][j].weight) {
                return false;
            }
        }
    }
    return a.next_ == b.next_ && (a.dist_.array() == b.dist_.array()).all() &&
           a.params_.n_nodes == b.params_.n_nodes && a.params_.k_neighbors == b.params_.k_neighbors &&
           a.params_.seed == b.params_.seed;
}

int subdivisions(double length, double max_step) {
    return std::max(1, static_cast<int>(std::ceil(length / max_step - 1e-12)));
}

Trajectory interpolate(const std::vector<Configuration>& path, double max_step, double dt) {
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    if (path.empty()) throw std::invalid_argument("empty path");
    Trajectory traj;
    traj.dt = dt;
    traj.waypoints.push_back(path.front());
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Configuration& a = path[i - 1];
        const Configuration& b = path[i];
        const double len = (b - a).norm();
        if (len == 0.0) continue;
        const int n = subdivisions(len, max_step);
        for (int k = 1; k < n; ++k) traj.waypoints.push_back(a + (static_cast<double>(k) / n) * (b - a));
        traj.waypoints.push_back(b);
    }
    if (traj.waypoints.size() == 1) traj.waypoints.push_back(path.back());
    return traj;
}

Trajectory resample(const std::vector<Configuration>& path, int n_waypoints, double dt) {
    if (n_waypoints < 2) throw std::invalid_argument("need at least 2 waypoints");
    if (path.empty()) throw std::invalid_argument("empty path");
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < path.size(); ++i) cum.push_back(cum.back() + (path[i] - path[i - 1]).norm());
    Trajectory traj;
    traj.dt = dt;
    const double total = cum.back();
    std::size_t seg = 1;
    for (int k = 0; k < n_waypoints; ++k) {
        if (k == 0) {
            traj.waypoints.push_back(path.front());
            continue;
        }
        if (k == n_waypoints - 1) {
            traj.waypoints.push_back(path.back());
            continue;
        }
        const double target = total * k / (n_waypoints - 1);
        while (seg + 1 < path.size() && cum[seg] < target) ++seg;
        const double seg_len = cum[seg] - cum[seg - 1];
        const double s = seg_len > 0.0 ? (target - cum[seg - 1]) / seg_len : 0.0;
        traj.waypoints.push_back(path[seg - 1] + s * (path[seg] - path[seg - 1]));
    }
    return traj;
}

std::uint64_t hash_environment(const Environment& env) {
    Fnv1a h;
    h.f64(env.bounds().lo.x());
    h.f64(env.bounds().lo.y());
    h.f64(env.bounds().hi.x());
    h.f64(env.bounds().hi.y());
    for (const auto& o : env.obstacles()) {
        h.str(o.id());
        if (const auto* c = std::get_if<Circle>(&o.shape())) {
            h.i64(0);
            h.f64(c->center.x());
            h.f64(c->center.y());
            h.f64(c->radius);
        } else {
            h.i64(1);
            for (const auto& v : std::get<ConvexPolygon>(o.shape()).vertices) {
                h.f64(v.x());
                h.f64(v.y());
            }
        }
    }
    return h.value();
}

std::uint64_t hash_arm(const ArmModel& arm) {
    Fnv1a h;
    for (const double l : arm.link_lengths()) h.f64(l);
    h.f64(arm.link_radius());
    h.f64(arm.base().x());
    h.f64(arm.base().y());
    for (int j = 0; j < arm.dof(); ++j) {
        h.f64(arm.lower()[j]);
        h.f64(arm.upper()[j]);
    }
    return h.value();
}

std::uint64_t roadmap_key(const Environment& env, const ArmModel& arm, const RoadmapParams& params) {
    Fnv1a h;
    h.i64(static_cast<std::int64_t>(hash_environment(env)));
    h.i64(static_cast<std::int64_t>(hash_arm(arm)));
    h.i64(params.n_nodes);
    h.i64(params.k_neighbors);
    h.i64(static_cast<std::int64_t>(params.seed));
    return h.value();
}

}  // namespace ccmp
