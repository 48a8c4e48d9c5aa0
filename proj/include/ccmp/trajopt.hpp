#pragma once

// Local trajectory optimizer: squared path displacement plus squared-hinge
// collision penalties with per-waypoint safety margins. Endpoints fixed,
// waypoint count fixed.

#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/trajectory.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace ccmp {

struct OptimizerParams {
    double base_margin{0.02};     // m
    double margin_step{0.05};     // m, clearance added per conflict
    double penalty_weight{10.0};  // initial mu
    double penalty_growth{10.0};
    int max_outer_iterations{6};
    int max_inner_iterations{200};
    double tolerance{1e-10};        // relative objective decrease stopping the inner loop
    double feasibility_tol{1e-4};   // m
    double margin_slack{1e-3};      // hinge target sits this far beyond the margin
    int edge_samples{1};            // interpolated penalty points per edge
};

/// Required extra clearance per flagged waypoint.
class ConflictSet {
  public:
    /// Adds `step` to waypoint i's margin (creating the entry if absent).
    void add(int waypoint, double step);
    [[nodiscard]] double margin(int waypoint) const;
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::map<int, double>& entries() const noexcept { return entries_; }

  private:
    std::map<int, double> entries_;
};

/// Per-waypoint margins: base_margin + conflict margin.
[[nodiscard]] std::vector<double> waypoint_margins(int n_waypoints, const ConflictSet& conflicts,
                                                   const OptimizerParams& params);

class OptimizerInfeasible : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// J + mu * sum hinge(target - sd)^2 over interior waypoints (and optional
/// edge samples), every link, every obstacle and the workspace walls.
class PenalizedObjective {
  public:
    PenalizedObjective(const ArmModel& arm, const Environment& env, std::vector<double> margins,
                       double mu, const OptimizerParams& params);

    [[nodiscard]] double value(const std::vector<Configuration>& waypoints) const;

    /// Value plus gradient w.r.t. every waypoint (endpoint rows are zero).
    /// If hessian_blocks is non-null it receives per-interior-waypoint
    /// Gauss-Newton blocks of the penalty.
    double value_and_gradient(const std::vector<Configuration>& waypoints, std::vector<Eigen::VectorXd>& grad,
                              std::vector<Eigen::MatrixXd>* hessian_blocks = nullptr) const;

    /// Smallest (sd - margin) over interior waypoints: >= -feasibility_tol means feasible.
    [[nodiscard]] double worst_margin_violation(const std::vector<Configuration>& waypoints) const;

    [[nodiscard]] double mu() const noexcept { return mu_; }

  private:
    double penalty_at(const Configuration& q, double target, Eigen::VectorXd* grad, Eigen::MatrixXd* gn) const;

    const ArmModel* arm_;
    const Environment* env_;
    std::vector<double> margins_;
    double mu_;
    OptimizerParams params_;
};

struct OptimizeReport {
    int outer_iterations{0};
    int inner_iterations{0};
    double final_mu{0.0};
    std::vector<double> objective_trace;  // penalized objective per inner iteration
    std::vector<Configuration> last_iterate;  // final waypoints, also on failure
};

/// Throws OptimizerInfeasible if the margins cannot be met at the final mu.
[[nodiscard]] Trajectory optimize(const Trajectory& seed, const ConflictSet& conflicts, const ArmModel& arm,
                                  const Environment& env, const OptimizerParams& params,
                                  OptimizeReport* report = nullptr);

/// Same, with explicit per-waypoint margins.
[[nodiscard]] Trajectory optimize_with_margins(const Trajectory& seed, const std::vector<double>& margins,
                                               const ArmModel& arm, const Environment& env,
                                               const OptimizerParams& params, OptimizeReport* report = nullptr);

inline constexpr int kEdgeCheckPoints = 100;

/// True iff all waypoints and `points` interpolated configurations per edge are
/// collision-free.
[[nodiscard]] bool edge_safe(const Trajectory& traj, const ArmModel& arm, const Environment& env,
                             int points = kEdgeCheckPoints);

/// Indices t of edges (t, t+1) that fail the interpolated check.
[[nodiscard]] std::vector<int> unsafe_edges(const Trajectory& traj, const ArmModel& arm, const Environment& env,
                                            int points = kEdgeCheckPoints);

}  // namespace ccmp
