#pragma once

// Waypoint collision-probability estimation: Monte Carlo, Gauss-Hermite
// product quadrature with joint-limit clamping, and a learned regressor.

#include "ccmp/geometry.hpp"
#include "ccmp/kinematics.hpp"
#include "ccmp/lqg.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccmp {

/// Diagonal Gaussian over configurations.
struct WaypointBelief {
    Configuration mean;
    Eigen::VectorXd sigma;
};

/// Per-waypoint beliefs from the propagated configuration marginals
/// (cross-joint correlations dropped).
[[nodiscard]] std::vector<WaypointBelief> waypoint_beliefs(const BeliefTrajectory& belief);

/// n-point Gauss-Hermite rule for the weight exp(-y^2).
struct QuadratureRule {
    int n_points{2};
    std::vector<double> abscissas;      // y_j, roots of H_n
    std::vector<double> weights;        // w_j = 2^(n-1) n! sqrt(pi) / (n^2 H_(n-1)(y_j)^2)
    std::vector<double> unit_nodes;     // sqrt(2) y_j: offsets in units of sigma
    std::vector<double> probabilities;  // w_j / sqrt(pi)

    /// Supported: n = 2, 3. Throws std::invalid_argument otherwise.
    static QuadratureRule gauss_hermite(int n);
};

/// Physicists' Hermite polynomial H_n(x).
[[nodiscard]] double hermite(int n, double x);

inline constexpr int kMaxQuadratureDof = 12;
inline constexpr int kLabelSamples = 100000;

/// Fraction of n_samples draws from N(mean, diag(sigma^2)), clamped to the
/// joint limits, that are in collision.
[[nodiscard]] double mc_collision_probability(const WaypointBelief& belief, const ArmModel& arm,
                                              const Environment& env, int n_samples, std::mt19937_64& rng);

/// pi^(-d/2) sum (prod_i w_i) c(node) over the n^d product nodes
/// sqrt(2) sigma_i y + mu_i, each clamped to the joint limits.
[[nodiscard]] double gh_collision_probability(const WaypointBelief& belief, const ArmModel& arm,
                                              const Environment& env, const QuadratureRule& rule);

/// Collision fraction over the 2^d corners mu_i +- sigma_i (clamped); equals
/// the two-point estimate.
[[nodiscard]] double corner_collision_fraction(const WaypointBelief& belief, const ArmModel& arm,
                                               const Environment& env);

struct TrajectoryRisk {
    double additive{0.0};        // min(1, sum r_t)
    double multiplicative{0.0};  // 1 - prod (1 - r_t)
};

[[nodiscard]] TrajectoryRisk trajectory_risk(std::span<const double> risks);

// ---------------------------------------------------------------------------
// Learned estimator

struct TrainingSample {
    Configuration mean;
    Eigen::VectorXd sigma;
    double label{0.0};
};

struct DatasetSpec {
    int n_total{20000};
    double uniform_fraction{1.0 / 3.0};  // "Sample Set 1": means uniform over the joint box
    double sigma_max{0.035};  // rad, covers propagated stds at the default noise and dt
    int label_samples{10000};
    int workers{1};
};

/// Set 1 (first round(n_total * uniform_fraction) samples) draws means
/// uniformly over the joint box; set 2 draws collision-free means. Sigmas are
/// uniform in [0, sigma_max]; labels are Monte Carlo estimates.
[[nodiscard]] std::vector<TrainingSample> generate_training_set(const ArmModel& arm, const Environment& env,
                                                                const DatasetSpec& spec, std::uint64_t seed);

void save_dataset(const std::filesystem::path& file, std::span<const TrainingSample> data);
[[nodiscard]] std::vector<TrainingSample> load_dataset(const std::filesystem::path& file);

struct TrainingOptions {
    std::vector<int> hidden{128, 128, 128, 128};
    int epochs{60};
    int batch_size{64};
    double learning_rate{1e-3};
    int holdout{2000};
    std::uint64_t seed{0};
};

class TrainingDiverged : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrainingHistory {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    int best_epoch{-1};
    double val_mse{0.0};
    double val_r2{0.0};
};

/// Fully connected ReLU network with a sigmoid output unit.
class RiskModel {
  public:
    RiskModel() = default;
    RiskModel(int input_dim, std::vector<int> hidden, std::mt19937_64& rng);

    [[nodiscard]] int dof() const noexcept { return input_dim_ / 2; }
    [[nodiscard]] int input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] const std::vector<int>& hidden() const noexcept { return hidden_; }

    /// Throws std::invalid_argument on dimension mismatch.
    [[nodiscard]] double predict(const WaypointBelief& belief) const;
    /// Inputs as columns (2d x batch).
    [[nodiscard]] Eigen::RowVectorXd predict_batch(const Eigen::MatrixXd& inputs) const;

    [[nodiscard]] const TrainingHistory& history() const noexcept { return history_; }

    void save(const std::filesystem::path& file) const;
    static RiskModel load(const std::filesystem::path& file);

  private:
    friend RiskModel train_risk_model(std::span<const TrainingSample>, const TrainingOptions&);

    [[nodiscard]] Eigen::MatrixXd normalize(const Eigen::MatrixXd& inputs) const;

    int input_dim_{0};
    std::vector<int> hidden_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    Eigen::VectorXd feature_mean_;
    Eigen::VectorXd feature_scale_;
    TrainingHistory history_;
};

/// Adam on MSE with mini-batches; the last `holdout` samples (after a seeded
/// shuffle) are held out and the best-validation epoch is returned. Throws
/// TrainingDiverged if validation loss exceeds 10x its initial value, and
/// std::invalid_argument for fewer than 1000 samples.
[[nodiscard]] RiskModel train_risk_model(std::span<const TrainingSample> data, const TrainingOptions& options);

/// Inputs (2d x n) and labels for a sample range.
[[nodiscard]] Eigen::MatrixXd feature_matrix(std::span<const TrainingSample> data);

struct RegressionScore {
    double mse{0.0};
    double r2{0.0};
    double mean_abs_error{0.0};
};

[[nodiscard]] RegressionScore score_model(const RiskModel& model, std::span<const TrainingSample> data);

// ---------------------------------------------------------------------------

enum class EstimatorKind { quadrature, learned, monte_carlo };

[[nodiscard]] std::string to_string(EstimatorKind kind);
/// Accepts "quadrature", "learned", "mc"/"monte_carlo".
[[nodiscard]] EstimatorKind parse_estimator(const std::string& name);

/// Per-waypoint risk evaluation with a chosen method.
class RiskEstimator {
  public:
    RiskEstimator(EstimatorKind kind, const ArmModel& arm, const Environment& env);

    RiskEstimator& with_rule(QuadratureRule rule);
    RiskEstimator& with_model(std::shared_ptr<const RiskModel> model);
    RiskEstimator& with_monte_carlo(int n_samples, std::uint64_t seed);

    [[nodiscard]] EstimatorKind kind() const noexcept { return kind_; }
    [[nodiscard]] double estimate(const WaypointBelief& belief, std::uint64_t stream = 0) const;
    [[nodiscard]] std::vector<double> estimate(const BeliefTrajectory& belief) const;

  private:
    EstimatorKind kind_;
    const ArmModel* arm_;
    const Environment* env_;
    QuadratureRule rule_ = QuadratureRule::gauss_hermite(2);
    std::shared_ptr<const RiskModel> model_;
    int mc_samples_{2000};
    std::uint64_t mc_seed_{0};
};

}  // namespace ccmp
