#include "ccmp/risk.hpp"

#include "ccmp/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ccmp {

namespace {

void check_belief(const WaypointBelief& b, const ArmModel& arm) {
    if (b.mean.size() != arm.dof() || b.sigma.size() != arm.dof()) {
        throw std::invalid_argument("belief dimension does not match arm");
    }
    if ((b.sigma.array() < 0.0).any() || !b.sigma.allFinite() || !b.mean.allFinite()) {
        throw std::invalid_argument("belief sigma must be finite and non-negative");
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("malformed number: '" + s + "'");
    }
    return v;
}

// Probabilists' Hermite He_n.
double hermite_e(int n, double x) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace

std::vector<WaypointBelief> waypoint_beliefs(const BeliefTrajectory& belief) {
    std::vector<WaypointBelief> out;
    out.reserve(belief.mean.size());
    for (std::size_t t = 0; t < belief.mean.size(); ++t) out.push_back({belief.mean[t], belief.sigma[t]});
    return out;
}

double hermite(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite: negative order");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

QuadratureRule QuadratureRule::gauss_hermite(int n) {
    QuadratureRule rule;
    rule.n_points = n;
    // Roots of He_n; y = z / sqrt(2) are the roots of H_n.
    if (n == 2) {
        rule.unit_nodes = {-1.0, 1.0};
    } else if (n == 3) {
        rule.unit_nodes = {-std::sqrt(3.0), 0.0, std::sqrt(3.0)};
    } else {
        throw std::invalid_argument("Gauss-Hermite rule supports 2 or 3 points");
    }
    double factorial = 1.0;
    for (int k = 2; k <= n; ++k) factorial *= k;
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (double z : rule.unit_nodes) {
        const double y = z / std::numbers::sqrt2;
        const double hy = hermite(n - 1, y);
        rule.abscissas.push_back(y);
        rule.weights.push_back(std::pow(2.0, n - 1) * factorial * sqrt_pi / (n * n * hy * hy));
        // Same weight divided by sqrt(pi), via H_(n-1)(y)^2 = 2^(n-1) He_(n-1)(z)^2.
        const double hz = hermite_e(n - 1, z);
        rule.probabilities.push_back(factorial / (n * n * hz * hz));
    }
    return rule;
}

double mc_collision_probability(const WaypointBelief& belief, const ArmModel& arm, const Environment& env,
                                int n_samples, std::mt19937_64& rng) {
    check_belief(belief, arm);
    if (n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const int d = arm.dof();
    Configuration q(d);
    int hits = 0;
    for (int s = 0; s < n_samples; ++s) {
        for (int j = 0; j < d; ++j) {
            q[j] = std::clamp(belief.mean[j] + belief.sigma[j] * normal(rng), arm.lower()[j], arm.upper()[j]);
        }
        if (in_collision(arm, env, q)) ++hits;
    }
    return static_cast<double>(hits) / n_samples;
}

double gh_collision_probability(const WaypointBelief& belief, const ArmModel& arm, const Environment& env,
                                const QuadratureRule& rule) {
    check_belief(belief, arm);
    const int d = arm.dof();
    if (d > kMaxQuadratureDof) throw std::invalid_argument("quadrature limited to 12 joints");
    const int n = rule.n_points;
    std::vector<int> idx(d, 0);
    Configuration q(d);
    double total = 0.0;
    for (;;) {
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            q[j] = std::clamp(belief.mean[j] + belief.sigma[j] * rule.unit_nodes[idx[j]], arm.lower()[j],
                              arm.upper()[j]);
            w *= rule.probabilities[idx[j]];
        }
        if (in_collision(arm, env, q)) total += w;
        int j = 0;
        while (j < d && ++idx[j] == n) idx[j++] = 0;
        if (j == d) break;
    }
    return total;
}

double corner_collision_fraction(const WaypointBelief& belief, const ArmModel& arm, const Environment& env) {
    check_belief(belief, arm);
    const int d = arm.dof();
    if (d > kMaxQuadratureDof) throw std::invalid_argument("corner enumeration limited to 12 joints");
    const std::uint32_t corners = 1U << d;
    Configuration q(d);
    std::uint32_t hits = 0;
    for (std::uint32_t mask = 0; mask < corners; ++mask) {
        for (int j = 0; j < d; ++j) {
            const double v = (mask >> j) & 1U ? belief.mean[j] + belief.sigma[j] : belief.mean[j] - belief.sigma[j];
            q[j] = std::clamp(v, arm.lower()[j], arm.upper()[j]);
        }
        if (in_collision(arm, env, q)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(corners);
}

TrajectoryRisk trajectory_risk(std::span<const double> risks) {
    TrajectoryRisk out;
    double sum = 0.0;
    double survive = 1.0;
    for (double r : risks) {
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("waypoint risk outside [0, 1]");
        sum += r;
        survive *= 1.0 - r;
    }
    out.additive = std::min(1.0, sum);
    out.multiplicative = 1.0 - survive;
    return out;
}

// ---------------------------------------------------------------------------
// Datasets

std::vector<TrainingSample> generate_training_set(const ArmModel& arm, const Environment& env,
                                                  const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.n_total <= 0 || spec.label_samples <= 0 || spec.sigma_max < 0.0 || spec.uniform_fraction < 0.0 ||
        spec.uniform_fraction > 1.0) {
        throw std::invalid_argument("invalid dataset spec");
    }
    const int n_uniform = static_cast<int>(std::lround(spec.n_total * spec.uniform_fraction));
    std::vector<TrainingSample> data(spec.n_total);
    parallel_for(data.size(), spec.workers, [&](std::size_t i) {
        auto rng = substream(seed, i);
        TrainingSample& s = data[i];
        s.mean = static_cast<int>(i) < n_uniform ? sample_uniform(arm, rng) : sample_collision_free(arm, env, rng);
        std::uniform_real_distribution<double> u(0.0, spec.sigma_max);
        s.sigma.resize(arm.dof());
        for (int j = 0; j < arm.dof(); ++j) s.sigma[j] = u(rng);
        s.label = mc_collision_probability({s.mean, s.sigma}, arm, env, spec.label_samples, rng);
    });
    return data;
}

void save_dataset(const std::filesystem::path& file, std::span<const TrainingSample> data) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    const int d = data.empty() ? 0 : static_cast<int>(data.front().mean.size());
    for (int j = 0; j < d; ++j) out << "mean_" << j << ',';
    for (int j = 0; j < d; ++j) out << "sigma_" << j << ',';
    out << "label\n";
    for (const auto& s : data) {
        if (s.mean.size() != d || s.sigma.size() != d) throw std::invalid_argument("inconsistent sample dimension");
        for (int j = 0; j < d; ++j) out << format_double(s.mean[j]) << ',';
        for (int j = 0; j < d; ++j) out << format_double(s.sigma[j]) << ',';
        out << format_double(s.label) << '\n';
    }
}

std::vector<TrainingSample> load_dataset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
    const auto n_cols = std::count(line.begin(), line.end(), ',') + 1;
    if (n_cols < 3 || n_cols % 2 == 0) throw std::runtime_error("malformed dataset header");
    const int d = static_cast<int>((n_cols - 1) / 2);
    std::vector<TrainingSample> data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(parse_double(cell));
        if (static_cast<long>(vals.size()) != n_cols) throw std::runtime_error("malformed dataset row");
        TrainingSample s;
        s.mean = Eigen::Map<Eigen::VectorXd>(vals.data(), d);
        s.sigma = Eigen::Map<Eigen::VectorXd>(vals.data() + d, d);
        s.label = vals.back();
        data.push_back(std::move(s));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Network

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct AdamState {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    long step{0};
};

}  // namespace

RiskModel::RiskModel(int input_dim, std::vector<int> hidden, std::mt19937_64& rng)
    : input_dim_(input_dim), hidden_(std::move(hidden)) {
    if (input_dim <= 0 || input_dim % 2 != 0) throw std::invalid_argument("input dimension must be 2d");
    int fan_in = input_dim;
    std::vector<int> sizes = hidden_;
    sizes.push_back(1);
    for (int width : sizes) {
        if (width <= 0) throw std::invalid_argument("layer width must be positive");
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
        Eigen::MatrixXd W(width, fan_in);
        for (int r = 0; r < W.rows(); ++r) {
            for (int c = 0; c < W.cols(); ++c) W(r, c) = normal(rng);
        }
        weights_.push_back(std::move(W));
        biases_.push_back(Eigen::VectorXd::Zero(width));
        fan_in = width;
    }
    feature_mean_ = Eigen::VectorXd::Zero(input_dim);
    feature_scale_ = Eigen::VectorXd::Ones(input_dim);
}

Eigen::MatrixXd RiskModel::normalize(const Eigen::MatrixXd& inputs) const {
    return (inputs.colwise() - feature_mean_).array().colwise() / feature_scale_.array();
}

Eigen::RowVectorXd RiskModel::predict_batch(const Eigen::MatrixXd& inputs) const {
    if (weights_.empty()) throw std::logic_error("risk model is empty");
    if (inputs.rows() != input_dim_) throw std::invalid_argument("risk model input dimension mismatch");
    Eigen::MatrixXd a = normalize(inputs);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
        a = l + 1 < weights_.size() ? relu(z) : sigmoid(z);
    }
    return a.row(0);
}

double RiskModel::predict(const WaypointBelief& belief) const {
    if (belief.mean.size() != dof() || belief.sigma.size() != dof()) {
        throw std::invalid_argument("risk model input dimension mismatch");
    }
    Eigen::VectorXd x(input_dim_);
    x << belief.mean, belief.sigma;
    return predict_batch(x)(0);
}

void RiskModel::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    auto write_vec = [&](const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
        out << '\n';
    };
    out << "ccmp-risk-model 1\n";
    out << "input_dim " << input_dim_ << '\n';
    out << "hidden " << hidden_.size();
    for (int h : hidden_) out << ' ' << h;
    out << '\n';
    out << "feature_mean\n";
    write_vec(feature_mean_);
    out << "feature_scale\n";
    write_vec(feature_scale_);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out << "layer " << l << ' ' << weights_[l].rows() << ' ' << weights_[l].cols() << '\n';
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) write_vec(weights_[l].row(r).transpose());
        write_vec(biases_[l]);
    }
    out << "score " << history_.best_epoch << ' ' << format_double(history_.val_mse) << ' '
        << format_double(history_.val_r2) << '\n';
}

RiskModel RiskModel::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    auto expect = [&](const std::string& word) {
        std::string tok;
        if (!(in >> tok) || tok != word) throw std::runtime_error("risk model file: expected '" + word + "'");
    };
    auto read_double = [&] {
        std::string tok;
        if (!(in >> tok)) throw std::runtime_error("risk model file truncated");
        return parse_double(tok);
    };
    auto read_int = [&] {
        long v = 0;
        if (!(in >> v)) throw std::runtime_error("risk model file truncated");
        return static_cast<int>(v);
    };
    expect("ccmp-risk-model");
    if (read_int() != 1) throw std::runtime_error("unsupported risk model version");
    RiskModel m;
    expect("input_dim");
    m.input_dim_ = read_int();
    if (m.input_dim_ <= 0 || m.input_dim_ % 2 != 0) throw std::runtime_error("risk model file: bad input_dim");
    expect("hidden");
    const int n_hidden = read_int();
    for (int i = 0; i < n_hidden; ++i) m.hidden_.push_back(read_int());
    m.feature_mean_.resize(m.input_dim_);
    m.feature_scale_.resize(m.input_dim_);
    expect("feature_mean");
    for (int i = 0; i < m.input_dim_; ++i) m.feature_mean_[i] = read_double();
    expect("feature_scale");
    for (int i = 0; i < m.input_dim_; ++i) m.feature_scale_[i] = read_double();
    int fan_in = m.input_dim_;
    for (int l = 0; l <= n_hidden; ++l) {
        expect("layer");
        if (read_int() != l) throw std::runtime_error("risk model file: layer out of order");
        const int rows = read_int();
        const int cols = read_int();
        const int want = l < n_hidden ? m.hidden_[l] : 1;
        if (rows != want || cols != fan_in) throw std::runtime_error("risk model file: layer shape mismatch");
        Eigen::MatrixXd W(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) W(r, c) = read_double();
        }
        Eigen::VectorXd b(rows);
        for (int r = 0; r < rows; ++r) b[r] = read_double();
        m.weights_.push_back(std::move(W));
        m.biases_.push_back(std::move(b));
        fan_in = rows;
    }
    // Held-out score line; absent in files written before it was recorded.
    std::string tok;
    if (in >> tok) {
        if (tok != "score") throw std::runtime_error("risk model file: expected 'score'");
        m.history_.best_epoch = read_int();
        m.history_.val_mse = read_double();
        m.history_.val_r2 = read_double();
    }
    return m;
}

Eigen::MatrixXd feature_matrix(std::span<const TrainingSample> data) {
    if (data.empty()) return {};
    const auto d = data.front().mean.size();
    Eigen::MatrixXd X(2 * d, static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].mean.size() != d || data[i].sigma.size() != d) {
            throw std::invalid_argument("inconsistent sample dimension");
        }
        X.col(static_cast<Eigen::Index>(i)) << data[i].mean, data[i].sigma;
    }
    return X;
}

RegressionScore score_model(const RiskModel& model, std::span<const TrainingSample> data) {
    RegressionScore score;
    if (data.empty()) return score;
    const Eigen::RowVectorXd pred = model.predict_batch(feature_matrix(data));
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Eigen::Index>(i)] = data[i].label;
    const Eigen::RowVectorXd err = pred - y;
    score.mse = err.squaredNorm() / y.size();
    score.mean_abs_error = err.cwiseAbs().mean();
    const double var = (y.array() - y.mean()).square().mean();
    score.r2 = var > 0.0 ? 1.0 - score.mse / var : 0.0;
    return score;
}

RiskModel train_risk_model(std::span<const TrainingSample> data, const TrainingOptions& options) {
    if (data.size() < 1000) throw std::invalid_argument("at least 1000 samples required");
    if (options.holdout <= 0 || static_cast<std::size_t>(options.holdout) >= data.size()) {
        throw std::invalid_argument("holdout must leave training samples");
    }
    if (options.batch_size <= 0 || options.epochs <= 0 || options.learning_rate <= 0.0) {
        throw std::invalid_argument("invalid training options");
    }
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const Eigen::MatrixXd X_all = feature_matrix(data);
    const Eigen::Index dim = X_all.rows();
    const auto n_val = static_cast<Eigen::Index>(options.holdout);
    const auto n_train = static_cast<Eigen::Index>(data.size()) - n_val;
    Eigen::MatrixXd X_train(dim, n_train), X_val(dim, n_val);
    Eigen::RowVectorXd y_train(n_train), y_val(n_val);
    for (Eigen::Index i = 0; i < n_train + n_val; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        if (i < n_train) {
            X_train.col(i) = X_all.col(static_cast<Eigen::Index>(src));
            y_train[i] = data[src].label;
        } else {
            X_val.col(i - n_train) = X_all.col(static_cast<Eigen::Index>(src));
            y_val[i - n_train] = data[src].label;
        }
    }

    RiskModel model(static_cast<int>(dim), options.hidden, rng);
    model.feature_mean_ = X_train.rowwise().mean();
    model.feature_scale_ =
        ((X_train.colwise() - model.feature_mean_).array().square().rowwise().mean().sqrt()).matrix().cwiseMax(1e-12);

    const std::size_t n_layers = model.weights_.size();
    AdamState adam;
    for (std::size_t l = 0; l < n_layers; ++l) {
        adam.mw.push_back(Eigen::MatrixXd::Zero(model.weights_[l].rows(), model.weights_[l].cols()));
        adam.vw.push_back(adam.mw.back());
        adam.mb.push_back(Eigen::VectorXd::Zero(model.biases_[l].size()));
        adam.vb.push_back(adam.mb.back());
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    auto val_loss = [&] { return (model.predict_batch(X_val) - y_val).squaredNorm() / n_val; };
    const double initial_val = val_loss();

    const Eigen::MatrixXd Xn = model.normalize(X_train);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_train));
    std::iota(idx.begin(), idx.end(), 0);

    RiskModel best = model;
    double best_val = initial_val;
    TrainingHistory hist;
    std::vector<Eigen::MatrixXd> acts(n_layers + 1);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n_train; start += options.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(options.batch_size, n_train - start);
            Eigen::MatrixXd xb(dim, bs);
            Eigen::RowVectorXd yb(bs);
            for (Eigen::Index k = 0; k < bs; ++k) {
                xb.col(k) = Xn.col(idx[static_cast<std::size_t>(start + k)]);
                yb[k] = y_train[idx[static_cast<std::size_t>(start + k)]];
            }
            acts[0] = xb;
            for (std::size_t l = 0; l < n_layers; ++l) {
                Eigen::MatrixXd z = (model.weights_[l] * acts[l]).colwise() + model.biases_[l];
                acts[l + 1] = l + 1 < n_layers ? relu(z) : sigmoid(z);
            }
            const Eigen::RowVectorXd pred = acts[n_layers].row(0);
            const Eigen::RowVectorXd err = pred - yb;
            epoch_loss += err.squaredNorm();

            // dL/dz at the output for L = mean(err^2).
            Eigen::MatrixXd delta =
                (2.0 / static_cast<double>(bs) * err.array() * pred.array() * (1.0 - pred.array())).matrix();
            ++adam.step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
            for (std::size_t l = n_layers; l-- > 0;) {
                const Eigen::MatrixXd gW = delta * acts[l].transpose();
                const Eigen::VectorXd gb = delta.rowwise().sum();
                if (l > 0) {
                    delta = (model.weights_[l].transpose() * delta).cwiseProduct(
                        (acts[l].array() > 0.0).cast<double>().matrix());
                }
                adam.mw[l] = beta1 * adam.mw[l] + (1.0 - beta1) * gW;
                adam.vw[l] = beta2 * adam.vw[l] + (1.0 - beta2) * gW.cwiseAbs2();
                adam.mb[l] = beta1 * adam.mb[l] + (1.0 - beta1) * gb;
                adam.vb[l] = beta2 * adam.vb[l] + (1.0 - beta2) * gb.cwiseAbs2();
                model.weights_[l].array() -= options.learning_rate * (adam.mw[l].array() / c1) /
                                             ((adam.vw[l].array() / c2).sqrt() + eps);
                model.biases_[l].array() -= options.learning_rate * (adam.mb[l].array() / c1) /
                                            ((adam.vb[l].array() / c2).sqrt() + eps);
            }
        }
        const double train = epoch_loss / static_cast<double>(n_train);
        const double val = val_loss();
        hist.train_loss.push_back(train);
        hist.val_loss.push_back(val);
        if (!std::isfinite(val) || !std::isfinite(train) || val > 10.0 * initial_val + 1e-12) {
            throw TrainingDiverged("validation loss diverged at epoch " + std::to_string(epoch));
        }
        if (val < best_val || hist.best_epoch < 0) {
            best_val = val;
            best = model;
            hist.best_epoch = epoch;
        }
    }
    hist.val_mse = best_val;
    const double var = (y_val.array() - y_val.mean()).square().mean();
    hist.val_r2 = var > 0.0 ? 1.0 - best_val / var : 0.0;
    best.history_ = std::move(hist);
    return best;
}

// ---------------------------------------------------------------------------

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::quadrature: return "quadrature";
        case EstimatorKind::learned: return "learned";
        case EstimatorKind::monte_carlo: return "mc";
    }
    return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "quadrature" || name == "gh") return EstimatorKind::quadrature;
    if (name == "learned" || name == "nn") return EstimatorKind::learned;
    if (name == "mc" || name == "monte_carlo") return EstimatorKind::monte_carlo;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

RiskEstimator::RiskEstimator(EstimatorKind kind, const ArmModel& arm, const Environment& env)
    : kind_(kind), arm_(&arm), env_(&env) {}

RiskEstimator& RiskEstimator::with_rule(QuadratureRule rule) {
    rule_ = std::move(rule);
    return *this;
}

RiskEstimator& RiskEstimator::with_model(std::shared_ptr<const RiskModel> model) {
    if (model && model->dof() != arm_->dof()) throw std::invalid_argument("risk model dof does not match arm");
    model_ = std::move(model);
    return *this;
}

RiskEstimator& RiskEstimator::with_monte_carlo(int n_samples, std::uint64_t seed) {
    if (n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
    mc_samples_ = n_samples;
    mc_seed_ = seed;
    return *this;
}

double RiskEstimator::estimate(const WaypointBelief& belief, std::uint64_t stream) const {
    switch (kind_) {
        case EstimatorKind::quadrature: return gh_collision_probability(belief, *arm_, *env_, rule_);
        case EstimatorKind::learned:
            if (!model_) throw std::logic_error("learned estimator has no model");
            return model_->predict(belief);
        case EstimatorKind::monte_carlo: {
            auto rng = substream(mc_seed_, stream);
            return mc_collision_probability(belief, *arm_, *env_, mc_samples_, rng);
        }
    }
    throw std::logic_error("unknown estimator kind");
}

std::vector<double> RiskEstimator::estimate(const BeliefTrajectory& belief) const {
    const auto beliefs = waypoint_beliefs(belief);
    std::vector<double> out(beliefs.size());
    if (kind_ == EstimatorKind::learned) {
        if (!model_) throw std::logic_error("learned estimator has no model");
        std::vector<TrainingSample> rows;
        rows.reserve(beliefs.size());
        for (const auto& b : beliefs) rows.push_back({b.mean, b.sigma, 0.0});
        const Eigen::RowVectorXd pred = model_->predict_batch(feature_matrix(rows));
        for (std::size_t t = 0; t < out.size(); ++t) out[t] = pred[static_cast<Eigen::Index>(t)];
        return out;
    }
    for (std::size_t t = 0; t < beliefs.size(); ++t) out[t] = estimate(beliefs[t], t);
    return out;
}

}  // namespace ccmp
