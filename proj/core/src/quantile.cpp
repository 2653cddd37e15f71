#include "actguard/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "actguard/errors.hpp"
#include "actguard/targets.hpp"

namespace actguard::quantile {

namespace {

void check_levels(const std::vector<double>& levels) {
  if (levels.empty()) {
    throw InvalidConfigError("quantile levels must be non-empty");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw InvalidConfigError("quantile level " + std::to_string(levels[i]) +
                               " outside (0, 1)");
    }
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw InvalidConfigError("quantile levels must be strictly increasing");
    }
  }
}

/// Forward pass through tanh hidden layers and a linear head. Returns the
/// activations of every layer (input first, head output last) so the
/// backward pass can reuse them.
std::vector<Eigen::MatrixXd> forward_all(
    const std::vector<Eigen::MatrixXd>& weights,
    const std::vector<Eigen::VectorXd>& biases, const Eigen::MatrixXd& input) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(weights.size() + 1);
  acts.push_back(input);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z =
        (acts.back() * weights[l].transpose()).rowwise() + biases[l].transpose();
    if (l + 1 < weights.size()) {
      z = z.array().tanh();
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

/// Mean pinball loss of head outputs against targets, averaged over samples,
/// levels, and output components.
double loss_of(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets,
               const std::vector<double>& levels, int width) {
  double total = 0.0;
  const auto n = pred.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      for (int c = 0; c < width; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(j) * width + c;
        total += pinball_loss(targets(i, c) - pred(i, col), levels[j]);
      }
    }
  }
  return total / static_cast<double>(n * levels.size() * width);
}

/// Gradient of loss_of with respect to the head outputs. Uses the tau-side
/// subgradient at the kink (residual exactly zero).
Eigen::MatrixXd head_gradient(const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& targets,
                              const std::vector<double>& levels, int width) {
  Eigen::MatrixXd grad(pred.rows(), pred.cols());
  const double denom =
      static_cast<double>(pred.rows()) * levels.size() * width;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      for (int c = 0; c < width; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(j) * width + c;
        const double u = targets(i, c) - pred(i, col);
        grad(i, col) = -(u >= 0.0 ? levels[j] : levels[j] - 1.0) / denom;
      }
    }
  }
  return grad;
}

struct LayerGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Backpropagates the head gradient through the network.
LayerGrads backward(const std::vector<Eigen::MatrixXd>& weights,
                    const std::vector<Eigen::MatrixXd>& acts,
                    Eigen::MatrixXd delta) {
  LayerGrads grads;
  grads.weights.resize(weights.size());
  grads.biases.resize(weights.size());
  for (std::size_t l = weights.size(); l-- > 0;) {
    grads.weights[l] = delta.transpose() * acts[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      // acts[l] is a tanh output for every hidden layer.
      delta = (delta * weights[l]).cwiseProduct(
          (1.0 - acts[l].array().square()).matrix());
    }
  }
  return grads;
}

Eigen::VectorXd flatten(const std::vector<Eigen::MatrixXd>& weights,
                        const std::vector<Eigen::VectorXd>& biases, int count) {
  Eigen::VectorXd flat(count);
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        flat(pos++) = w(r, c);
      }
    }
    flat.segment(pos, biases[l].size()) = biases[l];
    pos += biases[l].size();
  }
  return flat;
}

Eigen::MatrixXd features_of(const std::vector<RegressionSample>& samples,
                            int input_dim) {
  Eigen::MatrixXd x(samples.size(), input_dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd row =
        feature_row(samples[i].embedding, samples[i].predicted_action);
    if (row.size() != input_dim) {
      throw InvalidInputError("sample feature dimension mismatch: expected " +
                              std::to_string(input_dim) + ", got " +
                              std::to_string(row.size()));
    }
    x.row(i) = row.transpose();
  }
  return x;
}

Eigen::MatrixXd targets_of(const std::vector<RegressionSample>& samples,
                           TargetKind kind) {
  Eigen::MatrixXd y(samples.size(), target_width(kind));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    y.row(i) = sample_target(kind, samples[i]).transpose();
  }
  return y;
}

}  // namespace

int target_width(TargetKind kind) {
  return kind == TargetKind::ActionInterval ? ActionVector::kSize : 1;
}

QuantileModel::QuantileModel(int input_dim, std::vector<double> levels,
                             TargetKind kind, std::vector<int> hidden_sizes,
                             Normalization normalization)
    : input_dim_(input_dim),
      levels_(std::move(levels)),
      kind_(kind),
      hidden_sizes_(std::move(hidden_sizes)),
      norm_(std::move(normalization)) {
  if (input_dim_ <= 0) {
    throw InvalidConfigError("input dimension must be positive");
  }
  check_levels(levels_);
  for (int h : hidden_sizes_) {
    if (h <= 0) {
      throw InvalidConfigError("hidden layer sizes must be positive");
    }
  }
  if (norm_.mean.size() != input_dim_ || norm_.scale.size() != input_dim_) {
    throw InvalidConfigError("normalization dimension mismatch");
  }
  for (Eigen::Index i = 0; i < norm_.scale.size(); ++i) {
    if (!(norm_.scale(i) > 0.0)) {
      throw InvalidConfigError("normalization scales must be positive");
    }
  }
  int in = input_dim_;
  for (int h : hidden_sizes_) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(h, in));
    biases_.emplace_back(Eigen::VectorXd::Zero(h));
    in = h;
  }
  weights_.emplace_back(Eigen::MatrixXd::Zero(output_dim(), in));
  biases_.emplace_back(Eigen::VectorXd::Zero(output_dim()));
}

int QuantileModel::parameter_count() const {
  int count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    count += static_cast<int>(weights_[l].size() + biases_[l].size());
  }
  return count;
}

Eigen::VectorXd QuantileModel::flat_parameters() const {
  return flatten(weights_, biases_, parameter_count());
}

void QuantileModel::set_flat_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) {
    throw InvalidInputError("flat parameter size mismatch: expected " +
                            std::to_string(parameter_count()) + ", got " +
                            std::to_string(flat.size()));
  }
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = flat(pos++);
      }
    }
    biases_[l] = flat.segment(pos, biases_[l].size());
    pos += biases_[l].size();
  }
}

Eigen::MatrixXd QuantileModel::forward(
    const Eigen::MatrixXd& normalized_features) const {
  if (normalized_features.cols() != input_dim_) {
    throw InvalidInputError("feature dimension mismatch: expected " +
                            std::to_string(input_dim_) + ", got " +
                            std::to_string(normalized_features.cols()));
  }
  return forward_all(weights_, biases_, normalized_features).back();
}

Eigen::MatrixXd QuantileModel::normalize(
    const Eigen::MatrixXd& raw_features) const {
  if (raw_features.cols() != input_dim_) {
    throw InvalidInputError("feature dimension mismatch: expected " +
                            std::to_string(input_dim_) + ", got " +
                            std::to_string(raw_features.cols()));
  }
  return (raw_features.rowwise() - norm_.mean.transpose()).array().rowwise() /
         norm_.scale.transpose().array();
}

double pinball_loss(double residual, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidConfigError("quantile level " + std::to_string(level) +
                             " outside (0, 1)");
  }
  if (!std::isfinite(residual)) {
    throw InvalidInputError("pinball residual must be finite");
  }
  return residual >= 0.0 ? level * residual : (level - 1.0) * residual;
}

Eigen::VectorXd feature_row(const LatentEmbedding& embedding,
                            const ActionVector& action) {
  if (embedding.values.empty()) {
    throw InvalidInputError("embedding must be non-empty");
  }
  Eigen::VectorXd row(embedding.values.size() + ActionVector::kSize);
  for (std::size_t i = 0; i < embedding.values.size(); ++i) {
    if (!std::isfinite(embedding.values[i])) {
      throw InvalidInputError("embedding contains a non-finite value");
    }
    row(static_cast<Eigen::Index>(i)) = embedding.values[i];
  }
  if (!action.is_finite()) {
    throw InvalidInputError("action contains a non-finite value");
  }
  for (int c = 0; c < ActionVector::kSize; ++c) {
    row(static_cast<Eigen::Index>(embedding.values.size()) + c) = action[c];
  }
  return row;
}

Eigen::VectorXd sample_target(TargetKind kind, const RegressionSample& sample) {
  switch (kind) {
    case TargetKind::Distance7: {
      Eigen::VectorXd y(1);
      y(0) = action_error(sample.predicted_action, sample.expert_action);
      return y;
    }
    case TargetKind::Distance6: {
      Eigen::VectorXd y(1);
      y(0) = target_distance6(sample.predicted_action, sample.expert_action);
      return y;
    }
    case TargetKind::Cosine: {
      Eigen::VectorXd y(1);
      y(0) = target_cosine(sample.predicted_action, sample.expert_action);
      return y;
    }
    case TargetKind::ActionInterval: {
      if (!sample.expert_action.is_finite()) {
        throw InvalidInputError("expert action contains a non-finite value");
      }
      Eigen::VectorXd y(ActionVector::kSize);
      for (int c = 0; c < ActionVector::kSize; ++c) {
        y(c) = sample.expert_action[c];
      }
      return y;
    }
  }
  throw InvalidConfigError("unknown target kind");
}

double batch_loss(const QuantileModel& model,
                  const std::vector<RegressionSample>& samples) {
  if (samples.empty()) {
    throw InvalidInputError("batch_loss requires at least one sample");
  }
  const Eigen::MatrixXd x =
      model.normalize(features_of(samples, model.input_dim()));
  const Eigen::MatrixXd y = targets_of(samples, model.target_kind());
  return loss_of(model.forward(x), y, model.levels(), model.head_width());
}

Eigen::VectorXd batch_loss_gradient(
    const QuantileModel& model, const std::vector<RegressionSample>& samples) {
  if (samples.empty()) {
    throw InvalidInputError("batch_loss_gradient requires at least one sample");
  }
  const Eigen::MatrixXd x =
      model.normalize(features_of(samples, model.input_dim()));
  const Eigen::MatrixXd y = targets_of(samples, model.target_kind());
  const auto acts = forward_all(model.weights(), model.biases(), x);
  const Eigen::MatrixXd delta =
      head_gradient(acts.back(), y, model.levels(), model.head_width());
  const LayerGrads grads = backward(model.weights(), acts, delta);
  return flatten(grads.weights, grads.biases, model.parameter_count());
}

QuantileModel fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                  std::vector<double> levels, TargetKind kind,
                  const TrainConfig& config) {
  check_levels(levels);
  if (features.rows() == 0) {
    throw InvalidInputError("fit requires at least one sample");
  }
  if (features.rows() != targets.rows()) {
    throw InvalidInputError("feature/target row count mismatch");
  }
  if (targets.cols() != target_width(kind)) {
    throw InvalidInputError("target width mismatch: expected " +
                            std::to_string(target_width(kind)) + ", got " +
                            std::to_string(targets.cols()));
  }
  if (!features.allFinite() || !targets.allFinite()) {
    throw InvalidInputError("fit inputs contain non-finite values");
  }
  if (config.learning_rate <= 0.0 || config.epochs < 0 ||
      config.batch_size <= 0 || config.weight_init_scale < 0.0) {
    throw InvalidConfigError("invalid training configuration");
  }

  const int input_dim = static_cast<int>(features.cols());
  const Eigen::Index n = features.rows();

  // Feature normalization from the training set; near-constant features get
  // unit scale so they pass through centered but unscaled.
  Normalization norm;
  norm.mean = features.colwise().mean();
  Eigen::MatrixXd centered = features.rowwise() - norm.mean.transpose();
  norm.scale =
      (centered.array().square().colwise().sum() / static_cast<double>(n))
          .sqrt();
  for (Eigen::Index i = 0; i < norm.scale.size(); ++i) {
    if (norm.scale(i) < 1e-12) {
      norm.scale(i) = 1.0;
    }
  }

  QuantileModel model(input_dim, std::move(levels), kind, config.hidden_sizes,
                      std::move(norm));
  const Eigen::MatrixXd x = model.normalize(features);

  // The all-zero model is the baseline iterate: training can only improve on
  // its full-batch loss, never return something worse.
  Eigen::VectorXd best = model.flat_parameters();
  double best_loss = loss_of(model.forward(x), targets, model.levels(),
                             model.head_width());

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  {
    auto weights = model.weights();
    auto biases = model.biases();
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const double sd = config.weight_init_scale /
                        std::sqrt(static_cast<double>(weights[l].cols()));
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
        for (Eigen::Index c = 0; c < weights[l].cols(); ++c) {
          weights[l](r, c) = sd * gauss(rng);
        }
      }
    }
    model.set_flat_parameters(
        flatten(weights, biases, model.parameter_count()));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  auto weights = model.weights();
  auto biases = model.biases();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(config.batch_size,
                                                        n - start);
      Eigen::MatrixXd xb(count, input_dim);
      Eigen::MatrixXd yb(count, targets.cols());
      for (Eigen::Index i = 0; i < count; ++i) {
        xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
        yb.row(i) = targets.row(order[static_cast<std::size_t>(start + i)]);
      }
      const auto acts = forward_all(weights, biases, xb);
      const Eigen::MatrixXd delta =
          head_gradient(acts.back(), yb, model.levels(), model.head_width());
      const LayerGrads grads = backward(weights, acts, delta);
      for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] -= config.learning_rate * grads.weights[l];
        biases[l] -= config.learning_rate * grads.biases[l];
      }
    }
    const double epoch_loss = loss_of(forward_all(weights, biases, x).back(),
                                      targets, model.levels(),
                                      model.head_width());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergedError(
          "full-batch loss became non-finite at epoch " +
              std::to_string(epoch),
          epoch);
    }
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best = flatten(weights, biases, model.parameter_count());
    }
  }

  model.set_flat_parameters(best);
  return model;
}

QuantileModel train(const std::vector<RegressionSample>& samples,
                    std::vector<double> levels, TargetKind kind,
                    const TrainConfig& config) {
  if (samples.empty()) {
    throw InvalidInputError("train requires at least one sample");
  }
  const int input_dim =
      static_cast<int>(samples.front().embedding.values.size()) +
      ActionVector::kSize;
  const Eigen::MatrixXd x = features_of(samples, input_dim);
  const Eigen::MatrixXd y = targets_of(samples, kind);
  return fit(x, y, std::move(levels), kind, config);
}

Eigen::MatrixXd predict_raw(const QuantileModel& model,
                            const LatentEmbedding& embedding,
                            const ActionVector& action) {
  const Eigen::VectorXd row = feature_row(embedding, action);
  if (row.size() != model.input_dim()) {
    throw InvalidInputError("input dimension mismatch: expected " +
                            std::to_string(model.input_dim()) + ", got " +
                            std::to_string(row.size()));
  }
  const Eigen::MatrixXd out = model.forward(model.normalize(row.transpose()));
  const int width = model.head_width();
  Eigen::MatrixXd shaped(model.levels().size(), width);
  for (Eigen::Index j = 0; j < shaped.rows(); ++j) {
    for (int c = 0; c < width; ++c) {
      shaped(j, c) = out(0, j * width + c);
    }
  }
  return shaped;
}

Eigen::MatrixXd predict(const QuantileModel& model,
                        const LatentEmbedding& embedding,
                        const ActionVector& action) {
  Eigen::MatrixXd shaped = predict_raw(model, embedding, action);
  // Rearrangement: raw per-level outputs may cross, so sort each output
  // component across levels to restore monotone quantile estimates.
  for (Eigen::Index c = 0; c < shaped.cols(); ++c) {
    std::sort(shaped.col(c).begin(), shaped.col(c).end());
  }
  return shaped;
}

double piw_score(const QuantileModel& model, const LatentEmbedding& embedding,
                 const ActionVector& action) {
  if (model.target_kind() != TargetKind::ActionInterval) {
    throw InvalidConfigError("piw_score requires an ActionInterval model");
  }
  if (model.levels().size() != 2) {
    throw InvalidConfigError("piw_score requires exactly two quantile levels");
  }
  const Eigen::MatrixXd bounds = predict(model, embedding, action);
  Eigen::VectorXd a(ActionVector::kSize);
  for (int c = 0; c < ActionVector::kSize; ++c) {
    a(c) = action[c];
  }
  const double to_lower = (a - bounds.row(0).transpose()).norm();
  const double to_upper = (bounds.row(1).transpose() - a).norm();
  return std::max(to_lower, to_upper);
}

}  // namespace actguard::quantile
