#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "actguard/types.hpp"

namespace actguard::quantile {

/// What the regressor predicts quantiles of.
enum class TargetKind {
  Distance7,       ///< full 7-component action error
  Distance6,       ///< pose-only action error, gripper excluded
  Cosine,          ///< cosine similarity between predicted and expert action
  ActionInterval,  ///< per-component expert action values (7 outputs per level)
};

/// Width of one prediction row: 1 for scalar targets, 7 for ActionInterval.
int target_width(TargetKind kind);

struct TrainConfig {
  std::vector<int> hidden_sizes = {64};
  double learning_rate = 0.05;
  int epochs = 80;
  int batch_size = 64;
  std::uint64_t seed = 1234;
  double weight_init_scale = 0.5;
};

/// Per-feature affine normalization applied to inputs before the regressor.
/// Targets are never normalized.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

/// A small feed-forward quantile regressor over [embedding ; action]
/// features, with tanh hidden layers and a linear head producing one value
/// (or one 7-vector) per quantile level. Immutable after training; predict
/// is pure and safe to call concurrently.
class QuantileModel {
 public:
  QuantileModel() = default;

  /// Builds a zero-parameter model of the given architecture.
  QuantileModel(int input_dim, std::vector<double> levels, TargetKind kind,
                std::vector<int> hidden_sizes, Normalization normalization);

  int input_dim() const { return input_dim_; }
  const std::vector<double>& levels() const { return levels_; }
  TargetKind target_kind() const { return kind_; }
  const std::vector<int>& hidden_sizes() const { return hidden_sizes_; }
  const Normalization& normalization() const { return norm_; }
  int head_width() const { return target_width(kind_); }
  int output_dim() const {
    return static_cast<int>(levels_.size()) * head_width();
  }

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  int parameter_count() const;
  /// Flat parameter view: per layer, the weight matrix row-major, then the
  /// bias. This is also the serialized layout.
  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);

  /// Forward pass on pre-normalized feature rows; returns n x output_dim.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& normalized_features) const;

  /// Applies stored normalization to raw feature rows.
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& raw_features) const;

 private:
  int input_dim_ = 0;
  std::vector<double> levels_;
  TargetKind kind_ = TargetKind::Distance7;
  std::vector<int> hidden_sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Normalization norm_;
};

/// Pinball loss for residual u at quantile level tau:
/// tau*u for u >= 0, (tau-1)*u otherwise.
double pinball_loss(double residual, double level);

/// Assembles the raw feature row [embedding ; action] for one input.
Eigen::VectorXd feature_row(const LatentEmbedding& embedding,
                            const ActionVector& action);

/// Computes the regression target(s) for one sample under the given kind.
/// Scalar kinds yield a 1-vector, ActionInterval the 7 expert components.
Eigen::VectorXd sample_target(TargetKind kind, const RegressionSample& sample);

/// Mean pinball loss over samples, levels, and output components.
double batch_loss(const QuantileModel& model,
                  const std::vector<RegressionSample>& samples);

/// Analytic gradient of batch_loss with respect to the flat parameters.
Eigen::VectorXd batch_loss_gradient(const QuantileModel& model,
                                    const std::vector<RegressionSample>& samples);

/// Core trainer on explicit feature/target matrices. Normalization is
/// computed from the features; targets stay raw. Mini-batch gradient
/// descent with a fixed learning rate and seeded shuffling; the returned
/// parameters are the best full-batch-loss iterate seen, and never worse
/// than the all-zero model. Deterministic given the seed.
QuantileModel fit(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                  std::vector<double> levels, TargetKind kind,
                  const TrainConfig& config);

/// Convenience trainer: derives features and targets from samples via the
/// target kind, then calls fit.
QuantileModel train(const std::vector<RegressionSample>& samples,
                    std::vector<double> levels, TargetKind kind,
                    const TrainConfig& config);

/// Per-level predictions for one input, rows sorted ascending per output
/// component (rearrangement; raw head outputs may cross between levels).
/// Shape: levels x head_width.
Eigen::MatrixXd predict(const QuantileModel& model,
                        const LatentEmbedding& embedding,
                        const ActionVector& action);

/// Unsorted head outputs, same shape as predict.
Eigen::MatrixXd predict_raw(const QuantileModel& model,
                            const LatentEmbedding& embedding,
                            const ActionVector& action);

/// Prediction-interval width for a two-level ActionInterval model:
/// max(|action - lower|_2, |upper - action|_2).
double piw_score(const QuantileModel& model, const LatentEmbedding& embedding,
                 const ActionVector& action);

}  // namespace actguard::quantile
