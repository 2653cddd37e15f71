#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "actguard/types.hpp"

namespace actguard::smd {

/// Gaussian fit of nominal (expert) states with a precomputed Cholesky
/// factor of the ridged covariance. Immutable once built; mahalanobis and
/// monitor are pure and safe to share across threads.
class GaussianStateModel {
 public:
  static constexpr int kDim = StateVector::kSize;

  /// Fits mean and unbiased (1/(N-1)) covariance to N >= 2 states, then
  /// factorizes covariance + ridge*I. Throws SingularCovarianceError when
  /// the ridged covariance is not positive definite.
  static GaussianStateModel fit(const std::vector<StateVector>& states,
                                double ridge);

  /// Rebuilds a model from stored moments (deserialization path). The
  /// covariance must be symmetric within 1e-10.
  static GaussianStateModel from_moments(const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& covariance,
                                         double ridge, int sample_count);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  double ridge() const { return ridge_; }
  int sample_count() const { return sample_count_; }
  /// Lower-triangular L with L * L^T = covariance + ridge * I.
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }

 private:
  GaussianStateModel() = default;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  double ridge_ = 0.0;
  int sample_count_ = 0;
  Eigen::MatrixXd factor_;
};

/// Ridge used when none is given explicitly: 1e-6 * trace(covariance) / dim,
/// computed from the unbiased covariance of the states.
double default_ridge(const std::vector<StateVector>& states);

/// fit with the default ridge.
GaussianStateModel fit_gaussian(const std::vector<StateVector>& states);

/// fit with an explicit ridge.
GaussianStateModel fit_gaussian(const std::vector<StateVector>& states,
                                double ridge);

/// Distance of a state from the fit in multivariate standard deviations:
/// sqrt((s - mu)^T (Sigma + ridge I)^{-1} (s - mu)), via triangular solve.
double mahalanobis(const GaussianStateModel& model, const StateVector& state);

enum class ThresholdSource { Percentile, Youden };

struct SafetyThreshold {
  double value = 0.0;
  double quantile_level = 0.0;
  ThresholdSource source = ThresholdSource::Percentile;
};

/// Nearest-rank percentile threshold: the ceil(gamma * n)-th smallest
/// distance, gamma in (0, 1].
SafetyThreshold fit_threshold(const std::vector<double>& distances,
                              double gamma);

enum class Verdict { Safe, Unsafe };

/// Unsafe iff mahalanobis(model, state) > threshold.value, strictly.
Verdict monitor(const GaussianStateModel& model,
                const SafetyThreshold& threshold, const StateVector& state);

/// One labeled episode for threshold tuning: its maximum per-step distance
/// and whether the run ultimately failed.
struct LabeledRun {
  double max_distance = 0.0;
  Outcome outcome = Outcome::Failure;
};

struct YoudenResult {
  double best_confidence = 0.0;  ///< grid level the winning threshold came from
  double threshold = 0.0;
  double j_score = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double fpr_penalty = 0.0;
};

/// One J evaluation per grid confidence, in grid order. At each level the
/// candidate threshold is the nearest-rank quantile of the success-run
/// distances (or of all runs when success_only is false). A run is flagged
/// when its max distance strictly exceeds the threshold; failures are the
/// positive class and J = TPR - fpr_penalty * FPR. Requires both outcomes
/// present and a non-empty grid.
std::vector<YoudenResult> youden_curve(
    const std::vector<LabeledRun>& labeled_runs,
    const std::vector<double>& confidence_grid, double fpr_penalty,
    bool success_only = true);

/// The curve point maximizing J, ties broken toward the larger confidence
/// (fewer alarms).
YoudenResult tune_threshold_youden(const std::vector<LabeledRun>& labeled_runs,
                                   const std::vector<double>& confidence_grid,
                                   double fpr_penalty,
                                   bool success_only = true);

}  // namespace actguard::smd
