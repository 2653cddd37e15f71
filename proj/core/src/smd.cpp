#include "actguard/smd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actguard/errors.hpp"

namespace actguard::smd {

namespace {

constexpr double kRankEps = 1e-9;
constexpr double kSymmetryTol = 1e-10;

Eigen::VectorXd to_vector(const StateVector& state) {
  Eigen::VectorXd v(StateVector::kSize);
  for (int i = 0; i < StateVector::kSize; ++i) {
    v(i) = state[i];
  }
  return v;
}

/// Sample mean and unbiased covariance of N >= 2 states.
void moments_of(const std::vector<StateVector>& states, Eigen::VectorXd& mean,
                Eigen::MatrixXd& covariance) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (n < 2) {
    throw InvalidInputError("gaussian fit requires at least 2 states, got " +
                            std::to_string(n));
  }
  Eigen::MatrixXd x(n, StateVector::kSize);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = states[static_cast<std::size_t>(i)];
    if (!s.is_finite()) {
      throw InvalidInputError("state " + std::to_string(i) +
                              " contains a non-finite value");
    }
    x.row(i) = to_vector(s).transpose();
  }
  mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  covariance =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
}

Eigen::MatrixXd factorize(const Eigen::MatrixXd& covariance, double ridge) {
  const Eigen::MatrixXd ridged =
      covariance +
      ridge * Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols());
  const Eigen::LLT<Eigen::MatrixXd> llt(ridged);
  Eigen::MatrixXd factor = llt.matrixL();
  // LLT can return quietly on semidefinite inputs; insist on strictly
  // positive, finite pivots so downstream solves are well defined.
  bool ok = llt.info() == Eigen::Success && factor.allFinite();
  for (Eigen::Index i = 0; ok && i < factor.rows(); ++i) {
    ok = factor(i, i) > 0.0;
  }
  if (!ok) {
    throw SingularCovarianceError(
        "ridged covariance is not positive definite (ridge = " +
        std::to_string(ridge) + "); increase the ridge");
  }
  return factor;
}

}  // namespace

GaussianStateModel GaussianStateModel::fit(
    const std::vector<StateVector>& states, double ridge) {
  if (!(ridge >= 0.0)) {
    throw InvalidConfigError("ridge must be non-negative");
  }
  GaussianStateModel model;
  moments_of(states, model.mean_, model.covariance_);
  model.ridge_ = ridge;
  model.sample_count_ = static_cast<int>(states.size());
  model.factor_ = factorize(model.covariance_, ridge);
  return model;
}

GaussianStateModel GaussianStateModel::from_moments(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
    double ridge, int sample_count) {
  if (mean.size() != kDim || covariance.rows() != kDim ||
      covariance.cols() != kDim) {
    throw InvalidInputError("moment dimensions must match the state size");
  }
  if (!(ridge >= 0.0)) {
    throw InvalidConfigError("ridge must be non-negative");
  }
  if (sample_count < 2) {
    throw InvalidInputError("sample count must be at least 2");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
      kSymmetryTol) {
    throw InvalidInputError("covariance is not symmetric within 1e-10");
  }
  GaussianStateModel model;
  model.mean_ = mean;
  // Symmetrize to scrub round-trip noise below the tolerance.
  model.covariance_ = 0.5 * (covariance + covariance.transpose());
  model.ridge_ = ridge;
  model.sample_count_ = sample_count;
  model.factor_ = factorize(model.covariance_, ridge);
  return model;
}

double default_ridge(const std::vector<StateVector>& states) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  moments_of(states, mean, covariance);
  return 1e-6 * covariance.trace() / static_cast<double>(StateVector::kSize);
}

GaussianStateModel fit_gaussian(const std::vector<StateVector>& states) {
  return GaussianStateModel::fit(states, default_ridge(states));
}

GaussianStateModel fit_gaussian(const std::vector<StateVector>& states,
                                double ridge) {
  return GaussianStateModel::fit(states, ridge);
}

double mahalanobis(const GaussianStateModel& model, const StateVector& state) {
  if (!state.is_finite()) {
    throw InvalidInputError("state contains a non-finite value");
  }
  const Eigen::VectorXd centered = to_vector(state) - model.mean();
  // Solve L y = (s - mu); then ||y|| = sqrt((s-mu)^T (L L^T)^{-1} (s-mu)).
  const Eigen::VectorXd y =
      model.cholesky_factor().triangularView<Eigen::Lower>().solve(centered);
  return y.norm();
}

SafetyThreshold fit_threshold(const std::vector<double>& distances,
                              double gamma) {
  if (distances.empty()) {
    throw InvalidInputError("threshold fitting requires at least one distance");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidConfigError("quantile level must lie in (0, 1]");
  }
  for (double d : distances) {
    if (!std::isfinite(d)) {
      throw InvalidInputError("distances contain a non-finite value");
    }
  }
  const auto n = distances.size();
  auto k = static_cast<std::size_t>(
      std::ceil(gamma * static_cast<double>(n) - kRankEps));
  k = std::max<std::size_t>(k, 1);
  std::vector<double> sorted = distances;
  auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(sorted.begin(), nth, sorted.end());
  SafetyThreshold threshold;
  threshold.value = *nth;
  threshold.quantile_level = gamma;
  threshold.source = ThresholdSource::Percentile;
  return threshold;
}

Verdict monitor(const GaussianStateModel& model,
                const SafetyThreshold& threshold, const StateVector& state) {
  return mahalanobis(model, state) > threshold.value ? Verdict::Unsafe
                                                     : Verdict::Safe;
}

std::vector<YoudenResult> youden_curve(
    const std::vector<LabeledRun>& labeled_runs,
    const std::vector<double>& confidence_grid, double fpr_penalty,
    bool success_only) {
  if (confidence_grid.empty()) {
    throw InvalidConfigError("confidence grid must be non-empty");
  }
  if (!(fpr_penalty >= 0.0)) {
    throw InvalidConfigError("false-positive penalty must be non-negative");
  }
  std::vector<double> success_distances;
  std::vector<double> all_distances;
  std::size_t n_failure = 0;
  for (const auto& run : labeled_runs) {
    if (!std::isfinite(run.max_distance)) {
      throw InvalidInputError("run distances contain a non-finite value");
    }
    all_distances.push_back(run.max_distance);
    if (run.outcome == Outcome::Success) {
      success_distances.push_back(run.max_distance);
    } else {
      ++n_failure;
    }
  }
  const std::size_t n_success = success_distances.size();
  if (n_success == 0 || n_failure == 0) {
    throw InvalidInputError(
        "threshold tuning requires both successful and failed runs");
  }

  const std::vector<double>& pool =
      success_only ? success_distances : all_distances;
  std::vector<YoudenResult> curve;
  curve.reserve(confidence_grid.size());
  for (double confidence : confidence_grid) {
    const SafetyThreshold threshold = fit_threshold(pool, confidence);
    std::size_t true_pos = 0;
    std::size_t false_pos = 0;
    for (const auto& run : labeled_runs) {
      if (run.max_distance > threshold.value) {
        (run.outcome == Outcome::Failure ? true_pos : false_pos) += 1;
      }
    }
    YoudenResult point;
    point.best_confidence = confidence;
    point.threshold = threshold.value;
    point.tpr = static_cast<double>(true_pos) / static_cast<double>(n_failure);
    point.fpr = static_cast<double>(false_pos) / static_cast<double>(n_success);
    point.j_score = point.tpr - fpr_penalty * point.fpr;
    point.fpr_penalty = fpr_penalty;
    curve.push_back(point);
  }
  return curve;
}

YoudenResult tune_threshold_youden(const std::vector<LabeledRun>& labeled_runs,
                                   const std::vector<double>& confidence_grid,
                                   double fpr_penalty, bool success_only) {
  const std::vector<YoudenResult> curve =
      youden_curve(labeled_runs, confidence_grid, fpr_penalty, success_only);
  const YoudenResult* best = &curve.front();
  for (const auto& point : curve) {
    // Ties break toward the larger confidence: a higher threshold with the
    // same J raises fewer alarms.
    if (point.j_score > best->j_score ||
        (point.j_score == best->j_score &&
         point.best_confidence > best->best_confidence)) {
      best = &point;
    }
  }
  return *best;
}

}  // namespace actguard::smd
