#include "actguard/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actguard/errors.hpp"

namespace actguard::conformal {

namespace {

constexpr double kRankEps = 1e-9;

void check_miscoverage(double miscoverage) {
  if (!(miscoverage > 0.0 && miscoverage < 1.0)) {
    throw InvalidConfigError("miscoverage must lie in (0, 1)");
  }
}

std::size_t check_level_index(const quantile::QuantileModel& model,
                              std::size_t level_index) {
  if (level_index >= model.levels().size()) {
    throw InvalidConfigError("level index " + std::to_string(level_index) +
                             " out of range for a " +
                             std::to_string(model.levels().size()) +
                             "-level model");
  }
  return level_index;
}

}  // namespace

std::vector<double> conformity_scores(
    const quantile::QuantileModel& model,
    const std::vector<RegressionSample>& samples, std::size_t level_index) {
  check_level_index(model, level_index);
  if (model.target_kind() == quantile::TargetKind::ActionInterval) {
    throw InvalidConfigError(
        "conformity scores are defined for scalar target kinds only");
  }
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& sample : samples) {
    const double target = quantile::sample_target(model.target_kind(), sample)(0);
    const Eigen::MatrixXd pred =
        quantile::predict(model, sample.embedding, sample.predicted_action);
    scores.push_back(target - pred(static_cast<Eigen::Index>(level_index), 0));
  }
  return scores;
}

double conformal_offset(std::vector<double> scores, double miscoverage) {
  check_miscoverage(miscoverage);
  const std::size_t n = scores.size();
  // The finite-sample rank k = ceil((n+1)(1-a)) must not exceed n, which
  // requires n >= (1-a)/a calibration samples.
  const auto min_n = static_cast<std::size_t>(
      std::ceil((1.0 - miscoverage) / miscoverage - kRankEps));
  if (n < min_n) {
    throw InsufficientCalibrationError(
        "need at least " + std::to_string(min_n) +
            " calibration samples for miscoverage " +
            std::to_string(miscoverage) + ", got " + std::to_string(n),
        static_cast<int>(min_n));
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InvalidInputError("conformity scores contain a non-finite value");
    }
  }
  const auto k = static_cast<std::size_t>(std::ceil(
      (static_cast<double>(n) + 1.0) * (1.0 - miscoverage) - kRankEps));
  // k >= 1 since (n+1)(1-a) > 0; k <= n by the precondition above.
  auto nth = scores.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(scores.begin(), nth, scores.end());
  return *nth;
}

ConformalCalibration calibrate(const quantile::QuantileModel& model,
                               const std::vector<RegressionSample>& samples,
                               double miscoverage, std::size_t level_index) {
  check_miscoverage(miscoverage);
  check_level_index(model, level_index);
  ConformalCalibration cal;
  cal.offset = conformal_offset(conformity_scores(model, samples, level_index),
                                miscoverage);
  cal.miscoverage = miscoverage;
  cal.level = model.levels()[level_index];
  cal.calibration_size = samples.size();
  cal.target_kind = model.target_kind();
  return cal;
}

double calibrated_bound(const quantile::QuantileModel& model,
                        const ConformalCalibration& calibration,
                        const LatentEmbedding& embedding,
                        const ActionVector& action) {
  if (calibration.target_kind != model.target_kind()) {
    throw InvalidConfigError(
        "calibration target kind does not match the model");
  }
  const auto& levels = model.levels();
  std::size_t index = levels.size();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == calibration.level) {
      index = i;
      break;
    }
  }
  if (index == levels.size()) {
    throw InvalidConfigError("calibration level " +
                             std::to_string(calibration.level) +
                             " is not one of the model's levels");
  }
  const Eigen::MatrixXd pred = quantile::predict(model, embedding, action);
  return pred(static_cast<Eigen::Index>(index), 0) + calibration.offset;
}

}  // namespace actguard::conformal
