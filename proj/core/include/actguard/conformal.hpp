#pragma once

#include <cstddef>
#include <vector>

#include "actguard/quantile.hpp"
#include "actguard/types.hpp"

namespace actguard::conformal {

/// The conformal correction for one trained quantile model: add `offset` to
/// the model's level-`level` prediction to obtain a bound with finite-sample
/// coverage at least 1 - miscoverage.
struct ConformalCalibration {
  double offset = 0.0;
  double miscoverage = 0.0;
  double level = 0.0;
  std::size_t calibration_size = 0;
  quantile::TargetKind target_kind = quantile::TargetKind::Distance7;
};

/// Conformity scores on held-out samples: realized target minus the model's
/// prediction at levels()[level_index]. Positive means the model under-covered
/// that sample.
std::vector<double> conformity_scores(const quantile::QuantileModel& model,
                                      const std::vector<RegressionSample>& samples,
                                      std::size_t level_index = 0);

/// Split-conformal offset: the k-th smallest score with
/// k = ceil((n + 1) * (1 - miscoverage)). Requires n >= ceil((1 - a) / a) so
/// that k <= n; throws InsufficientCalibrationError otherwise.
double conformal_offset(std::vector<double> scores, double miscoverage);

/// Runs conformity_scores + conformal_offset and records the bookkeeping
/// needed to apply and serialize the correction.
ConformalCalibration calibrate(const quantile::QuantileModel& model,
                               const std::vector<RegressionSample>& samples,
                               double miscoverage,
                               std::size_t level_index = 0);

/// Calibrated upper bound for one input: prediction at the calibrated level
/// plus the conformal offset. The calibration must match the model's target
/// kind and one of its levels.
double calibrated_bound(const quantile::QuantileModel& model,
                        const ConformalCalibration& calibration,
                        const LatentEmbedding& embedding,
                        const ActionVector& action);

}  // namespace actguard::conformal
