#pragma once

#include <cstdint>
#include <vector>

#include "actguard/conformal.hpp"
#include "actguard/quantile.hpp"
#include "actguard/types.hpp"

namespace actguard::selector {

enum class Strategy { Cqr, Default, Random, Mean };

/// Outcome of choosing one action from a candidate set. chosen_index is -1
/// for the Mean strategy, whose action is synthesized rather than picked;
/// scores are populated for Cqr only.
struct SelectionResult {
  int chosen_index = 0;
  ActionVector chosen_action;
  std::vector<double> scores;
  Strategy strategy = Strategy::Default;
};

/// Calibrated error bound per candidate, order preserved.
std::vector<double> score_candidates(
    const quantile::QuantileModel& model,
    const conformal::ConformalCalibration& calibration,
    const std::vector<CandidateAction>& candidates);

/// Picks the candidate with the lowest calibrated bound; ties break toward
/// the lowest index.
SelectionResult select_cqr(const std::vector<CandidateAction>& candidates,
                           const std::vector<double>& scores);

/// Executes the first sampled candidate unconditionally.
SelectionResult select_default(const std::vector<CandidateAction>& candidates);

/// Picks a candidate uniformly at random; deterministic given the seed.
SelectionResult select_random(const std::vector<CandidateAction>& candidates,
                              std::uint64_t seed);

/// Synthesizes the componentwise average of all candidates (grip included);
/// chosen_index is the -1 sentinel.
SelectionResult select_mean(const std::vector<CandidateAction>& candidates);

}  // namespace actguard::selector
