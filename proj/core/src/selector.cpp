#include "actguard/selector.hpp"

#include <random>
#include <string>

#include "actguard/errors.hpp"

namespace actguard::selector {

namespace {

void check_nonempty(const std::vector<CandidateAction>& candidates) {
  if (candidates.empty()) {
    throw InvalidInputError("candidate set must be non-empty");
  }
}

}  // namespace

std::vector<double> score_candidates(
    const quantile::QuantileModel& model,
    const conformal::ConformalCalibration& calibration,
    const std::vector<CandidateAction>& candidates) {
  check_nonempty(candidates);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    scores.push_back(conformal::calibrated_bound(
        model, calibration, candidate.embedding, candidate.action));
  }
  return scores;
}

SelectionResult select_cqr(const std::vector<CandidateAction>& candidates,
                           const std::vector<double>& scores) {
  check_nonempty(candidates);
  if (scores.size() != candidates.size()) {
    throw InvalidInputError(
        "score count " + std::to_string(scores.size()) +
        " does not match candidate count " + std::to_string(candidates.size()));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) {
      best = i;
    }
  }
  SelectionResult result;
  result.chosen_index = static_cast<int>(best);
  result.chosen_action = candidates[best].action;
  result.scores = scores;
  result.strategy = Strategy::Cqr;
  return result;
}

SelectionResult select_default(const std::vector<CandidateAction>& candidates) {
  check_nonempty(candidates);
  SelectionResult result;
  result.chosen_index = 0;
  result.chosen_action = candidates.front().action;
  result.strategy = Strategy::Default;
  return result;
}

SelectionResult select_random(const std::vector<CandidateAction>& candidates,
                              std::uint64_t seed) {
  check_nonempty(candidates);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const std::size_t index = pick(rng);
  SelectionResult result;
  result.chosen_index = static_cast<int>(index);
  result.chosen_action = candidates[index].action;
  result.strategy = Strategy::Random;
  return result;
}

SelectionResult select_mean(const std::vector<CandidateAction>& candidates) {
  check_nonempty(candidates);
  std::array<double, ActionVector::kSize> sum{};
  for (const auto& candidate : candidates) {
    for (int c = 0; c < ActionVector::kSize; ++c) {
      sum[static_cast<std::size_t>(c)] += candidate.action[c];
    }
  }
  const auto k = static_cast<double>(candidates.size());
  for (double& v : sum) {
    v /= k;
  }
  SelectionResult result;
  result.chosen_index = -1;
  result.chosen_action = ActionVector::from_array(sum);
  result.strategy = Strategy::Mean;
  return result;
}

}  // namespace actguard::selector
