#include "actguard/targets.hpp"

#include <cmath>

#include "actguard/errors.hpp"

namespace actguard {

namespace {

void require_finite(const ActionVector& a, const ActionVector& b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw InvalidInputError("action vectors must be finite");
  }
}

double distance_over(const ActionVector& a, const ActionVector& b, int n) {
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

double action_error(const ActionVector& predicted, const ActionVector& expert) {
  require_finite(predicted, expert);
  return distance_over(predicted, expert, ActionVector::kSize);
}

double target_distance6(const ActionVector& predicted, const ActionVector& expert) {
  require_finite(predicted, expert);
  return distance_over(predicted, expert, 6);
}

double target_cosine(const ActionVector& predicted, const ActionVector& expert) {
  require_finite(predicted, expert);
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (int i = 0; i < ActionVector::kSize; ++i) {
    dot += predicted[i] * expert[i];
    na += predicted[i] * predicted[i];
    nb += expert[i] * expert[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine similarity of a zero-norm action");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace actguard
