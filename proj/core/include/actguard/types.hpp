#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace actguard {

/// 7-component delta action: position deltas, rotation deltas, gripper command.
struct ActionVector {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double dthx = 0.0;
  double dthy = 0.0;
  double dthz = 0.0;
  double grip = 0.0;

  static constexpr int kSize = 7;

  double operator[](int i) const {
    switch (i) {
      case 0: return dx;
      case 1: return dy;
      case 2: return dz;
      case 3: return dthx;
      case 4: return dthy;
      case 5: return dthz;
      default: return grip;
    }
  }

  double& operator[](int i) {
    switch (i) {
      case 0: return dx;
      case 1: return dy;
      case 2: return dz;
      case 3: return dthx;
      case 4: return dthy;
      case 5: return dthz;
      default: return grip;
    }
  }

  std::array<double, kSize> to_array() const {
    return {dx, dy, dz, dthx, dthy, dthz, grip};
  }

  static ActionVector from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }

  bool is_finite() const {
    for (int i = 0; i < kSize; ++i) {
      if (!std::isfinite((*this)[i])) return false;
    }
    return true;
  }

  friend bool operator==(const ActionVector&, const ActionVector&) = default;
};

/// 8-component robot state: end-effector position, orientation channels, gripper.
struct StateVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double thx = 0.0;
  double thy = 0.0;
  double thz = 0.0;
  double w = 0.0;
  double grip = 0.0;

  static constexpr int kSize = 8;

  double operator[](int i) const {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return z;
      case 3: return thx;
      case 4: return thy;
      case 5: return thz;
      case 6: return w;
      default: return grip;
    }
  }

  double& operator[](int i) {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return z;
      case 3: return thx;
      case 4: return thy;
      case 5: return thz;
      case 6: return w;
      default: return grip;
    }
  }

  std::array<double, kSize> to_array() const {
    return {x, y, z, thx, thy, thz, w, grip};
  }

  static StateVector from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }

  bool is_finite() const {
    for (int i = 0; i < kSize; ++i) {
      if (!std::isfinite((*this)[i])) return false;
    }
    return true;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Latent feature vector attached to a sampled action. Length is fixed per
/// experiment (the embedding dimension L of the generating policy).
struct LatentEmbedding {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }

  bool is_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const LatentEmbedding&, const LatentEmbedding&) = default;
};

/// One stochastic sample from the policy: the proposed action together with
/// the latent embedding that produced it.
struct CandidateAction {
  ActionVector action;
  LatentEmbedding embedding;

  friend bool operator==(const CandidateAction&, const CandidateAction&) = default;
};

/// Supervised triple for quantile-regressor training: features are
/// (embedding, predicted_action), the target is derived from expert_action.
struct RegressionSample {
  LatentEmbedding embedding;
  ActionVector predicted_action;
  ActionVector expert_action;

  friend bool operator==(const RegressionSample&, const RegressionSample&) = default;
};

enum class Outcome { Success, Failure };

/// One control step of a rollout. `state` is the observed (pre-action) state;
/// `candidates` is empty when a trajectory is replayed from a log.
struct TrajectoryStep {
  StateVector state;
  ActionVector executed_action;
  std::vector<CandidateAction> candidates;
  std::vector<double> candidate_scores;  ///< calibrated bounds, empty when unscored
  std::optional<double> uncertainty_score;
  std::optional<double> smd_score;

  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

/// A full rollout with its outcome label. `halted` marks runs stopped by the
/// state monitor, which is bookkept separately from organic failures.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  Outcome outcome = Outcome::Failure;
  bool halted = false;
  std::uint64_t seed = 0;
  std::string task_id;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace actguard
