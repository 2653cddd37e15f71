#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "actguard/conformal.hpp"
#include "actguard/quantile.hpp"
#include "actguard/selector.hpp"
#include "actguard/smd.hpp"
#include "actguard/types.hpp"

namespace actguard::sim {

struct AxisBounds {
  double lo = -1.0;
  double hi = 1.0;
};

/// Point-reaching environment in the 8-dim state space: the three position
/// channels move toward a goal, orientation and grip carry small coupled
/// dynamics, and leaving the workspace or timing out is a failure.
struct EnvConfig {
  std::array<AxisBounds, 3> workspace_bounds = {
      AxisBounds{}, AxisBounds{}, AxisBounds{}};
  double target_region_radius = 0.06;
  int max_steps = 60;
  double expert_step_gain = 0.15;
  double candidate_noise_sigma = 0.25;
  int embedding_dim = 16;
  double embedding_noise_sigma = 0.08;
  /// Per-channel state drift added every step from ood_onset_step on.
  std::array<double, StateVector::kSize> ood_drift = {0, 0, 0, 0, 0, 0, 0, 0};
  std::optional<int> ood_onset_step;
  std::uint64_t seed = 0;  ///< base seed mixed into every episode stream
};

enum class PolicyMode {
  Expert,      ///< noiseless: every candidate equals the expert action
  Stochastic,  ///< candidates perturbed by seeded Gaussian noise
};

/// Stand-in for a frozen stochastic policy: holds the environment knobs and
/// whether candidate noise is enabled.
struct PolicyHandle {
  EnvConfig env_config;
  PolicyMode mode = PolicyMode::Stochastic;
};

struct Goal {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct EpisodeSetup {
  StateVector state;
  Goal goal;
};

/// Deterministic start state and goal for one episode stream; start and
/// goal keep a minimum separation so every episode needs real progress.
EpisodeSetup episode_setup(const EnvConfig& config, std::uint64_t stream_seed);

/// Proportional controller toward the goal: position step gain * delta with
/// the step norm clipped at 0.5, orientation driven toward zero, grip
/// commanded closed within twice the target radius.
ActionVector expert_action(const EnvConfig& config, const StateVector& state,
                           const Goal& goal);

/// K candidates around the expert action: candidate i adds a Gaussian
/// magnitude eps_i along a random unit direction (so its action error is
/// exactly |eps_i|). The first half of each embedding leaks |eps_i| plus a
/// small state term and noise; the second half is pure noise. Deterministic
/// given the seed; Expert mode forces eps = 0.
std::vector<CandidateAction> sample_candidates(const PolicyHandle& policy,
                                               const StateVector& state,
                                               const Goal& goal, int k,
                                               std::uint64_t seed);

/// One dynamics step: position and orientation integrate the deltas, the
/// coupling channel relaxes toward 1 minus orientation activity, and grip
/// tracks its command with first-order lag, clamped to [0, 1].
StateVector apply_action(const StateVector& state, const ActionVector& action);

bool in_workspace(const EnvConfig& config, const StateVector& state);
double goal_distance(const StateVector& state, const Goal& goal);

/// Called once per executed step with the pre-action state, the expert
/// action for that state, and the sampled candidates.
using StepObserver = std::function<void(
    int step, const StateVector& state, const ActionVector& expert,
    const std::vector<CandidateAction>& candidates)>;

struct RolloutOptions {
  selector::Strategy strategy = selector::Strategy::Default;
  int k = 10;
  /// Required for the Cqr strategy; when present for any strategy, per-step
  /// candidate bounds are recorded into the trajectory.
  const quantile::QuantileModel* model = nullptr;
  const conformal::ConformalCalibration* calibration = nullptr;
  /// When present, per-step Mahalanobis distances are recorded.
  const smd::GaussianStateModel* detector = nullptr;
  std::optional<smd::SafetyThreshold> threshold;
  /// Halt the episode when the monitor reports Unsafe (requires detector
  /// and threshold); halted runs are labeled distinctly from failures.
  bool intervene = false;
  StepObserver observer;
};

/// Receding-horizon episode: per step sample K candidates, select one by
/// the configured strategy, execute it with process noise of scale
/// 0.1 * candidate_noise_sigma, then check termination. Success means
/// entering the target region within max_steps; leaving the workspace or
/// timing out is failure. Bit-identical given (config, seed).
Trajectory rollout(const PolicyHandle& policy, const RolloutOptions& options,
                   std::uint64_t episode_seed);

/// One supervised sample keyed by its provenance in the generated stream.
struct RegressionRecord {
  std::uint64_t episode = 0;
  int step = 0;
  int cand = 0;
  RegressionSample sample;

  friend bool operator==(const RegressionRecord&,
                         const RegressionRecord&) = default;
};

struct Dataset {
  std::vector<RegressionRecord> regression;
  std::vector<StateVector> expert_states;
  std::vector<Trajectory> trajectories;
};

/// For every episode seed: one expert-mode rollout contributing its visited
/// states to the nominal pool, and one stochastic rollout (first-candidate
/// execution) contributing a labeled trajectory plus one regression sample
/// per candidate per step. Both rollouts share the episode's task setup.
Dataset generate_dataset(const EnvConfig& config,
                         const std::vector<std::uint64_t>& episode_seeds,
                         int k);

}  // namespace actguard::sim
