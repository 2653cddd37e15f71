#include "actguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "actguard/errors.hpp"
#include "actguard/rng.hpp"

namespace actguard::sim {

namespace {

// Stream tags keep the per-episode random substreams independent.
constexpr std::uint64_t kStreamSetup = 0x5e7;
constexpr std::uint64_t kStreamCandidates = 0xca9d;
constexpr std::uint64_t kStreamSelect = 0x5e1ec7;
constexpr std::uint64_t kStreamProcess = 0xf90ce55;

// Start/goal margin from the walls, as a fraction of each axis range, and
// the minimum start-goal separation.
constexpr double kSpawnMargin = 0.05;
constexpr double kMinSeparation = 0.3;

// Fraction of candidate noise applied to every executed action.
constexpr double kProcessNoiseFraction = 0.1;

void check_config(const EnvConfig& config) {
  for (const auto& axis : config.workspace_bounds) {
    if (!(axis.lo < axis.hi)) {
      throw InvalidConfigError("workspace bounds must satisfy lo < hi");
    }
  }
  if (!(config.target_region_radius > 0.0)) {
    throw InvalidConfigError("target region radius must be positive");
  }
  if (config.max_steps < 1) {
    throw InvalidConfigError("max_steps must be at least 1");
  }
  if (!(config.expert_step_gain > 0.0 && config.expert_step_gain <= 1.0)) {
    throw InvalidConfigError("expert step gain must lie in (0, 1]");
  }
  if (config.candidate_noise_sigma < 0.0 ||
      config.embedding_noise_sigma < 0.0) {
    throw InvalidConfigError("noise scales must be non-negative");
  }
  if (config.embedding_dim < 2) {
    throw InvalidConfigError("embedding dimension must be at least 2");
  }
  if (config.ood_onset_step && *config.ood_onset_step < 0) {
    throw InvalidConfigError("ood onset step must be non-negative");
  }
}

/// Unit 7-vector from seven Gaussian draws.
std::array<double, ActionVector::kSize> unit_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<double, ActionVector::kSize> dir{};
  double norm_sq = 0.0;
  for (double& d : dir) {
    d = gauss(rng);
    norm_sq += d * d;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-12) {
    dir = {1, 0, 0, 0, 0, 0, 0};
    return dir;
  }
  for (double& d : dir) {
    d /= norm;
  }
  return dir;
}

}  // namespace

EpisodeSetup episode_setup(const EnvConfig& config, std::uint64_t stream_seed) {
  check_config(config);
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  auto draw_position = [&]() {
    std::array<double, 3> p{};
    for (int axis = 0; axis < 3; ++axis) {
      const auto& b = config.workspace_bounds[static_cast<std::size_t>(axis)];
      const double margin = kSpawnMargin * (b.hi - b.lo);
      p[static_cast<std::size_t>(axis)] =
          b.lo + margin + (b.hi - b.lo - 2.0 * margin) * uni(rng);
    }
    return p;
  };

  const auto start = draw_position();
  auto goal = draw_position();
  // Redraw near-trivial tasks; bail out after a bounded number of attempts
  // so pathological workspaces still terminate.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double dx = goal[0] - start[0];
    const double dy = goal[1] - start[1];
    const double dz = goal[2] - start[2];
    if (std::sqrt(dx * dx + dy * dy + dz * dz) >= kMinSeparation) {
      break;
    }
    goal = draw_position();
  }

  EpisodeSetup setup;
  setup.state.x = start[0];
  setup.state.y = start[1];
  setup.state.z = start[2];
  setup.state.thx = -0.2 + 0.4 * uni(rng);
  setup.state.thy = -0.2 + 0.4 * uni(rng);
  setup.state.thz = -0.2 + 0.4 * uni(rng);
  setup.state.w = 0.8 + 0.2 * uni(rng);
  setup.state.grip = 0.0;
  setup.goal = Goal{goal[0], goal[1], goal[2]};
  return setup;
}

ActionVector expert_action(const EnvConfig& config, const StateVector& state,
                           const Goal& goal) {
  if (!state.is_finite()) {
    throw InvalidInputError("state contains a non-finite value");
  }
  const double dx = goal.x - state.x;
  const double dy = goal.y - state.y;
  const double dz = goal.z - state.z;
  const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);

  ActionVector a;
  a.dx = config.expert_step_gain * dx;
  a.dy = config.expert_step_gain * dy;
  a.dz = config.expert_step_gain * dz;
  const double step_norm = config.expert_step_gain * dist;
  if (step_norm > 0.5) {
    const double shrink = 0.5 / step_norm;
    a.dx *= shrink;
    a.dy *= shrink;
    a.dz *= shrink;
  }
  a.dthx = -config.expert_step_gain * state.thx;
  a.dthy = -config.expert_step_gain * state.thy;
  a.dthz = -config.expert_step_gain * state.thz;
  a.grip = dist <= 2.0 * config.target_region_radius ? 1.0 : 0.0;
  return a;
}

std::vector<CandidateAction> sample_candidates(const PolicyHandle& policy,
                                               const StateVector& state,
                                               const Goal& goal, int k,
                                               std::uint64_t seed) {
  if (k < 1) {
    throw InvalidInputError("candidate count must be at least 1");
  }
  const EnvConfig& config = policy.env_config;
  check_config(config);
  const ActionVector expert = expert_action(config, state, goal);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dim = config.embedding_dim;
  const int leak_dim = dim / 2;

  std::vector<CandidateAction> candidates;
  candidates.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double eps_raw = config.candidate_noise_sigma * gauss(rng);
    const auto dir = unit_direction(rng);
    const double eps = policy.mode == PolicyMode::Expert ? 0.0 : eps_raw;

    CandidateAction candidate;
    candidate.action = expert;
    for (int c = 0; c < ActionVector::kSize; ++c) {
      candidate.action[c] += eps * dir[static_cast<std::size_t>(c)];
    }
    // The leak half carries |eps| (the candidate's exact action error)
    // obscured by a state term and noise; the rest is uninformative.
    candidate.embedding.values.resize(static_cast<std::size_t>(dim));
    const double magnitude = std::abs(eps);
    for (int j = 0; j < dim; ++j) {
      double value;
      if (j < leak_dim) {
        value = magnitude + 0.05 * state[j % StateVector::kSize] +
                config.embedding_noise_sigma * gauss(rng);
      } else {
        value = gauss(rng);
      }
      candidate.embedding.values[static_cast<std::size_t>(j)] = value;
    }
    candidates.push_back(std::move(candidate));
  }
  return candidates;
}

StateVector apply_action(const StateVector& state, const ActionVector& action) {
  if (!state.is_finite() || !action.is_finite()) {
    throw InvalidInputError("dynamics inputs contain a non-finite value");
  }
  StateVector next = state;
  next.x += action.dx;
  next.y += action.dy;
  next.z += action.dz;
  next.thx += action.dthx;
  next.thy += action.dthy;
  next.thz += action.dthz;
  next.w += 0.2 * (1.0 - state.w) -
            0.1 * (action.dthx + action.dthy + action.dthz);
  next.grip = std::clamp(state.grip + 0.5 * (action.grip - state.grip), 0.0, 1.0);
  return next;
}

bool in_workspace(const EnvConfig& config, const StateVector& state) {
  const std::array<double, 3> pos = {state.x, state.y, state.z};
  for (int axis = 0; axis < 3; ++axis) {
    const auto& b = config.workspace_bounds[static_cast<std::size_t>(axis)];
    const double p = pos[static_cast<std::size_t>(axis)];
    if (p < b.lo || p > b.hi) {
      return false;
    }
  }
  return true;
}

double goal_distance(const StateVector& state, const Goal& goal) {
  const double dx = goal.x - state.x;
  const double dy = goal.y - state.y;
  const double dz = goal.z - state.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Trajectory rollout(const PolicyHandle& policy, const RolloutOptions& options,
                   std::uint64_t episode_seed) {
  const EnvConfig& config = policy.env_config;
  check_config(config);
  if (options.k < 1) {
    throw InvalidConfigError("rollout requires k >= 1 candidates");
  }
  if (options.strategy == selector::Strategy::Cqr &&
      (options.model == nullptr || options.calibration == nullptr)) {
    throw InvalidConfigError(
        "the Cqr strategy requires a model and a calibration");
  }
  if ((options.model == nullptr) != (options.calibration == nullptr)) {
    throw InvalidConfigError("model and calibration must be given together");
  }
  if (options.intervene &&
      (options.detector == nullptr || !options.threshold)) {
    throw InvalidConfigError(
        "intervention requires a detector and a threshold");
  }

  const std::uint64_t base = mix_seed(config.seed, episode_seed);
  EpisodeSetup setup = episode_setup(config, mix_seed(base, kStreamSetup));

  Trajectory traj;
  traj.seed = episode_seed;
  traj.outcome = Outcome::Failure;
  StateVector state = setup.state;

  for (int step = 0; step < config.max_steps; ++step) {
    TrajectoryStep record;
    record.state = state;

    if (options.detector != nullptr) {
      record.smd_score = smd::mahalanobis(*options.detector, state);
      if (options.intervene && *record.smd_score > options.threshold->value) {
        // Unsafe: halt before acting. The partial step keeps the triggering
        // state and distance on record.
        traj.steps.push_back(std::move(record));
        traj.halted = true;
        traj.outcome = Outcome::Failure;
        return traj;
      }
    }

    const std::vector<CandidateAction> candidates = sample_candidates(
        policy, state, setup.goal, options.k,
        mix_seed(base, kStreamCandidates, static_cast<std::uint64_t>(step)));

    selector::SelectionResult selection;
    std::vector<double> scores;
    if (options.model != nullptr) {
      scores = selector::score_candidates(*options.model, *options.calibration,
                                          candidates);
    }
    switch (options.strategy) {
      case selector::Strategy::Cqr:
        selection = selector::select_cqr(candidates, scores);
        break;
      case selector::Strategy::Default:
        selection = selector::select_default(candidates);
        break;
      case selector::Strategy::Random:
        selection = selector::select_random(
            candidates,
            mix_seed(base, kStreamSelect, static_cast<std::uint64_t>(step)));
        break;
      case selector::Strategy::Mean:
        selection = selector::select_mean(candidates);
        break;
    }

    if (options.observer) {
      options.observer(step, state,
                       expert_action(config, state, setup.goal), candidates);
    }

    // Process noise: a small random-magnitude kick along a random direction,
    // applied to whatever action was selected.
    ActionVector executed = selection.chosen_action;
    if (config.candidate_noise_sigma > 0.0) {
      std::mt19937_64 rng(
          mix_seed(base, kStreamProcess, static_cast<std::uint64_t>(step)));
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double rho =
          kProcessNoiseFraction * config.candidate_noise_sigma * gauss(rng);
      const auto dir = unit_direction(rng);
      for (int c = 0; c < ActionVector::kSize; ++c) {
        executed[c] += rho * dir[static_cast<std::size_t>(c)];
      }
    }

    record.executed_action = executed;
    if (!scores.empty()) {
      record.candidate_scores = scores;
      record.uncertainty_score =
          selection.chosen_index >= 0
              ? scores[static_cast<std::size_t>(selection.chosen_index)]
              : *std::min_element(scores.begin(), scores.end());
    }
    traj.steps.push_back(std::move(record));

    state = apply_action(state, executed);
    if (config.ood_onset_step && step >= *config.ood_onset_step) {
      for (int i = 0; i < StateVector::kSize; ++i) {
        state[i] += config.ood_drift[static_cast<std::size_t>(i)];
      }
    }

    if (goal_distance(state, setup.goal) <= config.target_region_radius) {
      traj.outcome = Outcome::Success;
      break;
    }
    if (!in_workspace(config, state)) {
      traj.outcome = Outcome::Failure;
      break;
    }
  }
  return traj;
}

Dataset generate_dataset(const EnvConfig& config,
                         const std::vector<std::uint64_t>& episode_seeds,
                         int k) {
  check_config(config);
  if (episode_seeds.empty()) {
    throw InvalidInputError("dataset generation requires at least one episode");
  }
  if (k < 1) {
    throw InvalidInputError("dataset generation requires k >= 1");
  }

  Dataset dataset;
  for (const std::uint64_t episode_seed : episode_seeds) {
    // Expert demonstration: contributes the nominal state pool.
    PolicyHandle expert_policy{config, PolicyMode::Expert};
    RolloutOptions expert_options;
    expert_options.strategy = selector::Strategy::Default;
    expert_options.k = 1;
    const Trajectory demo = rollout(expert_policy, expert_options, episode_seed);
    for (const auto& step : demo.steps) {
      dataset.expert_states.push_back(step.state);
    }

    // Stochastic run on the same task: contributes one regression sample per
    // candidate per step, plus the outcome-labeled trajectory.
    PolicyHandle policy{config, PolicyMode::Stochastic};
    RolloutOptions options;
    options.strategy = selector::Strategy::Default;
    options.k = k;
    options.observer = [&dataset, episode_seed](
                           int step, const StateVector&,
                           const ActionVector& expert,
                           const std::vector<CandidateAction>& candidates) {
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        RegressionRecord record;
        record.episode = episode_seed;
        record.step = step;
        record.cand = static_cast<int>(i);
        record.sample.embedding = candidates[i].embedding;
        record.sample.predicted_action = candidates[i].action;
        record.sample.expert_action = expert;
        dataset.regression.push_back(std::move(record));
      }
    };
    dataset.trajectories.push_back(rollout(policy, options, episode_seed));
  }
  return dataset;
}

}  // namespace actguard::sim
