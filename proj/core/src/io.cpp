#include "actguard/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actguard/errors.hpp"

namespace actguard::io {

namespace {

using nlohmann::json;

json to_json(const std::vector<double>& values) { return json(values); }

json action_to_json(const ActionVector& action) {
  json j = json::array();
  for (int c = 0; c < ActionVector::kSize; ++c) {
    j.push_back(action[c]);
  }
  return j;
}

json state_to_json(const StateVector& state) {
  json j = json::array();
  for (int i = 0; i < StateVector::kSize; ++i) {
    j.push_back(state[i]);
  }
  return j;
}

std::vector<double> doubles_from(const json& j, const char* field, long line) {
  if (!j.is_array()) {
    throw DataFormatError(std::string(field) + " must be an array", line);
  }
  std::vector<double> values;
  values.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw DataFormatError(std::string(field) + " must contain numbers", line);
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw DataFormatError(std::string(field) + " contains a non-finite value",
                            line);
    }
    values.push_back(d);
  }
  return values;
}

ActionVector action_from(const json& j, const char* field, long line) {
  const auto values = doubles_from(j, field, line);
  if (values.size() != ActionVector::kSize) {
    throw DataFormatError(std::string(field) + " must have length 7", line);
  }
  std::array<double, ActionVector::kSize> a{};
  std::copy(values.begin(), values.end(), a.begin());
  return ActionVector::from_array(a);
}

StateVector state_from(const json& j, const char* field, long line) {
  const auto values = doubles_from(j, field, line);
  if (values.size() != StateVector::kSize) {
    throw DataFormatError(std::string(field) + " must have length 8", line);
  }
  std::array<double, StateVector::kSize> s{};
  std::copy(values.begin(), values.end(), s.begin());
  return StateVector::from_array(s);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInputError("cannot open " + path + " for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_document(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataFormatError(path + ": " + e.what(), 0);
  }
}

/// Runs `fn` and rewraps any json access error as a DataFormatError so
/// callers see one failure type for malformed content.
template <typename Fn>
auto guarded(const std::string& path, long line, Fn&& fn) {
  try {
    return fn();
  } catch (const DataFormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw DataFormatError(path + ": " + e.what(), line);
  }
}

}  // namespace

std::string target_kind_to_string(quantile::TargetKind kind) {
  switch (kind) {
    case quantile::TargetKind::Distance7: return "distance7";
    case quantile::TargetKind::Distance6: return "distance6";
    case quantile::TargetKind::Cosine: return "cosine";
    case quantile::TargetKind::ActionInterval: return "action_interval";
  }
  throw InvalidInputError("unknown target kind");
}

quantile::TargetKind target_kind_from_string(const std::string& name) {
  if (name == "distance7") return quantile::TargetKind::Distance7;
  if (name == "distance6") return quantile::TargetKind::Distance6;
  if (name == "cosine") return quantile::TargetKind::Cosine;
  if (name == "action_interval") return quantile::TargetKind::ActionInterval;
  throw DataFormatError("unknown target kind '" + name + "'", 0);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InvalidInputError("cannot open " + path + " for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw InvalidInputError("failed writing " + path);
  }
}

void save_model(const quantile::QuantileModel& model, const std::string& path) {
  json j;
  j["input_dim"] = model.input_dim();
  j["levels"] = to_json(model.levels());
  j["target_kind"] = target_kind_to_string(model.target_kind());
  std::vector<int> layer_sizes;
  layer_sizes.push_back(model.input_dim());
  for (int h : model.hidden_sizes()) {
    layer_sizes.push_back(h);
  }
  layer_sizes.push_back(model.output_dim());
  j["layer_sizes"] = layer_sizes;
  const Eigen::VectorXd flat = model.flat_parameters();
  j["parameters"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  const auto& norm = model.normalization();
  j["normalization"]["mean"] =
      std::vector<double>(norm.mean.data(), norm.mean.data() + norm.mean.size());
  j["normalization"]["scale"] = std::vector<double>(
      norm.scale.data(), norm.scale.data() + norm.scale.size());
  write_text_file(path, j.dump(2) + "\n");
}

quantile::QuantileModel load_model(const std::string& path) {
  const json j = parse_document(path);
  return guarded(path, 0, [&]() {
    const int input_dim = j.at("input_dim").get<int>();
    const std::vector<double> levels = doubles_from(j.at("levels"), "levels", 0);
    const quantile::TargetKind kind =
        target_kind_from_string(j.at("target_kind").get<std::string>());
    const std::vector<int> layer_sizes =
        j.at("layer_sizes").get<std::vector<int>>();
    if (layer_sizes.size() < 2 || layer_sizes.front() != input_dim) {
      throw DataFormatError(path + ": inconsistent layer_sizes", 0);
    }
    const std::vector<int> hidden(layer_sizes.begin() + 1,
                                  layer_sizes.end() - 1);
    quantile::Normalization norm;
    const auto mean =
        doubles_from(j.at("normalization").at("mean"), "normalization.mean", 0);
    const auto scale = doubles_from(j.at("normalization").at("scale"),
                                    "normalization.scale", 0);
    norm.mean = Eigen::Map<const Eigen::VectorXd>(
        mean.data(), static_cast<Eigen::Index>(mean.size()));
    norm.scale = Eigen::Map<const Eigen::VectorXd>(
        scale.data(), static_cast<Eigen::Index>(scale.size()));
    quantile::QuantileModel model(input_dim, levels, kind, hidden, norm);
    if (layer_sizes.back() != model.output_dim()) {
      throw DataFormatError(path + ": output layer size mismatch", 0);
    }
    const auto params = doubles_from(j.at("parameters"), "parameters", 0);
    if (static_cast<int>(params.size()) != model.parameter_count()) {
      throw DataFormatError(path + ": parameter count mismatch", 0);
    }
    model.set_flat_parameters(Eigen::Map<const Eigen::VectorXd>(
        params.data(), static_cast<Eigen::Index>(params.size())));
    return model;
  });
}

void save_calibration(const conformal::ConformalCalibration& calibration,
                      const std::string& path) {
  json j;
  j["offset"] = calibration.offset;
  j["miscoverage"] = calibration.miscoverage;
  j["level"] = calibration.level;
  j["calibration_size"] = calibration.calibration_size;
  j["target_kind"] = target_kind_to_string(calibration.target_kind);
  write_text_file(path, j.dump(2) + "\n");
}

conformal::ConformalCalibration load_calibration(const std::string& path) {
  const json j = parse_document(path);
  return guarded(path, 0, [&]() {
    conformal::ConformalCalibration cal;
    cal.offset = j.at("offset").get<double>();
    cal.miscoverage = j.at("miscoverage").get<double>();
    cal.level = j.at("level").get<double>();
    cal.calibration_size = j.at("calibration_size").get<std::size_t>();
    cal.target_kind =
        target_kind_from_string(j.at("target_kind").get<std::string>());
    if (!std::isfinite(cal.offset) || !std::isfinite(cal.level) ||
        !std::isfinite(cal.miscoverage)) {
      throw DataFormatError(path + ": non-finite calibration values", 0);
    }
    return cal;
  });
}

void save_detector(const DetectorArtifact& detector, const std::string& path) {
  json j;
  const auto& model = detector.model;
  j["mean"] = std::vector<double>(model.mean().data(),
                                  model.mean().data() + model.mean().size());
  std::vector<double> covariance;
  covariance.reserve(
      static_cast<std::size_t>(model.covariance().size()));
  for (Eigen::Index r = 0; r < model.covariance().rows(); ++r) {
    for (Eigen::Index c = 0; c < model.covariance().cols(); ++c) {
      covariance.push_back(model.covariance()(r, c));
    }
  }
  j["covariance"] = covariance;
  j["ridge"] = model.ridge();
  j["sample_count"] = model.sample_count();
  j["threshold"] = detector.threshold.value;
  j["quantile_level"] = detector.threshold.quantile_level;
  write_text_file(path, j.dump(2) + "\n");
}

DetectorArtifact load_detector(const std::string& path) {
  const json j = parse_document(path);
  return guarded(path, 0, [&]() {
    const auto mean = doubles_from(j.at("mean"), "mean", 0);
    const auto covariance = doubles_from(j.at("covariance"), "covariance", 0);
    constexpr int dim = StateVector::kSize;
    if (mean.size() != dim || covariance.size() != dim * dim) {
      throw DataFormatError(path + ": detector moment size mismatch", 0);
    }
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean.data(), dim);
    Eigen::MatrixXd sigma(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        sigma(r, c) = covariance[static_cast<std::size_t>(r * dim + c)];
      }
    }
    DetectorArtifact artifact{
        smd::GaussianStateModel::from_moments(
            mu, sigma, j.at("ridge").get<double>(),
            j.at("sample_count").get<int>()),
        smd::SafetyThreshold{j.at("threshold").get<double>(),
                             j.at("quantile_level").get<double>(),
                             smd::ThresholdSource::Percentile}};
    if (!std::isfinite(artifact.threshold.value)) {
      throw DataFormatError(path + ": non-finite threshold", 0);
    }
    return artifact;
  });
}

void save_manifest(const SplitManifest& manifest, const std::string& path) {
  json j;
  j["train_seeds"] = manifest.train_seeds;
  j["calib_seeds"] = manifest.calib_seeds;
  j["eval_seeds"] = manifest.eval_seeds;
  write_text_file(path, j.dump(2) + "\n");
}

SplitManifest load_manifest(const std::string& path) {
  const json j = parse_document(path);
  return guarded(path, 0, [&]() {
    SplitManifest manifest;
    manifest.train_seeds =
        j.at("train_seeds").get<std::vector<std::uint64_t>>();
    manifest.calib_seeds =
        j.at("calib_seeds").get<std::vector<std::uint64_t>>();
    manifest.eval_seeds = j.at("eval_seeds").get<std::vector<std::uint64_t>>();
    return manifest;
  });
}

void write_regression_jsonl(const std::vector<sim::RegressionRecord>& records,
                            const std::string& path) {
  std::string out;
  for (const auto& record : records) {
    json j;
    j["episode"] = record.episode;
    j["step"] = record.step;
    j["cand"] = record.cand;
    j["z"] = to_json(record.sample.embedding.values);
    j["a_hat"] = action_to_json(record.sample.predicted_action);
    j["a_gt"] = action_to_json(record.sample.expert_action);
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<sim::RegressionRecord> read_regression_jsonl(
    const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<sim::RegressionRecord> records;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(path + ": " + e.what(), line_number);
    }
    guarded(path, line_number, [&]() {
      sim::RegressionRecord record;
      record.episode = j.at("episode").get<std::uint64_t>();
      record.step = j.at("step").get<int>();
      record.cand = j.at("cand").get<int>();
      record.sample.embedding.values = doubles_from(j.at("z"), "z", line_number);
      record.sample.predicted_action =
          action_from(j.at("a_hat"), "a_hat", line_number);
      record.sample.expert_action =
          action_from(j.at("a_gt"), "a_gt", line_number);
      records.push_back(std::move(record));
      return 0;
    });
  }
  return records;
}

void write_trajectories_jsonl(const std::vector<Trajectory>& trajectories,
                              const std::string& path) {
  std::string out;
  for (const auto& traj : trajectories) {
    json j;
    j["episode"] = traj.seed;
    j["outcome"] = traj.outcome == Outcome::Success ? "success" : "failure";
    j["halted"] = traj.halted;
    json steps = json::array();
    for (const auto& step : traj.steps) {
      json s;
      s["state"] = state_to_json(step.state);
      s["action"] = action_to_json(step.executed_action);
      s["scores"] = to_json(step.candidate_scores);
      s["smd"] = step.smd_score ? json(*step.smd_score) : json(nullptr);
      steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<Trajectory> read_trajectories_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Trajectory> trajectories;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(path + ": " + e.what(), line_number);
    }
    guarded(path, line_number, [&]() {
      Trajectory traj;
      traj.seed = j.at("episode").get<std::uint64_t>();
      const std::string outcome = j.at("outcome").get<std::string>();
      if (outcome == "success") {
        traj.outcome = Outcome::Success;
      } else if (outcome == "failure") {
        traj.outcome = Outcome::Failure;
      } else {
        throw DataFormatError(path + ": unknown outcome '" + outcome + "'",
                              line_number);
      }
      traj.halted = j.at("halted").get<bool>();
      for (const auto& s : j.at("steps")) {
        TrajectoryStep step;
        step.state = state_from(s.at("state"), "state", line_number);
        step.executed_action = action_from(s.at("action"), "action", line_number);
        step.candidate_scores = doubles_from(s.at("scores"), "scores",
                                             line_number);
        const auto& smd = s.at("smd");
        if (!smd.is_null()) {
          if (!smd.is_number()) {
            throw DataFormatError(path + ": smd must be a number or null",
                                  line_number);
          }
          step.smd_score = smd.get<double>();
        }
        traj.steps.push_back(std::move(step));
      }
      trajectories.push_back(std::move(traj));
      return 0;
    });
  }
  return trajectories;
}

void write_states_jsonl(const std::vector<StateVector>& states,
                        const std::string& path) {
  std::string out;
  for (const auto& state : states) {
    json j;
    j["state"] = state_to_json(state);
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<StateVector> read_states_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<StateVector> states;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataFormatError(path + ": " + e.what(), line_number);
    }
    guarded(path, line_number, [&]() {
      states.push_back(state_from(j.at("state"), "state", line_number));
      return 0;
    });
  }
  return states;
}

}  // namespace actguard::io
