#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actguard/conformal.hpp"
#include "actguard/quantile.hpp"
#include "actguard/sim.hpp"
#include "actguard/smd.hpp"
#include "actguard/types.hpp"

namespace actguard::io {

/// Fitted state model plus its operating threshold, as persisted together.
struct DetectorArtifact {
  smd::GaussianStateModel model;
  smd::SafetyThreshold threshold;
};

/// Episode seeds by split; written next to generated datasets so downstream
/// commands agree on which episodes trained, calibrated, and evaluated.
struct SplitManifest {
  std::vector<std::uint64_t> train_seeds;
  std::vector<std::uint64_t> calib_seeds;
  std::vector<std::uint64_t> eval_seeds;
};

std::string target_kind_to_string(quantile::TargetKind kind);
quantile::TargetKind target_kind_from_string(const std::string& name);

/// All savers write deterministically: stable key order, shortest exact
/// decimal for doubles, trailing newline. All loaders throw DataFormatError
/// (with a line number for JSONL) on malformed content and InvalidInputError
/// when the file cannot be opened.
void save_model(const quantile::QuantileModel& model, const std::string& path);
quantile::QuantileModel load_model(const std::string& path);

void save_calibration(const conformal::ConformalCalibration& calibration,
                      const std::string& path);
conformal::ConformalCalibration load_calibration(const std::string& path);

void save_detector(const DetectorArtifact& detector, const std::string& path);
DetectorArtifact load_detector(const std::string& path);

void save_manifest(const SplitManifest& manifest, const std::string& path);
SplitManifest load_manifest(const std::string& path);

void write_regression_jsonl(const std::vector<sim::RegressionRecord>& records,
                            const std::string& path);
std::vector<sim::RegressionRecord> read_regression_jsonl(
    const std::string& path);

void write_trajectories_jsonl(const std::vector<Trajectory>& trajectories,
                              const std::string& path);
std::vector<Trajectory> read_trajectories_jsonl(const std::string& path);

void write_states_jsonl(const std::vector<StateVector>& states,
                        const std::string& path);
std::vector<StateVector> read_states_jsonl(const std::string& path);

/// Writes a string to a file, creating parent directories first.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace actguard::io
