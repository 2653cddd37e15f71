#pragma once

#include <stdexcept>
#include <string>

namespace actguard {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite inputs, dimension mismatches, empty collections.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Contract violations in configuration: bad quantile levels, mismatched
/// model/calibration pairs, non-positive hyperparameters.
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs that are structurally valid but make the operation meaningless,
/// e.g. a zero-norm vector passed to a cosine similarity.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss. Carries the offending epoch.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& msg, int epoch)
      : Error(msg), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// The calibration set is too small for the requested miscoverage level.
/// Carries the minimum sample count that would make the offset finite.
class InsufficientCalibrationError : public Error {
 public:
  InsufficientCalibrationError(const std::string& msg, int min_samples)
      : Error(msg), min_samples_(min_samples) {}
  int min_samples() const { return min_samples_; }

 private:
  int min_samples_;
};

/// Covariance factorization failed even after ridging.
class SingularCovarianceError : public Error {
 public:
  using Error::Error;
};

/// Correlation is undefined because one of the variables is constant.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// A log or artifact file failed to parse. Carries the 1-based line number.
class DataFormatError : public Error {
 public:
  DataFormatError(const std::string& msg, long line)
      : Error(msg), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace actguard
