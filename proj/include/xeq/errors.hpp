#pragma once

#include <stdexcept>
#include <string>

namespace xeq {

// Every failure the toolkit can raise, grouped by where it surfaces.
// Input/validation errors map to CLI exit code 2, analysis errors to 3.
enum class Errc {
  // input / validation
  UnknownLabel,
  UnknownItem,
  DimensionMismatch,
  LengthMismatch,
  EmptyDataset,
  ParseError,
  MissingColumn,
  MissingValue,
  DuplicateRespondent,
  EmptyPanel,
  EmptyScale,
  BadWeights,
  BadSpec,
  BadConfig,
  DuplicateSystem,
  VersionMismatch,
  EmptyBenchmark,
  MissingSection,
  EmptyDimension,
  WriteError,
  ClassTooSmall,
  // analysis
  ConstantInput,
  ConstantColumn,
  TooFewItems,
  TooFewObservations,
  ZeroTotalVariance,
  DegenerateData,
  DegenerateGroup,
  NonSymmetric,
  NonFiniteEntry,
  NotPositiveDefinite,
  UnidentifiedModel,
  SingularCovariance,
  NonConvergence,
};

const char* errc_name(Errc code);

// True for errors raised while reading or validating inputs, false for
// failures inside an analysis computation.
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace xeq
