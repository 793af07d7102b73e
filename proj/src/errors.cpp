#include "xeq/errors.hpp"

namespace xeq {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::UnknownItem: return "UnknownItem";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::ParseError: return "ParseError";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::MissingValue: return "MissingValue";
    case Errc::DuplicateRespondent: return "DuplicateRespondent";
    case Errc::EmptyPanel: return "EmptyPanel";
    case Errc::EmptyScale: return "EmptyScale";
    case Errc::BadWeights: return "BadWeights";
    case Errc::BadSpec: return "BadSpec";
    case Errc::BadConfig: return "BadConfig";
    case Errc::DuplicateSystem: return "DuplicateSystem";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::EmptyBenchmark: return "EmptyBenchmark";
    case Errc::MissingSection: return "MissingSection";
    case Errc::EmptyDimension: return "EmptyDimension";
    case Errc::WriteError: return "WriteError";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::ConstantColumn: return "ConstantColumn";
    case Errc::TooFewItems: return "TooFewItems";
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::ZeroTotalVariance: return "ZeroTotalVariance";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::DegenerateGroup: return "DegenerateGroup";
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NonFiniteEntry: return "NonFiniteEntry";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::UnidentifiedModel: return "UnidentifiedModel";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::NonConvergence: return "NonConvergence";
  }
  return "UnknownError";
}

bool is_validation_error(Errc code) {
  switch (code) {
    case Errc::UnknownLabel:
    case Errc::UnknownItem:
    case Errc::DimensionMismatch:
    case Errc::LengthMismatch:
    case Errc::EmptyDataset:
    case Errc::ParseError:
    case Errc::MissingColumn:
    case Errc::MissingValue:
    case Errc::DuplicateRespondent:
    case Errc::EmptyPanel:
    case Errc::EmptyScale:
    case Errc::BadWeights:
    case Errc::BadSpec:
    case Errc::BadConfig:
    case Errc::DuplicateSystem:
    case Errc::VersionMismatch:
    case Errc::EmptyBenchmark:
    case Errc::MissingSection:
    case Errc::EmptyDimension:
    case Errc::WriteError:
    case Errc::ClassTooSmall:
      return true;
    default:
      return false;
  }
}

}  // namespace xeq
