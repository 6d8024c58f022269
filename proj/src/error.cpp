#include "hybridsw/error.hpp"

namespace hybridsw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorKind::NonConservative: return "NonConservative";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::EigenvectorNotPositive: return "EigenvectorNotPositive";
    case ErrorKind::CriterionViolated: return "CriterionViolated";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RateExceedsBound: return "RateExceedsBound";
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::QuantizationBreaksIrreducibility:
      return "QuantizationBreaksIrreducibility";
    case ErrorKind::RegimeOutOfRange: return "RegimeOutOfRange";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::InsufficientRecordMode: return "InsufficientRecordMode";
    case ErrorKind::UnequalCounts: return "UnequalCounts";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NoCutAtZero: return "NoCutAtZero";
    case ErrorKind::NoLimit: return "NoLimit";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::ModelInvalid: return "ModelInvalid";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace hybridsw
