#ifndef HYBRIDSW_ERROR_HPP_
#define HYBRIDSW_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace hybridsw {

enum class ErrorKind {
  NonSquare,
  NonFinite,
  NegativeOffDiagonal,
  NonConservative,
  NotIrreducible,
  EigenvectorNotPositive,
  CriterionViolated,
  InvalidArgument,
  RateExceedsBound,
  LayoutMismatch,
  QuantizationBreaksIrreducibility,
  RegimeOutOfRange,
  SingularPoint,
  EmptyRegion,
  NonFiniteState,
  ModelMismatch,
  InsufficientRecordMode,
  UnequalCounts,
  HypothesisViolated,
  NoCutAtZero,
  NoLimit,
  ConfigParse,
  ModelInvalid,
  IoFailure,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `module` and `operation` name the
/// call site so the CLI can report them in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string operation,
        const std::string& message)
      : std::runtime_error(message),
        kind_(kind),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }
  const std::string& operation() const { return operation_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string operation_;
};

}  // namespace hybridsw

#endif  // HYBRIDSW_ERROR_HPP_
