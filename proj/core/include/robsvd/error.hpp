#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace robsvd {

// Every failure the library reports. The category decides the CLI exit code.
enum class ErrorCode {
  // input
  InvalidArgument,
  ParseError,
  RaggedRows,
  ZeroVarianceColumn,
  // numerical
  RankDeficient,
  NoConvergence,
  QuadratureFailure,
  TargetUnreachable,
  PoleAtDenominatorZero,
  Degenerate,
  SingularFit,
  SingularNormalMatrix,
  SingularColumnSystem,
  SingularRowSystem,
  DegenerateDoF,
  DoFExhausted,
  NeverBreaks,
  // convergence
  MaxIterExceeded,
  RateUnstable,
  ContinuationStall,
};

enum class ErrorCategory { Input, Numerical, Convergence };

constexpr ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::RaggedRows:
    case ErrorCode::ZeroVarianceColumn:
      return ErrorCategory::Input;
    case ErrorCode::MaxIterExceeded:
    case ErrorCode::RateUnstable:
    case ErrorCode::ContinuationStall:
      return ErrorCategory::Convergence;
    default:
      return ErrorCategory::Numerical;
  }
}

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

/// Error that carries the index of the offending row/column/stage.
class IndexedError : public Error {
 public:
  IndexedError(ErrorCode code, std::size_t index, const std::string& what)
      : Error(code, what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Iteration budget exhausted; `last` holds the final iterate.
template <class State>
class MaxIterError : public Error {
 public:
  MaxIterError(State last, const std::string& what)
      : Error(ErrorCode::MaxIterExceeded, what), last_(std::move(last)) {}
  const State& last() const noexcept { return last_; }

 private:
  State last_;
};

}  // namespace robsvd
