#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pubcast {

enum class ErrorCode {
  EmptyInput,
  InsufficientData,
  NonMonotonicCumulative,
  SchemaError,
  EmptySelection,
  ConvergenceFailure,
  NumericalFailure,
  NoModelFound,
  InvalidHorizon,
  WrongScale,
  InvalidCoefficients,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries a machine-readable code; the
// CLI prints it verbatim in its stderr JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the optimizers when the iteration budget runs out. The best
// iterate seen so far travels with the exception so callers may still use it.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& detail, std::vector<double> best_point,
                     double best_value)
      : Error(ErrorCode::ConvergenceFailure, detail),
        best_point_(std::move(best_point)),
        best_value_(best_value) {}

  const std::vector<double>& best_point() const noexcept { return best_point_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::vector<double> best_point_;
  double best_value_;
};

}  // namespace pubcast
