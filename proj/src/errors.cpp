#include "copula/errors.hpp"

namespace copula {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kDegenerateWindow: return "degenerate_window";
    case ErrorKind::kDegenerateSeries: return "degenerate_series";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kAccuracy: return "accuracy";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kFitFailure: return "fit_failure";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

bool Error::is_input_error() const noexcept {
  switch (kind_) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kInsufficientData:
    case ErrorKind::kDegenerateWindow:
    case ErrorKind::kDegenerateSeries:
    case ErrorKind::kParameter:
    case ErrorKind::kIo:
      return true;
    default:
      return false;
  }
}

}  // namespace copula
