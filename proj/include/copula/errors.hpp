#pragma once

#include <stdexcept>
#include <string>

namespace copula {

enum class ErrorKind {
  kInvalidInput,      // malformed or rejected input data
  kInsufficientData,  // too few observations for the requested operation
  kDegenerateWindow,  // zero local volatility inside a normalization window
  kDegenerateSeries,  // zero variance series where a correlation is needed
  kParameter,         // argument outside its admissible set
  kDomain,            // special function evaluated outside its domain
  kAccuracy,          // numerical scheme did not reach the requested tolerance
  kRange,             // probability outside the tabulated / achievable range
  kFitFailure,        // optimizer found no finite loss
  kIo,                // file system or parse failure
};

const char* to_string(ErrorKind kind);

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Input-side problems map to exit code 2, numerical ones to 3.
  bool is_input_error() const noexcept;

 private:
  ErrorKind kind_;
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate)
      : Error(ErrorKind::kAccuracy, what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

class DegenerateWindowError : public Error {
 public:
  DegenerateWindowError(const std::string& what, std::size_t index)
      : Error(ErrorKind::kDegenerateWindow, what), index_(index) {}

  // Position of the offending observation in the input return column.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace copula
