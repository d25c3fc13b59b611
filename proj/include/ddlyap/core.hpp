#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ddlyap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  DimensionMismatch,
  NonincreasingDelays,
  SingularK0,
  NonRationalInput,
  NotPositiveDefinite,
  HorizonTooLarge,
  RecursionDepthExceeded,
  CriticalSystem,
  SizeExceeded,
  OutOfDomain,
  NotStable,
  NonFinite,
  OrderUnavailable,
  ParseError,
  InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the CLI maps codes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Entrywise max-abs; every residual in the library is reported in this norm.
inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double spectral_norm(const Matrix& m);

}  // namespace ddlyap
