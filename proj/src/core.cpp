#include "ddlyap/core.hpp"

#include <Eigen/SVD>

namespace ddlyap {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonincreasingDelays: return "NonincreasingDelays";
    case ErrorCode::SingularK0: return "SingularK0";
    case ErrorCode::NonRationalInput: return "NonRationalInput";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::RecursionDepthExceeded: return "RecursionDepthExceeded";
    case ErrorCode::CriticalSystem: return "CriticalSystem";
    case ErrorCode::SizeExceeded: return "SizeExceeded";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OrderUnavailable: return "OrderUnavailable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace ddlyap
