#include "bergman/error.hpp"

namespace bergman {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::OutOfChart: return "OutOfChart";
    case ErrorKind::SingularTheta: return "SingularTheta";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::StratumMismatch: return "StratumMismatch";
    case ErrorKind::JetOrderTooLow: return "JetOrderTooLow";
    case ErrorKind::NotNormalForm: return "NotNormalForm";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorKind::FitDegenerate: return "FitDegenerate";
    case ErrorKind::MissingDims: return "MissingDims";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace bergman
