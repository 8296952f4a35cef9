#pragma once

#include <stdexcept>
#include <string>

namespace bergman {

enum class ErrorKind {
  InvalidArgument,
  StepUnderflow,
  OutOfChart,
  SingularTheta,
  NotHermitian,
  NotPositive,
  StratumMismatch,
  JetOrderTooLow,
  NotNormalForm,
  IllConditioned,
  QuadratureNotConverged,
  UnsupportedFamily,
  FitDegenerate,
  MissingDims,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bergman
