#ifndef FOUNTAIN_ERROR_HPP
#define FOUNTAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fountain {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  UnsupportedDomain,
  BasisMismatch,
  SizeMismatch,
  EmptyTail,
  OutOfRange,
  AssumptionViolated,
  Bracketing,
  SizeCap,
  NonFinite,
  Config,
  Io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised when a modelling assumption (a labelled hypothesis such as "V2" or
/// "E1") does not hold for the supplied data.
class AssumptionError : public Error {
public:
  AssumptionError(std::string label, const std::string &what)
      : Error(ErrorCode::AssumptionViolated, label + ": " + what),
        label_(std::move(label)) {}

  const std::string &label() const noexcept { return label_; }

private:
  std::string label_;
};

} // namespace fountain

#endif
