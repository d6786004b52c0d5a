#pragma once

#include <stdexcept>
#include <string>

namespace photonstat {

/// Failure categories surfaced by the library. Each one maps to a named
/// error condition of a module operation.
enum class Errc {
  EmptyWindow,
  DegenerateSum,
  DivisionByZero,
  DomainError,
  SingularSystem,
  ToleranceNotMet,
  ZeroPhotonNumber,
  InvalidSampling,
  InvalidParams,
  EmptyStream,
  EmptyStreams,
  ZeroBaseline,
  GridNotUniform,
  NotConverged,
  BadInit,
  ParseError,
  ValidationError,
  FormatError,
  IoError,
};

const char* errc_name(Errc code) noexcept;

/// Library exception. The message is prefixed with the module that raised it,
/// e.g. "corrmodel: DomainError: j_norm must exceed j0".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& module, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  Errc code_;
  std::string module_;
};

}  // namespace photonstat
