#include "photonstat/error.hpp"

namespace photonstat {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::DegenerateSum: return "DegenerateSum";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::DomainError: return "DomainError";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::ToleranceNotMet: return "ToleranceNotMet";
    case Errc::ZeroPhotonNumber: return "ZeroPhotonNumber";
    case Errc::InvalidSampling: return "InvalidSampling";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::EmptyStreams: return "EmptyStreams";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::GridNotUniform: return "GridNotUniform";
    case Errc::NotConverged: return "NotConverged";
    case Errc::BadInit: return "BadInit";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::FormatError: return "FormatError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& module, const std::string& detail)
    : std::runtime_error(module + ": " + errc_name(code) + ": " + detail),
      code_(code),
      module_(module) {}

}  // namespace photonstat
