#ifndef DRESSING_FORGE_ERRORS_HPP
#define DRESSING_FORGE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dressing_forge {

enum class ErrorKind {
  RankDeficient,
  Singular,
  DimensionMismatch,
  AtPole,
  PoleCollision,
  OutOfDomain,
  NonPositive,
  SphericalViolation,
  NonReal,
  ChartSingular,
  StepTooLarge,
  ProjectionDrift,
  InvalidArgument,
  ParseError,
  ValidationError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AtPole: return "AtPole";
    case ErrorKind::PoleCollision: return "PoleCollision";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::SphericalViolation: return "SphericalViolation";
    case ErrorKind::NonReal: return "NonReal";
    case ErrorKind::ChartSingular: return "ChartSingular";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::ProjectionDrift: return "ProjectionDrift";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_ERRORS_HPP
