#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hosc {

enum class ErrorKind {
  NotPositiveDefinite,
  NoConvergence,
  RankDeficient,
  GapViolation,
  MatchingAmbiguous,
  StabilityViolation,
  TimeMismatch,
  DomainViolation,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::MatchingAmbiguous: return "MatchingAmbiguous";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::TimeMismatch: return "TimeMismatch";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Failure of a numerical kernel. Every error the library raises while
/// computing (as opposed to parsing input) is one of these.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hosc
