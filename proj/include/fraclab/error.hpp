#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fraclab {

enum class ErrorKind {
  InvalidArgument,
  NoSolutionInRange,
  DepthOverflow,
  EmptyDomain,
  DegenerateFit,
  InsufficientSamples,
  Disconnected,
  SolverDiverged,
  EmptyRegion,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoSolutionInRange: return "NoSolutionInRange";
    case ErrorKind::DepthOverflow: return "DepthOverflow";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
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

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace fraclab
