#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revspec {

// Every failure the library reports carries one of these kinds. The CLI maps
// them to exit codes and machine-readable error records.
enum class ErrorKind {
  InvalidProfile,
  DomainError,
  DegenerateTorus,
  QuadratureFailure,
  IntegrationFailure,
  RootNotBracketed,
  GridTooCoarse,
  SizeLimit,
  ConvergenceFailure,
  GridMismatch,
  NotConvex,
  TruncationTooSmall,
  DegenerateFit,
  ScanTooCoarse,
  HashMismatch,
  ConfigError,
};

inline constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateTorus: return "DegenerateTorus";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::IntegrationFailure: return "IntegrationFailure";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::SizeLimit: return "SizeLimit";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ScanTooCoarse: return "ScanTooCoarse";
    case ErrorKind::HashMismatch: return "HashMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace revspec
