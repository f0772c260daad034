#pragma once

#include <stdexcept>
#include <string>

namespace diffperim {

enum class ErrorKind {
  NonConvergence,
  SetOutsideBox,
  ResolutionTooCoarse,
  NoClosedForm,
  NegativeTime,
  GridMismatch,
  UnresolvedTime,
  StabilityFailure,
  NoResolvedWindow,
  IllConditioned,
  NotApplicable,
  InvalidArgument,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SetOutsideBox: return "SetOutsideBox";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::NoClosedForm: return "NoClosedForm";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::UnresolvedTime: return "UnresolvedTime";
    case ErrorKind::StabilityFailure: return "StabilityFailure";
    case ErrorKind::NoResolvedWindow: return "NoResolvedWindow";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every library failure carries the module that raised it and the violated
/// constraint, so the CLI can emit a machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + to_string(kind) + ": " + what),
        kind_(kind),
        module_(std::move(module)),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string detail_;
};

}  // namespace diffperim
