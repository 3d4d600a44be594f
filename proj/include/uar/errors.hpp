#pragma once

#include <stdexcept>
#include <string>

namespace uar {

enum class ErrorKind {
  Parameter,     // invalid argument or configuration value
  Geometry,      // sensing geometry does not yield a usable reflection gate
  Degenerate,    // numerically degenerate input (e.g. silent direct wave)
  Detection,     // direct waves could not be located
  Segmentation,  // frame window falls outside the recording
  Simulation,    // scene violates the simulator's constraints
  Io,            // file read/write/format failure
  Training,      // classifier could not be trained
  Leakage,       // train and eval sets overlap
  Usage,         // command-line misuse
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code for the CLI: 2 usage, 3 data, 4 numerical/training.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Parameter:
    case ErrorKind::Geometry:
      return 2;
    case ErrorKind::Detection:
    case ErrorKind::Segmentation:
    case ErrorKind::Simulation:
    case ErrorKind::Io:
    case ErrorKind::Leakage:
      return 3;
    case ErrorKind::Degenerate:
    case ErrorKind::Training:
      return 4;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace uar
