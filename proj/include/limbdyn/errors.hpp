#pragma once

#include <stdexcept>
#include <string>

namespace limbdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stiffness fit or robot ROM was evaluated outside its validity window.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Constrained dynamics received a state that violates the S/P–A/A coupling.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Invalid or unreadable configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures while writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace limbdyn
