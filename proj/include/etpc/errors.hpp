#pragma once

#include <stdexcept>
#include <string>

namespace etpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain an operation accepts (bad dimensions, bad
/// parameter ranges, tabulated basis evaluated past its last sample).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadrature grid that is too short or not uniform.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Linear system too ill-conditioned to trust.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown that valid inputs can not produce.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// A state or auxiliary variable became non-finite during integration.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Two consecutive events closer than the storm guard allows.
class ZenoError : public Error {
 public:
  ZenoError(const std::string& what, double time, std::size_t event_index)
      : Error(what), time_(time), event_index_(event_index) {}
  double time() const noexcept { return time_; }
  std::size_t event_index() const noexcept { return event_index_; }

 private:
  double time_;
  std::size_t event_index_;
};

/// Too few events to form inter-event statistics.
class InsufficientEventsError : public Error {
 public:
  using Error::Error;
};

/// A plant certificate that fails its sampled checks.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text. `line` is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace etpc
