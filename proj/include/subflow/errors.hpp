#ifndef SUBFLOW_ERRORS_HPP
#define SUBFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace subflow {

// Exit-code contract shared by the library and the CLI:
// 0 success, 1 assertion failed, 2 configuration, 3 numerical, 4 precondition.
enum class ExitCode : int {
  ok = 0,
  assertion = 1,
  config = 2,
  numerical = 3,
  precondition = 4,
};

class SubflowError : public std::runtime_error {
 public:
  SubflowError(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad configuration value or unknown identifier.
class ConfigError : public SubflowError {
 public:
  explicit ConfigError(const std::string& w) : SubflowError(ExitCode::config, w) {}
};

/// Input data violates an operation's stated preconditions (shape, range, tangency).
class ValidationError : public SubflowError {
 public:
  explicit ValidationError(const std::string& w) : SubflowError(ExitCode::config, w) {}
};

/// An operation was handed a target the formula is not defined for.
class UnsupportedTargetError : public ConfigError {
 public:
  explicit UnsupportedTargetError(const std::string& w) : ConfigError(w) {}
};

/// Internal state drifted off the manifold beyond tolerance.
class StateError : public SubflowError {
 public:
  explicit StateError(const std::string& w) : SubflowError(ExitCode::numerical, w) {}
};

/// Non-finite values or numerical blowup.
class NumericalError : public SubflowError {
 public:
  explicit NumericalError(const std::string& w) : SubflowError(ExitCode::numerical, w) {}
};

/// A gate that must hold before an analysis is meaningful (e.g. criticality).
class PreconditionError : public SubflowError {
 public:
  explicit PreconditionError(const std::string& w) : SubflowError(ExitCode::precondition, w) {}
};

/// Potential evaluated outside its domain of definition.
class DomainError : public SubflowError {
 public:
  explicit DomainError(const std::string& w) : SubflowError(ExitCode::precondition, w) {}
};

}  // namespace subflow

#endif  // SUBFLOW_ERRORS_HPP
