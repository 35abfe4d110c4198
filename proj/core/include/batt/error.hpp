#pragma once

#include <stdexcept>
#include <string>

namespace batt {

// Raised when a caller breaks an operation's precondition (bad index,
// invalid parameter domain, malformed instance).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// No arm of a threshold grid reaches the requested success threshold.
class NoSufficientArm : public ContractViolation {
 public:
  explicit NoSufficientArm(const std::string& what) : ContractViolation(what) {}
};

// Raised while loading or validating an experiment configuration. `field`
// names the offending key using a dotted path, e.g. "env.trace.c".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace batt
