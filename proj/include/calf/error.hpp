#pragma once

#include <stdexcept>
#include <string>

namespace calf {

/// Invalid configuration: unknown identifiers, infeasible bounds, bad ranges.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The integrator produced a non-finite state.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(const std::string& env, long step)
      : std::runtime_error("integration diverged in environment '" + env + "' at step " +
                           std::to_string(step)),
        env_(env),
        step_(step) {}

  const std::string& env() const noexcept { return env_; }
  long step() const noexcept { return step_; }

 private:
  std::string env_;
  long step_;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace calf
