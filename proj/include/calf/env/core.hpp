#pragma once

// MDP-from-ODE machinery: fixed-capacity state/action vectors, the goal box,
// environment description, one-step integration and the episode loop.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calf/error.hpp"
#include "calf/rng.hpp"

namespace calf::env {

inline constexpr std::size_t kMaxDim = 8;

/// Small inline vector; unused tail slots stay zero so equality is memberwise.
template <class Tag>
class FixedVec {
 public:
  FixedVec() = default;
  explicit FixedVec(std::size_t n) : size_(n) { require(n <= kMaxDim, "dimension exceeds kMaxDim"); }
  FixedVec(std::initializer_list<double> init) : FixedVec(init.size()) {
    std::size_t i = 0;
    for (double v : init) data_[i++] = v;
  }
  static FixedVec from(std::span<const double> xs) {
    FixedVec v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) v.data_[i] = xs[i];
    return v;
  }

  std::size_t size() const noexcept { return size_; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  double* begin() noexcept { return data_.data(); }
  double* end() noexcept { return data_.data() + size_; }
  const double* begin() const noexcept { return data_.data(); }
  const double* end() const noexcept { return data_.data() + size_; }
  std::span<const double> span() const noexcept { return {data_.data(), size_}; }
  std::span<double> span() noexcept { return {data_.data(), size_}; }

  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < size_; ++i)
      if (!std::isfinite(data_[i])) return false;
    return true;
  }

  double norm() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < size_; ++i) s += data_[i] * data_[i];
    return std::sqrt(s);
  }

  friend bool operator==(const FixedVec&, const FixedVec&) = default;

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t size_ = 0;
};

struct StateTag;
struct ActionTag;
using StateVec = FixedVec<StateTag>;
using ActionVec = FixedVec<ActionTag>;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - std::numbers::pi;
}

inline double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// One goal-box constraint on a single state coordinate: |c(s) - center| <= half_width,
/// where c(s) is the raw component or, for angles, the difference taken on the circle.
struct GoalConstraint {
  std::size_t index;
  double center;
  double half_width;
  bool angle = false;

  double offset(const StateVec& s) const noexcept {
    const double d = s[index] - center;
    return angle ? wrap_angle(d) : d;
  }
};

class GoalBox {
 public:
  GoalBox() = default;
  GoalBox(std::vector<GoalConstraint> constraints, std::size_t state_dim);

  const std::vector<GoalConstraint>& constraints() const noexcept { return constraints_; }
  bool contains(const StateVec& s) const noexcept;
  /// Euclidean distance to the box in the constrained coordinates; 0 iff inside.
  double distance(const StateVec& s) const noexcept;

 private:
  std::vector<GoalConstraint> constraints_;
};

struct ActionBound {
  double lo;
  double hi;
};

enum class Integrator { rk4, euler };

using Dynamics = std::function<StateVec(const StateVec&, const ActionVec&)>;
using RewardFn = std::function<double(const StateVec&, const ActionVec&)>;

struct EnvironmentSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Dynamics dynamics;
  RewardFn reward;
  GoalBox goal;
  std::vector<ActionBound> action_bounds;
  StateVec initial_state;
  double dt = 0.0;
  long horizon_steps = 0;
  Integrator integrator = Integrator::rk4;

  /// Goal-centered coordinates: constrained components shifted by the goal
  /// center (angles wrapped), unconstrained components passed through.
  StateVec goal_centered(const StateVec& s) const;
  ActionVec zero_action() const;
  void validate() const;
};

StateVec integrate_step(const EnvironmentSpec& spec, const StateVec& s, const ActionVec& a,
                        long step = -1);
ActionVec clip_action(const EnvironmentSpec& spec, const ActionVec& a);
inline double goal_distance(const EnvironmentSpec& spec, const StateVec& s) {
  return spec.goal.distance(s);
}

enum class AgentMode { certified, relaxed, nominal, explore, policy };

std::string_view mode_name(AgentMode m) noexcept;
AgentMode parse_mode(std::string_view s);

struct StepOutput {
  ActionVec action;
  AgentMode mode = AgentMode::nominal;
  double critic_value = 0.0;
  double relax_prob = 0.0;
};

/// Agent callback: step index, current state and the step's generator.
using StepPolicy = std::function<StepOutput(long step, const StateVec& s, CounterRng& rng)>;

struct StepRecord {
  long step = 0;
  double time = 0.0;
  StateVec state;
  ActionVec action;
  double reward = 0.0;
  double cumulative_reward = 0.0;
  AgentMode mode = AgentMode::nominal;
  double critic_value = 0.0;
  double relax_prob = 0.0;
  bool relax_event = false;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  long episode = 0;
  std::string agent;
  std::string env;
  std::vector<StepRecord> steps;
  StateVec final_state;

  double total_return() const noexcept {
    return steps.empty() ? 0.0 : steps.back().cumulative_reward;
  }
  /// First logged step whose state lies in the goal box, or -1.
  long first_goal_step(const EnvironmentSpec& spec) const;
  long count_mode(AgentMode m) const noexcept;
};

/// Runs horizon_steps transitions from the initial state. Actions are clipped
/// before integration and logged clipped.
EpisodeLog run_episode(const EnvironmentSpec& spec, const StepPolicy& agent, std::uint64_t seed,
                       long episode = 0, std::string_view agent_name = "custom");

}  // namespace calf::env
