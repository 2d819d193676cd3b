#pragma once

#include <array>
#include <string_view>

#include "calf/env/core.hpp"

namespace calf::env {

struct InvertedPendulumParams {
  double m_c = 0.1;  // cart mass, kg
  double m_p = 2.0;  // pole mass, kg
  double l = 0.5;    // pole length, m
  double g = 9.81;
};

struct PendulumParams {
  double m = 0.127;
  double l = 0.337;
  double g = 9.81;
};

struct TwoTankParams {
  double K1 = 1.3;
  double K2 = 1.0;
  double K3 = 0.2;
  double tau1 = 18.4;
  double tau2 = 24.4;
};

struct LunarParams {
  double m = 10.0;
  double J = 3.0;
  double g = 1.625;
};

inline constexpr std::array<std::string_view, 6> kEnvironmentNames = {
    "inverted_pendulum", "pendulum", "3wrobot_kin", "2tank", "omnibot", "lunar_lander"};

struct EnvOptions {
  /// Three-wheel robot: use the literally printed right-hand side
  /// (x' = x cos th, y' = y sin th) instead of the unicycle model.
  bool robot_printed_dynamics = false;
  Integrator integrator = Integrator::rk4;
};

/// Throws ConfigError for unknown names.
EnvironmentSpec make_env(std::string_view name, const EnvOptions& opts = {});

bool is_environment(std::string_view name) noexcept;

/// True when reward(center of goal box, zero action) is >= reward at every
/// point of a `per_axis`-point grid over the goal box (other coordinates held
/// at the goal-centered origin).
bool reward_peaks_at_goal_center(const EnvironmentSpec& spec, int per_axis = 11);

/// The state at the goal center: constrained coordinates at their centers,
/// the rest zero.
StateVec goal_center_state(const EnvironmentSpec& spec);

}  // namespace calf::env
