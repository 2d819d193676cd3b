#include "calf/nominal/policies.hpp"

#include <cmath>
#include <numbers>

#include "calf/env/environments.hpp"

namespace calf::nominal {

namespace {

using env::sign;
using env::wrap_angle;

ActionVec omnibot(const StateVec& s) { return {-0.5 * s[0], -0.5 * s[1]}; }

ActionVec pendulum(const StateVec& s) {
  const env::PendulumParams p;
  const double th = s[0], w = s[1];
  if (std::cos(th) <= std::cos(std::numbers::pi / 10.0) || std::abs(w) > 0.2) {
    const double energy_rate = p.m * p.g * p.l * w / 2.0 * (std::cos(th) - 1.0) +
                               p.m * p.l * p.l * w * w * w / 6.0;
    return {0.03 * sign(energy_rate)};
  }
  return {0.6 * std::sin(th) + 0.2 * w};
}

ActionVec inverted_pendulum(const StateVec& s) {
  const double th = s[0], w = s[2];
  const double upright = 70.0 * th + 20.0 * w;
  const double upswing = std::cos(th) < 0.0 ? 3.0 * sign(w) : 3.0 * sign(std::sin(th));
  const double lambda = (1.0 - std::tanh((th - 0.35) / 10.0)) / 2.0;
  return {(1.0 - lambda) * upswing + lambda * upright};
}

// Parking law: turn to face along the ray through the origin, back up along
// it, then rotate to zero heading. Thresholds are the published 0.001 values.
ActionVec three_wheel_robot(const StateVec& s) {
  constexpr double tol = 0.001;
  const double x = s[0], y = s[1];
  const double heading_err = wrap_angle(s[2] - std::atan2(y, x));
  const bool away = std::abs(x) >= tol || std::abs(y) >= tol;
  if (away && std::abs(heading_err) >= tol)
    return {0.0, -3.0 * sign(heading_err) * std::sqrt(std::abs(heading_err))};
  if (away) return {-3.0 * std::pow(x * x + y * y, 0.25), 0.0};
  const double th = wrap_angle(s[2]);
  if (std::abs(th) >= tol) return {0.0, -3.0 * sign(th) * std::sqrt(std::abs(th))};
  return {0.0, 0.0};
}

ActionVec two_tank(const StateVec& s) {
  const env::TwoTankParams p;
  const double h1 = s[0], h2 = s[1];
  const double num = -6.5 * (h1 - 0.4) + 2.0 * h1 / p.tau1 - 6.5 * (h2 - 0.4) -
                     2.0 * (-h1 + p.K2 * h1 + p.K3 * h2 * h2);
  return {num / (1.0 + 2.0 * p.K1 / p.tau1)};
}

ActionVec lunar_lander(const StateVec& s) {
  const double x = s[0], th = s[2], vx = s[3], w = s[5];
  const double c = std::cos(th);
  return {-80.0 * th - 20.0 * w - c * c * (-10.0 * x - 40.0 * vx), 0.0};
}

}  // namespace

ActionVec raw_action(std::string_view env_name, const StateVec& s) {
  if (env_name == "omnibot") return omnibot(s);
  if (env_name == "pendulum") return pendulum(s);
  if (env_name == "inverted_pendulum") return inverted_pendulum(s);
  if (env_name == "3wrobot_kin") return three_wheel_robot(s);
  if (env_name == "2tank") return two_tank(s);
  if (env_name == "lunar_lander") return lunar_lander(s);
  throw ConfigError("no nominal policy for environment '" + std::string(env_name) + "'");
}

ActionVec nominal_action(const EnvironmentSpec& spec, const StateVec& s) {
  return env::clip_action(spec, raw_action(spec.name, s));
}

env::StepPolicy make_nominal_agent(const EnvironmentSpec& spec) {
  return [spec](long, const StateVec& s, CounterRng&) {
    return env::StepOutput{nominal_action(spec, s), env::AgentMode::nominal, 0.0, 0.0};
  };
}

}  // namespace calf::nominal
