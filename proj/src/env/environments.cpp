#include "calf/env/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace calf::env {

namespace {

using std::cos;
using std::sin;
constexpr double pi = std::numbers::pi;

EnvironmentSpec inverted_pendulum() {
  const InvertedPendulumParams p;
  EnvironmentSpec e;
  e.name = "inverted_pendulum";
  e.state_dim = 4;  // theta, x, omega, v
  e.action_dim = 1;  // F
  e.dynamics = [p](const StateVec& s, const ActionVec& a) {
    const double th = s[0], w = s[2], v = s[3], F = a[0];
    const double st = sin(th), ct = cos(th), mt = p.m_c + p.m_p;
    const double domega = (p.g * st * mt - ct * (F + p.m_p * p.l * w * w * st)) /
                          (4.0 * p.l / 3.0 * mt - p.l * p.m_p * ct * ct);
    const double dv = (F + p.m_p * p.l * w * w * st - 3.0 / 8.0 * p.m_p * p.g * sin(2.0 * th)) /
                      (mt - 0.75 * p.m_p * ct * ct);
    return StateVec{w, v, domega, dv};
  };
  e.reward = [](const StateVec& s, const ActionVec&) {
    return -20.0 * (1.0 - cos(s[0])) - 2.0 * s[2] * s[2];
  };
  e.goal = GoalBox({{0, 0.0, 0.1, true}}, 4);
  e.action_bounds = {{-50.0, 50.0}};
  e.initial_state = {pi / 7.0, 2.0, 0.0, 0.0};
  e.dt = 0.01;
  e.horizon_steps = 1500;
  return e;
}

EnvironmentSpec pendulum() {
  const PendulumParams p;
  EnvironmentSpec e;
  e.name = "pendulum";
  e.state_dim = 2;  // theta, omega
  e.action_dim = 1;  // torque
  e.dynamics = [p](const StateVec& s, const ActionVec& a) {
    return StateVec{s[1], 3.0 * p.g / (2.0 * p.l) * sin(s[0]) + 3.0 * a[0] / (p.m * p.l * p.l)};
  };
  // arccos(cos th) == |wrap(th)|
  e.reward = [](const StateVec& s, const ActionVec& a) {
    const double ang = std::abs(wrap_angle(s[0]));
    return -ang * ang - 0.1 * s[1] * s[1] - 0.001 * a[0] * a[0];
  };
  e.goal = GoalBox({{0, pi, 0.25, true}, {1, 0.0, 0.25, false}}, 2);
  e.action_bounds = {{-0.1, 0.1}};
  e.initial_state = {pi, 1.0};
  e.dt = 0.01;
  e.horizon_steps = 1000;
  return e;
}

EnvironmentSpec three_wheel_robot(bool printed) {
  EnvironmentSpec e;
  e.name = "3wrobot_kin";
  e.state_dim = 3;  // x, y, theta
  e.action_dim = 2;  // v, omega
  if (printed) {
    e.dynamics = [](const StateVec& s, const ActionVec& a) {
      return StateVec{s[0] * cos(s[2]), s[1] * sin(s[2]), a[1]};
    };
  } else {
    e.dynamics = [](const StateVec& s, const ActionVec& a) {
      return StateVec{a[0] * cos(s[2]), a[0] * sin(s[2]), a[1]};
    };
  }
  e.reward = [](const StateVec& s, const ActionVec&) {
    return -s[0] * s[0] - 10.0 * s[1] * s[1] - s[2] * s[2];
  };
  e.goal = GoalBox({{0, 0.0, 1.0, false}, {1, 0.0, 1.0, false}, {2, 0.0, 0.7, true}}, 3);
  e.action_bounds = {{-25.0, 25.0}, {-5.0, 5.0}};
  e.initial_state = {5.0, 5.0, 2.0 * pi / 3.0};
  e.dt = 0.01;
  e.horizon_steps = 500;
  return e;
}

EnvironmentSpec two_tank() {
  const TwoTankParams p;
  EnvironmentSpec e;
  e.name = "2tank";
  e.state_dim = 2;  // h1, h2
  e.action_dim = 1;  // inflow
  e.dynamics = [p](const StateVec& s, const ActionVec& a) {
    return StateVec{(p.K1 * a[0] - s[0]) / p.tau1,
                    (-s[1] + p.K2 * s[0] + p.K3 * s[1] * s[1]) / p.tau2};
  };
  e.reward = [](const StateVec& s, const ActionVec&) {
    const double d1 = s[0] - 0.4, d2 = s[1] - 0.4;
    return -10.0 * d1 * d1 - 10.0 * d2 * d2;
  };
  e.goal = GoalBox({{0, 0.4, 0.05, false}, {1, 0.4, 0.05, false}}, 2);
  e.action_bounds = {{0.0, 1.0}};
  e.initial_state = {2.0, -2.0};
  e.dt = 0.1;
  e.horizon_steps = 800;
  return e;
}

EnvironmentSpec omnibot() {
  EnvironmentSpec e;
  e.name = "omnibot";
  e.state_dim = 2;
  e.action_dim = 2;
  e.dynamics = [](const StateVec&, const ActionVec& a) { return StateVec{a[0], a[1]}; };
  e.reward = [](const StateVec& s, const ActionVec&) {
    return -10.0 * s[0] * s[0] - 10.0 * s[1] * s[1];
  };
  e.goal = GoalBox({{0, 0.0, 0.5, false}, {1, 0.0, 0.5, false}}, 2);
  e.action_bounds = {{-10.0, 10.0}, {-10.0, 10.0}};
  e.initial_state = {-10.0, -10.0};
  e.dt = 0.01;
  e.horizon_steps = 1000;
  return e;
}

EnvironmentSpec lunar_lander() {
  const LunarParams p;
  EnvironmentSpec e;
  e.name = "lunar_lander";
  e.state_dim = 6;  // x, y, theta, vx, vy, omega
  e.action_dim = 2;  // F_side, F_vert
  e.dynamics = [p](const StateVec& s, const ActionVec& a) {
    const double th = s[2], fs = a[0], fv = a[1];
    return StateVec{s[3],
                    s[4],
                    s[5],
                    (fs * cos(th) - fv * sin(th)) / p.m,
                    (fs * sin(th) + fv * cos(th)) / p.m - p.g,
                    fs / p.J};
  };
  e.reward = [](const StateVec& s, const ActionVec&) {
    const double dy = s[1] - 1.0;
    return -s[0] * s[0] - 0.1 * dy * dy - 10.0 * s[2] * s[2] - 0.1 * s[3] * s[3] -
           0.1 * s[4] * s[4] - 0.1 * s[5] * s[5];
  };
  e.goal = GoalBox({{1, 1.0, 0.05, false}, {2, 0.0, 0.05, true}}, 6);
  e.action_bounds = {{-100.0, 100.0}, {-50.0, 50.0}};
  e.initial_state = {3.0, 5.0, 2.0 * pi / 3.0, 0.0, 0.0, 0.0};
  e.dt = 0.01;
  e.horizon_steps = 1000;
  return e;
}

}  // namespace

bool is_environment(std::string_view name) noexcept {
  return std::find(kEnvironmentNames.begin(), kEnvironmentNames.end(), name) !=
         kEnvironmentNames.end();
}

EnvironmentSpec make_env(std::string_view name, const EnvOptions& opts) {
  EnvironmentSpec e;
  if (name == "inverted_pendulum") e = inverted_pendulum();
  else if (name == "pendulum") e = pendulum();
  else if (name == "3wrobot_kin") e = three_wheel_robot(opts.robot_printed_dynamics);
  else if (name == "2tank") e = two_tank();
  else if (name == "omnibot") e = omnibot();
  else if (name == "lunar_lander") e = lunar_lander();
  else throw ConfigError("unknown environment '" + std::string(name) + "'");
  e.integrator = opts.integrator;
  e.validate();
  return e;
}

StateVec goal_center_state(const EnvironmentSpec& spec) {
  StateVec s(spec.state_dim);
  for (const auto& c : spec.goal.constraints()) s[c.index] = c.center;
  return s;
}

bool reward_peaks_at_goal_center(const EnvironmentSpec& spec, int per_axis) {
  const StateVec center = goal_center_state(spec);
  const ActionVec a0 = spec.zero_action();
  const double peak = spec.reward(center, a0);
  const auto& cs = spec.goal.constraints();
  std::vector<int> idx(cs.size(), 0);
  while (true) {
    StateVec s = center;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const double frac = per_axis == 1 ? 0.0 : -1.0 + 2.0 * idx[k] / (per_axis - 1);
      s[cs[k].index] = cs[k].center + frac * cs[k].half_width;
    }
    if (spec.reward(s, a0) > peak) return false;
    std::size_t k = 0;
    while (k < cs.size() && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == cs.size()) break;
  }
  return true;
}

}  // namespace calf::env
