#include "calf/env/core.hpp"

#include <algorithm>
#include <cmath>

namespace calf::env {

GoalBox::GoalBox(std::vector<GoalConstraint> constraints, std::size_t state_dim)
    : constraints_(std::move(constraints)) {
  for (const auto& c : constraints_) {
    if (!(c.half_width > 0.0)) throw ConfigError("goal half-width must be positive");
    if (c.index >= state_dim) throw ConfigError("goal constraint references invalid coordinate");
  }
}

bool GoalBox::contains(const StateVec& s) const noexcept {
  return std::all_of(constraints_.begin(), constraints_.end(), [&](const GoalConstraint& c) {
    return std::abs(c.offset(s)) <= c.half_width;
  });
}

double GoalBox::distance(const StateVec& s) const noexcept {
  double sq = 0.0;
  for (const auto& c : constraints_) {
    const double excess = std::max(std::abs(c.offset(s)) - c.half_width, 0.0);
    sq += excess * excess;
  }
  return std::sqrt(sq);
}

StateVec EnvironmentSpec::goal_centered(const StateVec& s) const {
  StateVec z = s;
  for (const auto& c : goal.constraints()) z[c.index] = c.offset(s);
  return z;
}

ActionVec EnvironmentSpec::zero_action() const {
  ActionVec a(action_dim);
  for (std::size_t i = 0; i < action_dim; ++i)
    a[i] = std::clamp(0.0, action_bounds[i].lo, action_bounds[i].hi);
  return a;
}

void EnvironmentSpec::validate() const {
  if (state_dim == 0 || state_dim > kMaxDim) throw ConfigError(name + ": bad state dimension");
  if (action_dim == 0 || action_dim > kMaxDim) throw ConfigError(name + ": bad action dimension");
  if (!(dt > 0.0)) throw ConfigError(name + ": dt must be positive");
  if (horizon_steps <= 0) throw ConfigError(name + ": horizon must be positive");
  if (initial_state.size() != state_dim) throw ConfigError(name + ": initial state dimension");
  if (action_bounds.size() != action_dim) throw ConfigError(name + ": action bounds dimension");
  for (const auto& b : action_bounds)
    if (!(b.lo <= b.hi)) throw ConfigError(name + ": inverted action bound");
  if (!dynamics || !reward) throw ConfigError(name + ": missing dynamics or reward");
}

namespace {

StateVec axpy(const StateVec& s, double h, const StateVec& k) {
  StateVec out = s;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] += h * k[i];
  return out;
}

}  // namespace

StateVec integrate_step(const EnvironmentSpec& spec, const StateVec& s, const ActionVec& a,
                        long step) {
  const double dt = spec.dt;
  StateVec next;
  if (spec.integrator == Integrator::euler) {
    next = axpy(s, dt, spec.dynamics(s, a));
  } else {
    const StateVec k1 = spec.dynamics(s, a);
    const StateVec k2 = spec.dynamics(axpy(s, 0.5 * dt, k1), a);
    const StateVec k3 = spec.dynamics(axpy(s, 0.5 * dt, k2), a);
    const StateVec k4 = spec.dynamics(axpy(s, dt, k3), a);
    next = s;
    for (std::size_t i = 0; i < s.size(); ++i)
      next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  if (!next.all_finite()) throw IntegrationDiverged(spec.name, step);
  return next;
}

ActionVec clip_action(const EnvironmentSpec& spec, const ActionVec& a) {
  ActionVec out = a;
  for (std::size_t i = 0; i < spec.action_dim; ++i)
    out[i] = std::clamp(a[i], spec.action_bounds[i].lo, spec.action_bounds[i].hi);
  return out;
}

std::string_view mode_name(AgentMode m) noexcept {
  switch (m) {
    case AgentMode::certified: return "certified";
    case AgentMode::relaxed: return "relaxed";
    case AgentMode::nominal: return "nominal";
    case AgentMode::explore: return "explore";
    case AgentMode::policy: return "policy";
  }
  return "unknown";
}

AgentMode parse_mode(std::string_view s) {
  for (AgentMode m : {AgentMode::certified, AgentMode::relaxed, AgentMode::nominal,
                      AgentMode::explore, AgentMode::policy})
    if (mode_name(m) == s) return m;
  throw ConfigError("unknown agent mode '" + std::string(s) + "'");
}

long EpisodeLog::first_goal_step(const EnvironmentSpec& spec) const {
  for (const auto& r : steps)
    if (spec.goal.contains(r.state)) return r.step;
  return -1;
}

long EpisodeLog::count_mode(AgentMode m) const noexcept {
  return static_cast<long>(
      std::count_if(steps.begin(), steps.end(), [m](const StepRecord& r) { return r.mode == m; }));
}

EpisodeLog run_episode(const EnvironmentSpec& spec, const StepPolicy& agent, std::uint64_t seed,
                       long episode, std::string_view agent_name) {
  EpisodeLog log;
  log.seed = seed;
  log.episode = episode;
  log.agent = std::string(agent_name);
  log.env = spec.name;
  log.steps.reserve(static_cast<std::size_t>(spec.horizon_steps));

  CounterRng rng = episode_rng(seed, static_cast<std::uint64_t>(episode)).split(Stream::episode);
  StateVec s = spec.initial_state;
  double cumulative = 0.0;
  for (long t = 0; t < spec.horizon_steps; ++t) {
    StepOutput out = agent(t, s, rng);
    const ActionVec a = clip_action(spec, out.action);
    const double r = spec.reward(s, a);
    cumulative += r;
    log.steps.push_back(StepRecord{t, static_cast<double>(t) * spec.dt, s, a, r, cumulative,
                                   out.mode, out.critic_value, out.relax_prob,
                                   out.mode == AgentMode::relaxed});
    s = integrate_step(spec, s, a, t);
  }
  log.final_state = s;
  return log;
}

}  // namespace calf::env
