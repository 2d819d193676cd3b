#include "calf/agent/calf_agent.hpp"

#include <cmath>
#include <limits>

#include "calf/certificates/certificates.hpp"
#include "calf/nominal/policies.hpp"

namespace calf::agent {

void CalfConfig::validate() const {
  if (!(relax_factor >= 0.0 && relax_factor < 1.0))
    throw ConfigError("relax_factor must lie in [0, 1)");
  if (!(relax_prob_init >= 0.0 && relax_prob_init < 1.0))
    throw ConfigError("relax_prob_init must lie in [0, 1)");
  if (!(0.0 <= relax_prob_min && relax_prob_min <= relax_prob_max && relax_prob_max < 1.0))
    throw ConfigError("need 0 <= relax_prob_min <= relax_prob_max < 1");
  if (!(epsilon_explore >= 0.0 && epsilon_explore < 1.0))
    throw ConfigError("epsilon_explore must lie in [0, 1)");
  if (actor_candidates == 0) throw ConfigError("actor_candidates must be positive");
  if (critic.n_td == 0) throw ConfigError("critic TD order must be positive");
  if (critic.batch_size < critic.n_td) throw ConfigError("critic batch shorter than TD order");
  if (!(critic.gamma > 0.0 && critic.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  critic.bounds.validate();
}

CalfConfig calf_defaults(std::string_view env_name) {
  struct Row {
    std::string_view env;
    std::size_t n_td;
    std::size_t batch;
    double p_min;
    double p_max;
    bool propagate;
    bool nominal_first;
  };
  // The inverted pendulum and omnibot ranges are listed with min > max; they
  // are stored here as ordered intervals.
  static constexpr Row rows[] = {
      {"pendulum", 1, 10, 0.01, 0.999, false, false},
      {"2tank", 1, 3, 0.0, 0.8, false, true},
      {"3wrobot_kin", 2, 32, 0.0, 0.49, false, false},
      {"inverted_pendulum", 2, 3, 0.0, 0.5, false, true},
      {"lunar_lander", 1, 3, 0.0, 0.46, true, false},
      {"omnibot", 1, 2, 0.75, 0.999, false, true},
  };
  for (const Row& r : rows) {
    if (r.env != env_name) continue;
    CalfConfig c;
    c.critic.n_td = r.n_td;
    c.critic.batch_size = r.batch;
    c.critic.gamma = 1.0;
    c.relax_prob_min = r.p_min;
    c.relax_prob_max = r.p_max;
    c.propagate_certified_weights = r.propagate;
    c.nominal_first = r.nominal_first;
    return c;
  }
  throw ConfigError("no CALF defaults for environment '" + std::string(env_name) + "'");
}

std::vector<ActionVec> make_candidates(const EnvironmentSpec& spec, std::size_t n_random,
                                       CounterRng rng) {
  const std::size_t m = spec.action_dim;
  std::vector<ActionVec> out;
  out.reserve(1 + (std::size_t{1} << m) + n_random);
  ActionVec center(m);
  for (std::size_t i = 0; i < m; ++i)
    center[i] = 0.5 * (spec.action_bounds[i].lo + spec.action_bounds[i].hi);
  out.push_back(center);
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    ActionVec corner(m);
    for (std::size_t i = 0; i < m; ++i)
      corner[i] = (mask >> i) & 1U ? spec.action_bounds[i].hi : spec.action_bounds[i].lo;
    out.push_back(corner);
  }
  for (std::size_t k = 0; k < n_random; ++k) {
    ActionVec a(m);
    for (std::size_t i = 0; i < m; ++i)
      a[i] = rng.uniform(spec.action_bounds[i].lo, spec.action_bounds[i].hi);
    out.push_back(a);
  }
  return out;
}

ActionVec greedy_action(const EnvironmentSpec& spec, const critic::CriticModel& model,
                        std::span<const double> w, const StateVec& s,
                        std::span<const ActionVec> candidates) {
  require(!candidates.empty(), "greedy_action needs candidates");
  std::size_t best = 0;
  double best_obj = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const ActionVec& a = candidates[k];
    const StateVec next = env::integrate_step(spec, s, a);
    const double obj = spec.reward(s, a) + model.value(w, model.input(spec.goal_centered(next)));
    if (obj > best_obj) {
      best_obj = obj;
      best = k;
    }
  }
  return candidates[best];
}

ActionVec greedy_action_q(const EnvironmentSpec& spec, const critic::CriticModel& model,
                          std::span<const double> w, const StateVec& s,
                          std::span<const ActionVec> candidates) {
  require(!candidates.empty(), "greedy_action_q needs candidates");
  const StateVec z = spec.goal_centered(s);
  std::size_t best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double obj = model.value(w, model.input(z, &candidates[k]));
    if (obj < best_obj) {
      best_obj = obj;
      best = k;
    }
  }
  return candidates[best];
}

namespace {

critic::CriticKind kind_of(Variant v) {
  return v == Variant::state_critic ? critic::CriticKind::state_value
                                    : critic::CriticKind::state_action;
}

constexpr std::uint64_t kWeightInitStream = 0x5EED1417ULL;

}  // namespace

CalfAgent::CalfAgent(EnvironmentSpec spec, CalfConfig cfg, std::uint64_t seed)
    : spec_(std::move(spec)),
      cfg_(std::move(cfg)),
      seed_(seed),
      model_(kind_of(cfg_.variant), spec_.state_dim, spec_.action_dim, cfg_.critic.hidden,
             cfg_.critic.eps_reg, cfg_.critic.weight_bound) {
  cfg_.validate();
  critic_.nu_bar = cfg_.critic.nu_bar > 0.0 ? cfg_.critic.nu_bar : 1e-3 * spec_.dt;
  critic_.bounds = cfg_.critic.bounds;
  critic_.buffer = critic::TransitionBuffer(cfg_.critic.batch_size);
  const ActionVec a0 = nominal::nominal_action(spec_, spec_.initial_state);
  const auto x0 = input_for(spec_.initial_state, &a0);
  w0_ = critic::initial_weights(model_, cfg_.critic, x0,
                                CounterRng(derive_key(derive_key(0, seed_), kWeightInitStream)));
  critic_.live = w0_;
}

std::string_view CalfAgent::name() const noexcept {
  return cfg_.variant == Variant::state_critic ? "calf" : "calfq";
}

critic::ModelInput CalfAgent::input_for(const StateVec& s, const ActionVec* a) const {
  return model_.input(spec_.goal_centered(s), a);
}

void CalfAgent::begin_episode(long episode) {
  episode_ = episode;
  const CounterRng root = episode_rng(seed_, static_cast<std::uint64_t>(episode));
  relax_rng_ = root.split(Stream::relax);
  explore_rng_ = root.split(Stream::explore);
  actor_root_ = root.split(Stream::actor);

  stats_ = EpisodeStats{};
  stats_.acceptance_enabled = !(cfg_.nominal_first && episode == 0);
  if (!stats_.acceptance_enabled) {
    p_ = 0.0;
  } else if (cfg_.resample_relax_prob) {
    CounterRng init = root.split(Stream::init);
    p_ = init.uniform(cfg_.relax_prob_min, cfg_.relax_prob_max);
  } else {
    p_ = cfg_.relax_prob_init;
  }
  kappa_ = cfg_.relax_factor;
  p_start_ = p_;
  decay_steps_ = 0;
  stats_.p0 = p_;

  const StateVec& s0 = spec_.initial_state;
  z0_norm_ = spec_.goal_centered(s0).norm();
  std::optional<ActionVec> a0;
  if (cfg_.variant == Variant::state_action_critic) a0 = nominal::nominal_action(spec_, s0);
  const auto x0 = input_for(s0, a0 ? &*a0 : nullptr);

  Weights certified = w0_;
  if (cfg_.propagate_certified_weights && episode > 0) {
    certified = critic_.certified;
    if (!critic::fit_sandwich(model_, critic_.bounds, x0, certified)) certified = w0_;
  }
  critic::start_epoch(critic_, model_, std::move(certified), s0, x0, a0);
  stats_.lambda0 = critic_.lambda0;
  stats_.budget = cert::update_budget(critic_.lambda0, critic_.nu_bar);
  stats_.relax_probs.reserve(static_cast<std::size_t>(spec_.horizon_steps));
  have_prev_ = false;
}

ActionVec CalfAgent::actor(long t, const StateVec& s) const {
  const auto candidates = make_candidates(spec_, cfg_.actor_candidates,
                                          actor_root_.split(static_cast<std::uint64_t>(t)));
  if (cfg_.variant == Variant::state_critic)
    return greedy_action(spec_, model_, critic_.certified, s, candidates);
  return greedy_action_q(spec_, model_, critic_.certified, s, candidates);
}

env::StepOutput CalfAgent::step(long t, const StateVec& s) {
  require(episode_ >= 0, "begin_episode must be called before step");
  const StateVec z = spec_.goal_centered(s);
  const double zn = z.norm();
  if (cfg_.drop_relax_near_goal && critic_.bounds.low(zn) <= critic_.nu_bar)
    p_ = p_start_ = kappa_ = 0.0;
  if (cfg_.drop_relax_on_escape &&
      zn > std::sqrt(critic_.bounds.c_up / critic_.bounds.c_low) * z0_norm_)
    p_ = p_start_ = kappa_ = 0.0;

  const bool q_variant = cfg_.variant == Variant::state_action_critic;
  std::optional<ActionVec> proposal;
  if (q_variant) proposal = actor(t, s);
  const critic::ModelInput x_t = model_.input(z, proposal ? &*proposal : nullptr);

  if (have_prev_)
    critic_.buffer.push(prev_input_, spec_.reward(prev_state_, prev_action_), x_t);
  const critic::TdBatch batch = critic_.buffer.window();

  bool accepted = false;
  if (stats_.acceptance_enabled) {
    accepted = critic::try_critic_update(critic_, model_, cfg_.critic, s, x_t, batch, proposal)
                   .accepted;
  } else {
    critic::learn_step(critic_, model_, cfg_.critic, batch);
  }

  // Both draws are consumed every step so streams do not depend on the mode.
  const double q = relax_rng_.uniform();
  const double u_explore = explore_rng_.uniform();
  const double p_used = p_;

  ActionVec a;
  env::AgentMode mode;
  if (accepted || q < p_) {
    a = proposal ? *proposal : actor(t, s);
    mode = accepted ? env::AgentMode::certified : env::AgentMode::relaxed;
    if (u_explore < cfg_.epsilon_explore) {
      CounterRng r = actor_root_.split(static_cast<std::uint64_t>(t)).split(Stream::explore);
      for (std::size_t i = 0; i < spec_.action_dim; ++i)
        a[i] = r.uniform(spec_.action_bounds[i].lo, spec_.action_bounds[i].hi);
      mode = env::AgentMode::explore;
    }
  } else {
    a = nominal::nominal_action(spec_, s);
    mode = env::AgentMode::nominal;
  }
  a = env::clip_action(spec_, a);

  critic::ModelInput x_exec = x_t;
  if (q_variant && !(a == *proposal)) {
    x_exec = model_.input(z, &a);
    critic_.buffer.replace_last_input(x_exec);
  }

  stats_.relax_probs.push_back(p_used);
  stats_.acceptances = critic_.acceptances;
  // p <- kappa p, evaluated as p0 kappa^t so rounding does not accumulate.
  p_ = p_start_ * std::pow(kappa_, static_cast<double>(++decay_steps_));

  have_prev_ = true;
  prev_state_ = s;
  prev_action_ = a;
  prev_input_ = x_exec;
  return env::StepOutput{a, mode, critic_.ladder.back(), p_used};
}

env::EpisodeLog CalfAgent::run_episode(long episode) {
  begin_episode(episode);
  auto log = env::run_episode(
      spec_, [this](long t, const StateVec& s, CounterRng&) { return step(t, s); }, seed_, episode,
      name());
  stats_.ladder = critic_.ladder;
  return log;
}

}  // namespace calf::agent
