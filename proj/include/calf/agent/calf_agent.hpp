#pragma once

// The goal-reaching agent: each step tries a certified critic update, then
// plays the greedy actor if the update was accepted or a relax draw q < p
// succeeded, and the nominal policy otherwise. p decays by relax_factor per step.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "calf/critic/critic.hpp"
#include "calf/env/core.hpp"

namespace calf::agent {

using critic::Weights;
using env::ActionVec;
using env::EnvironmentSpec;
using env::StateVec;

enum class Variant { state_critic, state_action_critic };

struct CalfConfig {
  double relax_factor = 0.99;
  /// Initial p when resample_relax_prob is off.
  double relax_prob_init = 0.5;
  bool resample_relax_prob = true;
  double relax_prob_min = 0.0;
  double relax_prob_max = 0.5;
  double epsilon_explore = 0.0;
  bool nominal_first = false;
  bool propagate_certified_weights = false;
  std::size_t actor_candidates = 64;
  Variant variant = Variant::state_critic;
  /// p, relax_factor <- 0 once kappa_low(|z_t|) <= nu_bar.
  bool drop_relax_near_goal = false;
  /// p, relax_factor <- 0 once |z_t| exceeds kappa_low^{-1}(kappa_up(|z_0|)).
  bool drop_relax_on_escape = false;
  critic::CriticConfig critic;

  void validate() const;
};

/// Per-environment defaults (TD order, replay window, relax range and episode flags).
CalfConfig calf_defaults(std::string_view env_name);

/// Center of the action box, then its corners, then n_random uniform draws.
std::vector<ActionVec> make_candidates(const EnvironmentSpec& spec, std::size_t n_random,
                                       CounterRng rng);

/// argmax over candidates of r(s, a) + V^w(f(s, a)); first maximizer wins.
ActionVec greedy_action(const EnvironmentSpec& spec, const critic::CriticModel& model,
                        std::span<const double> w, const StateVec& s,
                        std::span<const ActionVec> candidates);

/// argmin over candidates of Q^w(s, a); first minimizer wins.
ActionVec greedy_action_q(const EnvironmentSpec& spec, const critic::CriticModel& model,
                          std::span<const double> w, const StateVec& s,
                          std::span<const ActionVec> candidates);

struct EpisodeStats {
  double p0 = 0.0;
  double lambda0 = 0.0;
  double budget = 0.0;
  long acceptances = 0;
  std::vector<double> ladder;
  std::vector<double> relax_probs;  // p used at each step
  bool acceptance_enabled = true;
};

class CalfAgent {
 public:
  CalfAgent(EnvironmentSpec spec, CalfConfig cfg, std::uint64_t seed);

  /// Episode initialization: relax probability, certified weights and anchor.
  void begin_episode(long episode);
  /// One agent iteration at the freshly observed state s_t.
  env::StepOutput step(long t, const StateVec& s);
  /// begin_episode + env::run_episode.
  env::EpisodeLog run_episode(long episode);

  const EnvironmentSpec& spec() const noexcept { return spec_; }
  const CalfConfig& config() const noexcept { return cfg_; }
  const critic::CriticModel& model() const noexcept { return model_; }
  const critic::CriticState& critic_state() const noexcept { return critic_; }
  const Weights& initial_weights() const noexcept { return w0_; }
  const EpisodeStats& episode_stats() const noexcept { return stats_; }
  double relax_prob() const noexcept { return p_; }
  std::string_view name() const noexcept;

 private:
  critic::ModelInput input_for(const StateVec& s, const ActionVec* a) const;
  ActionVec actor(long t, const StateVec& s) const;

  EnvironmentSpec spec_;
  CalfConfig cfg_;
  std::uint64_t seed_;
  critic::CriticModel model_;
  critic::CriticState critic_;
  Weights w0_;
  EpisodeStats stats_;

  long episode_ = -1;
  double p_ = 0.0;
  double p_start_ = 0.0;
  long decay_steps_ = 0;
  double kappa_ = 0.0;
  double z0_norm_ = 0.0;
  bool have_prev_ = false;
  StateVec prev_state_;
  ActionVec prev_action_;
  critic::ModelInput prev_input_;
  CounterRng relax_rng_{0};
  CounterRng explore_rng_{0};
  CounterRng actor_root_{0};
};

}  // namespace calf::agent
