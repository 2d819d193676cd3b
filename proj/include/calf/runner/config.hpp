#pragma once

// RunConfig and its YAML form. Doubles are written with 17 significant digits
// so every value survives a write/read cycle unchanged.
//
//   agent: calf | calfq | nominal | reinforce | sdpg | ppo
//   env: one of the six environment names
//   seeds: [1, 2, ...]
//   episodes: 20
//   output_dir: out
//   integrator: rk4 | euler
//   robot_printed_dynamics: false
//   calf: { relax_factor, relax_prob_init, resample_relax_prob, relax_prob_min,
//           relax_prob_max, epsilon_explore, nominal_first,
//           propagate_certified_weights, actor_candidates, drop_relax_near_goal,
//           drop_relax_on_escape, critic: { hidden, eps_reg, weight_bound, nu_bar,
//           c_low, c_up, grad_steps, learning_rate, max_grad_norm, gamma, n_td,
//           batch_size, output_init_scale, init_lambda_ratio } }
//   baseline: { episodes_per_iteration, gamma, gae_lambda, gae_exponent, n_td,
//               critic_hidden, critic_lr, critic_epochs, policy_hidden, policy_lr,
//               policy_epochs, clip_eps, sigma_scale, momentum, max_grad_norm,
//               policy_init_scale }
//
// Missing keys keep their defaults; unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "calf/agent/calf_agent.hpp"
#include "calf/baselines/agents.hpp"
#include "calf/env/environments.hpp"

namespace calf::runner {

inline constexpr const char* kAgentNames[] = {"nominal", "calf", "calfq",
                                              "reinforce", "sdpg", "ppo"};

bool is_agent(std::string_view name) noexcept;

struct RunConfig {
  std::string agent = "calf";
  std::string env = "omnibot";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  long episodes = 20;
  std::string output_dir = "out";
  env::EnvOptions env_options{};
  std::optional<agent::CalfConfig> calf;
  std::optional<baselines::BaselineConfig> baseline;

  void validate() const;
};

/// Agent and environment defaults with the matching sub-config filled in.
RunConfig default_run_config(std::string_view agent, std::string_view env);

std::string to_yaml(const RunConfig& cfg);
/// Parses on top of default_run_config(agent, env) from the document.
RunConfig run_config_from_yaml(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::string to_yaml(const agent::CalfConfig& cfg);
agent::CalfConfig calf_config_from_yaml(const std::string& text,
                                        const agent::CalfConfig& base = {});
std::string to_yaml(const baselines::BaselineConfig& cfg);
baselines::BaselineConfig baseline_config_from_yaml(const std::string& text,
                                                    const baselines::BaselineConfig& base = {});

/// "1..10", "1,3,5" or a mix such as "1..3,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace calf::runner
