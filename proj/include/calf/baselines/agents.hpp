#pragma once

// Hyperparameter tables and training loops for the on-policy baselines.
// One training iteration collects M episodes with the current policy, then
// updates: REINFORCE directly; VPG and PPO after fitting the value network.

#include <cstdint>
#include <string_view>
#include <vector>

#include "calf/baselines/policy_gradient.hpp"
#include "calf/env/core.hpp"

namespace calf::baselines {

enum class BaselineKind { reinforce, vpg, ppo };

/// "reinforce", "sdpg" (VPG) or "ppo".
std::string_view baseline_name(BaselineKind k) noexcept;
BaselineKind parse_baseline(std::string_view name);
bool is_baseline(std::string_view name) noexcept;

struct BaselineConfig {
  std::size_t episodes_per_iteration = 2;  // M
  double gamma = 0.99;
  double gae_lambda = 0.95;
  GaeExponent gae_exponent = GaeExponent::printed;
  std::size_t n_td = 1;
  std::vector<std::size_t> critic_hidden{15, 15};
  double critic_lr = 1e-2;
  std::size_t critic_epochs = 30;
  std::vector<std::size_t> policy_hidden{4};
  double policy_lr = 1e-2;
  std::size_t policy_epochs = 1;
  double clip_eps = 0.2;
  /// sigma = sigma_scale * action half-width.
  double sigma_scale = 0.1;
  /// Heavy-ball coefficient; 0 gives plain gradient steps.
  double momentum = 0.0;
  /// Cap on the L2 norm of each gradient step direction; 0 disables.
  double max_grad_norm = 1.0;
  /// Scale of the initial policy output layer.
  double policy_init_scale = 0.1;

  void validate(BaselineKind kind) const;
};

/// Table values for the given agent and environment.
BaselineConfig baseline_defaults(BaselineKind kind, std::string_view env_name);

struct IterationResult {
  std::vector<env::EpisodeLog> episodes;
  double mean_return = 0.0;
  double critic_loss = 0.0;  // TD loss after fitting (VPG, PPO)
};

class BaselineAgent {
 public:
  BaselineAgent(EnvironmentSpec spec, BaselineKind kind, BaselineConfig cfg, std::uint64_t seed);

  /// Collects M episodes with the current policy and applies one update.
  IterationResult run_iteration(long iteration);

  /// The sampling policy as an env step policy (mode "policy", value = V(s) if any).
  env::StepPolicy step_policy() const;

  BaselineKind kind() const noexcept { return kind_; }
  const BaselineConfig& config() const noexcept { return cfg_; }
  const TruncNormalPolicy& policy() const noexcept { return policy_; }
  const Params& theta() const noexcept { return theta_; }
  const Params& critic_weights() const noexcept { return critic_w_; }
  const std::vector<double>& reinforce_baseline() const noexcept { return baselines_; }

 private:
  void fit_critic(std::span<const Rollout> batch, IterationResult& out);
  void step_params(Params& p, std::vector<double>& velocity, std::vector<double> direction,
                   double lr);

  EnvironmentSpec spec_;
  BaselineKind kind_;
  BaselineConfig cfg_;
  std::uint64_t seed_;
  TruncNormalPolicy policy_;
  ValueNetwork critic_;
  Params theta_;
  Params critic_w_;
  std::vector<double> theta_velocity_;
  std::vector<double> critic_velocity_;
  std::vector<double> baselines_;
};

}  // namespace calf::baselines
