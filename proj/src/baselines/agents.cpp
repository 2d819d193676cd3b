#include "calf/baselines/agents.hpp"

#include <cmath>
#include <future>
#include <string>

#include "calf/error.hpp"

namespace calf::baselines {

std::string_view baseline_name(BaselineKind k) noexcept {
  switch (k) {
    case BaselineKind::reinforce: return "reinforce";
    case BaselineKind::vpg: return "sdpg";
    case BaselineKind::ppo: return "ppo";
  }
  return "?";
}

bool is_baseline(std::string_view name) noexcept {
  return name == "reinforce" || name == "sdpg" || name == "ppo";
}

BaselineKind parse_baseline(std::string_view name) {
  if (name == "reinforce") return BaselineKind::reinforce;
  if (name == "sdpg") return BaselineKind::vpg;
  if (name == "ppo") return BaselineKind::ppo;
  throw ConfigError("unknown baseline agent '" + std::string(name) + "'");
}

void BaselineConfig::validate(BaselineKind kind) const {
  if (episodes_per_iteration == 0) throw ConfigError("episodes per iteration must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(policy_lr > 0.0)) throw ConfigError("policy learning rate must be positive");
  if (!(sigma_scale > 0.0)) throw ConfigError("sigma scale must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm must be non-negative");
  if (kind == BaselineKind::reinforce) return;
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("GAE lambda must lie in [0, 1]");
  if (n_td == 0) throw ConfigError("critic TD order must be positive");
  if (!(critic_lr > 0.0)) throw ConfigError("critic learning rate must be positive");
  if (kind == BaselineKind::ppo) {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip epsilon must lie in (0, 1)");
    if (policy_epochs == 0) throw ConfigError("PPO needs at least one policy epoch");
  }
}

namespace {

struct PgRow {
  std::string_view env;
  std::size_t m;
  double gamma;
  std::size_t n_td;
  std::vector<std::size_t> critic_hidden;
  double critic_lr;
  std::size_t critic_epochs;
  std::vector<std::size_t> policy_hidden;
  double policy_lr;
  std::size_t policy_epochs;
};

// Shared by PPO and VPG.
const std::vector<PgRow>& pg_table() {
  static const std::vector<PgRow> rows = {
      {"pendulum", 2, 0.9964, 1, {100, 100, 100, 100}, 0.001, 50, {4}, 0.01, 50},
      {"2tank", 2, 0.9895, 70, {100, 50, 10}, 0.001, 50, {4}, 0.01, 50},
      {"3wrobot_kin", 10, 0.9964, 1, {15, 15}, 0.1, 30, {15, 15}, 0.0005, 30},
      {"inverted_pendulum", 5, 0.9989, 1, {100, 50}, 0.01, 50, {32, 32}, 0.003, 50},
      {"lunar_lander", 10, 0.9964, 1, {15, 15}, 0.1, 30, {15, 15}, 0.0005, 30},
      {"omnibot", 2, 0.9964, 1, {100, 50, 10}, 0.1, 50, {4}, 0.005, 50},
  };
  return rows;
}

struct ReinforceRow {
  std::string_view env;
  std::size_t m;
  double gamma;
  std::vector<std::size_t> hidden;
  double lr;
};

const std::vector<ReinforceRow>& reinforce_table() {
  static const std::vector<ReinforceRow> rows = {
      {"pendulum", 4, 1.0, {4}, 0.1},
      {"2tank", 4, 1.0, {4, 4}, 0.1},
      {"3wrobot_kin", 4, 1.0, {15, 15}, 0.01},
      {"inverted_pendulum", 3, 0.9989, {32, 32}, 0.05},
      {"lunar_lander", 6, 1.0, {4}, 0.1},
      {"omnibot", 4, 1.0, {4, 4}, 0.1},
  };
  return rows;
}

constexpr std::uint64_t kPolicyInit = 0xB0117C1ULL;
constexpr std::uint64_t kCriticInit = 0xB0117C2ULL;

}  // namespace

BaselineConfig baseline_defaults(BaselineKind kind, std::string_view env_name) {
  BaselineConfig c;
  if (kind == BaselineKind::reinforce) {
    for (const ReinforceRow& r : reinforce_table()) {
      if (r.env != env_name) continue;
      c.episodes_per_iteration = r.m;
      c.gamma = r.gamma;
      c.policy_hidden = r.hidden;
      c.policy_lr = r.lr;
      c.policy_epochs = 1;
      c.critic_hidden.clear();
      c.critic_epochs = 0;
      return c;
    }
  } else {
    for (const PgRow& r : pg_table()) {
      if (r.env != env_name) continue;
      c.episodes_per_iteration = r.m;
      c.gamma = r.gamma;
      c.n_td = r.n_td;
      c.critic_hidden = r.critic_hidden;
      c.critic_lr = r.critic_lr;
      c.critic_epochs = r.critic_epochs;
      c.policy_hidden = r.policy_hidden;
      c.policy_lr = r.policy_lr;
      c.policy_epochs = r.policy_epochs;
      return c;
    }
  }
  throw ConfigError("no baseline defaults for environment '" + std::string(env_name) + "'");
}

BaselineAgent::BaselineAgent(EnvironmentSpec spec, BaselineKind kind, BaselineConfig cfg,
                             std::uint64_t seed)
    : spec_(std::move(spec)),
      kind_(kind),
      cfg_(std::move(cfg)),
      seed_(seed),
      policy_(spec_, cfg_.policy_hidden, cfg_.sigma_scale),
      critic_(spec_, cfg_.critic_hidden) {
  cfg_.validate(kind_);
  const std::uint64_t root = derive_key(0, seed_);
  theta_ = policy_.net().init(CounterRng(derive_key(root, kPolicyInit)), cfg_.policy_init_scale);
  if (kind_ != BaselineKind::reinforce)
    critic_w_ = critic_.net().init(CounterRng(derive_key(root, kCriticInit)));
  theta_velocity_.assign(theta_.size(), 0.0);
  critic_velocity_.assign(critic_w_.size(), 0.0);
}

env::StepPolicy BaselineAgent::step_policy() const {
  const bool has_critic = kind_ != BaselineKind::reinforce;
  return [this, has_critic](long, const StateVec& s, CounterRng& rng) {
    env::StepOutput out;
    out.action = policy_.sample(theta_, s, rng);
    out.mode = env::AgentMode::policy;
    out.critic_value = has_critic ? critic_.value(critic_w_, s) : 0.0;
    out.relax_prob = 0.0;
    return out;
  };
}

void BaselineAgent::step_params(Params& p, std::vector<double>& velocity,
                                std::vector<double> direction, double lr) {
  if (cfg_.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (double g : direction) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.max_grad_norm)
      for (double& g : direction) g *= cfg_.max_grad_norm / norm;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    velocity[i] = cfg_.momentum * velocity[i] + direction[i];
    p[i] += lr * velocity[i];
  }
}

void BaselineAgent::fit_critic(std::span<const Rollout> batch, IterationResult& out) {
  const std::size_t terms = value_td_terms(batch, cfg_.n_td);
  if (terms == 0) return;
  std::vector<double> grad;
  for (std::size_t e = 0; e < cfg_.critic_epochs; ++e) {
    value_td_loss(critic_, critic_w_, batch, cfg_.gamma, cfg_.n_td, &grad);
    // Mean-squared scaling keeps the table learning rates usable for any horizon.
    for (double& g : grad) g = -g / static_cast<double>(terms);
    step_params(critic_w_, critic_velocity_, std::move(grad), cfg_.critic_lr);
  }
  out.critic_loss = value_td_loss(critic_, critic_w_, batch, cfg_.gamma, cfg_.n_td);
}

IterationResult BaselineAgent::run_iteration(long iteration) {
  require(iteration >= 0, "iteration index must be non-negative");
  const std::size_t m = cfg_.episodes_per_iteration;
  IterationResult out;
  out.episodes.resize(m);
  {
    // Episodes of one iteration are independent: collect them concurrently.
    const env::StepPolicy pol = step_policy();
    const std::string name(baseline_name(kind_));
    std::vector<std::future<env::EpisodeLog>> jobs;
    for (std::size_t j = 0; j < m; ++j) {
      const long episode = iteration * static_cast<long>(m) + static_cast<long>(j);
      jobs.push_back(std::async(std::launch::async, [this, &pol, &name, episode] {
        return env::run_episode(spec_, pol, seed_, episode, name);
      }));
    }
    for (std::size_t j = 0; j < m; ++j) out.episodes[j] = jobs[j].get();
  }
  std::vector<Rollout> batch;
  for (const env::EpisodeLog& log : out.episodes) {
    batch.push_back(rollout_from_log(log));
    out.mean_return += log.total_return() / static_cast<double>(m);
  }

  std::vector<double> grad;
  if (kind_ == BaselineKind::reinforce) {
    if (baselines_.empty()) baselines_.assign(batch.front().length(), 0.0);
    reinforce_gradient(policy_, theta_, batch, baselines_, cfg_.gamma, grad);
    step_params(theta_, theta_velocity_, std::move(grad), cfg_.policy_lr);
    baselines_ = reinforce_baselines(batch, cfg_.gamma);
    return out;
  }

  fit_critic(batch, out);
  std::vector<std::vector<double>> adv;
  for (const Rollout& r : batch)
    adv.push_back(gae_advantages(r.rewards, critic_.values(critic_w_, r), cfg_.gamma,
                                 cfg_.gae_lambda, cfg_.gae_exponent));

  if (kind_ == BaselineKind::vpg) {
    vpg_gradient(policy_, theta_, batch, adv, cfg_.gamma, grad);
    step_params(theta_, theta_velocity_, std::move(grad), cfg_.policy_lr);
    return out;
  }
  const auto old_lp = batch_log_probs(policy_, theta_, batch);
  for (std::size_t e = 0; e < cfg_.policy_epochs; ++e) {
    ppo_objective(policy_, theta_, batch, old_lp, adv, cfg_.clip_eps, cfg_.gamma, &grad);
    step_params(theta_, theta_velocity_, std::move(grad), cfg_.policy_lr);
  }
  return out;
}

}  // namespace calf::baselines
