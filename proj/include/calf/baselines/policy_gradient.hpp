#pragma once

// Truncated-normal policy over a tanh network and the on-policy estimators:
// GAE, REINFORCE with per-step baselines, VPG and the PPO clipped objective,
// plus the TD-trained value network shared by VPG and PPO.

#include <cstddef>
#include <span>
#include <vector>

#include "calf/baselines/mlp.hpp"
#include "calf/env/core.hpp"

namespace calf::baselines {

using env::ActionVec;
using env::EnvironmentSpec;
using env::StateVec;
using Params = std::vector<double>;

/// Each action component is an independent normal truncated to its bound.
/// The mean is center + half_width * tanh(net(z)) with z goal-centered, so it
/// always lies inside the box; sigma = sigma_scale * half_width.
class TruncNormalPolicy {
 public:
  TruncNormalPolicy(const EnvironmentSpec& spec, std::vector<std::size_t> hidden,
                    double sigma_scale = 0.1);

  const Mlp& net() const noexcept { return net_; }
  std::size_t num_params() const noexcept { return net_.num_params(); }
  std::span<const double> sigma() const noexcept { return sigma_; }

  ActionVec mean(std::span<const double> theta, const StateVec& s) const;
  double log_prob(std::span<const double> theta, const StateVec& s, const ActionVec& a) const;
  /// Returns log_prob and adds scale * grad_theta log_prob into grad.
  double log_prob_grad(std::span<const double> theta, const StateVec& s, const ActionVec& a,
                       double scale, std::span<double> grad) const;
  ActionVec sample(std::span<const double> theta, const StateVec& s, CounterRng& rng) const;

 private:
  StateVec features(const StateVec& s) const { return spec_.goal_centered(s); }

  EnvironmentSpec spec_;
  Mlp net_;
  std::vector<double> center_;
  std::vector<double> half_;
  std::vector<double> sigma_;
};

/// One episode: states s_0..s_T (T + 1 entries), actions and rewards for t < T.
struct Rollout {
  std::vector<StateVec> states;
  std::vector<ActionVec> actions;
  std::vector<double> rewards;

  std::size_t length() const noexcept { return rewards.size(); }
};

Rollout rollout_from_log(const env::EpisodeLog& log);

enum class GaeExponent {
  printed,  // (gamma lambda)^{t'}
  shifted,  // (gamma lambda)^{t' - t}, the usual definition
};

/// A_t = sum_{t' >= t} w(t, t') delta_{t'}, delta_t = r_t + gamma V_{t+1} - V_t,
/// with values = V(s_0..s_{T-1}) and V(s_T) = 0.
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values, double gamma, double lambda,
                                   GaeExponent exponent = GaeExponent::printed);

/// G_t = sum_{t' >= t} gamma^{t'} r_{t'}.
std::vector<double> discounted_tail_returns(std::span<const double> rewards, double gamma);

/// B_t = mean over the batch of G_t.
std::vector<double> reinforce_baselines(std::span<const Rollout> batch, double gamma);

/// (1/M) sum_j sum_t (G^j_t - B_t) grad log pi(a^j_t | s^j_t), written to grad.
void reinforce_gradient(const TruncNormalPolicy& policy, std::span<const double> theta,
                        std::span<const Rollout> batch, std::span<const double> baselines,
                        double gamma, std::vector<double>& grad);

/// theta += lr * reinforce_gradient, then baselines <- reinforce_baselines(batch).
void reinforce_update(const TruncNormalPolicy& policy, Params& theta,
                      std::span<const Rollout> batch, std::vector<double>& baselines,
                      double gamma, double lr);

/// (1/M) sum_j sum_t gamma^t A^j_t grad log pi(a^j_t | s^j_t), written to grad.
void vpg_gradient(const TruncNormalPolicy& policy, std::span<const double> theta,
                  std::span<const Rollout> batch,
                  std::span<const std::vector<double>> advantages, double gamma,
                  std::vector<double>& grad);

void vpg_update(const TruncNormalPolicy& policy, Params& theta, std::span<const Rollout> batch,
                std::span<const std::vector<double>> advantages, double gamma, double lr);

/// log pi_theta(a_t | s_t) for every step of every rollout.
std::vector<std::vector<double>> batch_log_probs(const TruncNormalPolicy& policy,
                                                 std::span<const double> theta,
                                                 std::span<const Rollout> batch);

/// (1/M) sum_j sum_t gamma^t min(rho A, clip(rho, 1 - eps, 1 + eps) A),
/// rho = pi_theta / pi_old. When grad is given it receives the gradient.
double ppo_objective(const TruncNormalPolicy& policy, std::span<const double> theta,
                     std::span<const Rollout> batch,
                     std::span<const std::vector<double>> old_log_probs,
                     std::span<const std::vector<double>> advantages, double clip_eps,
                     double gamma, std::vector<double>* grad = nullptr);

/// State-value network V(s) = net(z) for VPG and PPO.
class ValueNetwork {
 public:
  ValueNetwork(const EnvironmentSpec& spec, std::vector<std::size_t> hidden);

  const Mlp& net() const noexcept { return net_; }
  std::size_t num_params() const noexcept { return net_.num_params(); }
  StateVec features(const StateVec& s) const { return spec_.goal_centered(s); }
  double value(std::span<const double> w, const StateVec& s) const;
  /// Returns V(s) and adds scale * grad_w V(s) into grad.
  double value_grad(std::span<const double> w, const StateVec& s, double scale,
                    std::span<double> grad) const;
  /// V(s_0..s_{T-1}).
  std::vector<double> values(std::span<const double> w, const Rollout& r) const;

 private:
  EnvironmentSpec spec_;
  Mlp net_;
};

/// sum_j sum_{t=0}^{T-1-N} (V(s_t) - sum_{k<N} gamma^k r_{t+k} - gamma^N V(s_{t+N}))^2.
/// When grad is given it receives the full gradient.
double value_td_loss(const ValueNetwork& critic, std::span<const double> w,
                     std::span<const Rollout> batch, double gamma, std::size_t n_td,
                     std::vector<double>* grad = nullptr);

/// Number of squared terms in value_td_loss.
std::size_t value_td_terms(std::span<const Rollout> batch, std::size_t n_td) noexcept;

}  // namespace calf::baselines
