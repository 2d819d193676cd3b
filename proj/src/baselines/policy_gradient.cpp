#include "calf/baselines/policy_gradient.hpp"

#include <algorithm>
#include <cmath>

#include "calf/baselines/trunc_normal.hpp"
#include "calf/error.hpp"

namespace calf::baselines {

TruncNormalPolicy::TruncNormalPolicy(const EnvironmentSpec& spec,
                                     std::vector<std::size_t> hidden, double sigma_scale)
    : spec_(spec) {
  if (!(sigma_scale > 0.0)) throw ConfigError("policy sigma scale must be positive");
  std::vector<std::size_t> sizes{spec.state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(spec.action_dim);
  net_ = Mlp(std::move(sizes));
  for (const env::ActionBound& b : spec.action_bounds) {
    center_.push_back(0.5 * (b.lo + b.hi));
    half_.push_back(0.5 * (b.hi - b.lo));
    sigma_.push_back(sigma_scale * 0.5 * (b.hi - b.lo));
  }
}

ActionVec TruncNormalPolicy::mean(std::span<const double> theta, const StateVec& s) const {
  Mlp::Cache c;
  net_.forward(theta, features(s).span(), c);
  const auto out = Mlp::output(c);
  ActionVec mu(spec_.action_dim);
  for (std::size_t i = 0; i < spec_.action_dim; ++i)
    mu[i] = center_[i] + half_[i] * std::tanh(out[i]);
  return mu;
}

double TruncNormalPolicy::log_prob(std::span<const double> theta, const StateVec& s,
                                   const ActionVec& a) const {
  const ActionVec mu = mean(theta, s);
  double lp = 0.0;
  for (std::size_t i = 0; i < spec_.action_dim; ++i) {
    const env::ActionBound& b = spec_.action_bounds[i];
    lp += TruncatedNormal{mu[i], sigma_[i], b.lo, b.hi}.log_pdf(a[i]);
  }
  return lp;
}

double TruncNormalPolicy::log_prob_grad(std::span<const double> theta, const StateVec& s,
                                        const ActionVec& a, double scale,
                                        std::span<double> grad) const {
  Mlp::Cache c;
  net_.forward(theta, features(s).span(), c);
  const auto out = Mlp::output(c);
  double lp = 0.0;
  std::vector<double> dout(spec_.action_dim);
  for (std::size_t i = 0; i < spec_.action_dim; ++i) {
    const env::ActionBound& b = spec_.action_bounds[i];
    const double th = std::tanh(out[i]);
    const TruncatedNormal d{center_[i] + half_[i] * th, sigma_[i], b.lo, b.hi};
    lp += d.log_pdf(a[i]);
    dout[i] = scale * d.dlog_pdf_dmu(a[i]) * half_[i] * (1.0 - th * th);
  }
  net_.backward(theta, c, dout, grad);
  return lp;
}

ActionVec TruncNormalPolicy::sample(std::span<const double> theta, const StateVec& s,
                                    CounterRng& rng) const {
  const ActionVec mu = mean(theta, s);
  ActionVec a(spec_.action_dim);
  for (std::size_t i = 0; i < spec_.action_dim; ++i) {
    const env::ActionBound& b = spec_.action_bounds[i];
    a[i] = TruncatedNormal{mu[i], sigma_[i], b.lo, b.hi}.sample(rng.uniform());
  }
  return a;
}

Rollout rollout_from_log(const env::EpisodeLog& log) {
  Rollout r;
  r.states.reserve(log.steps.size() + 1);
  for (const env::StepRecord& rec : log.steps) {
    r.states.push_back(rec.state);
    r.actions.push_back(rec.action);
    r.rewards.push_back(rec.reward);
  }
  r.states.push_back(log.final_state);
  return r;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values, double gamma, double lambda,
                                   GaeExponent exponent) {
  require(rewards.size() == values.size(), "rewards and values must align");
  const std::size_t n = rewards.size();
  std::vector<double> adv(n, 0.0);
  const double gl = gamma * lambda;
  double acc = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_v = t + 1 < n ? values[t + 1] : 0.0;
    const double delta = rewards[t] + gamma * next_v - values[t];
    if (exponent == GaeExponent::printed)
      acc += std::pow(gl, static_cast<double>(t)) * delta;
    else
      acc = delta + gl * acc;
    adv[t] = acc;
  }
  return adv;
}

std::vector<double> discounted_tail_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size(), 0.0);
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc += std::pow(gamma, static_cast<double>(t)) * rewards[t];
    g[t] = acc;
  }
  return g;
}

std::vector<double> reinforce_baselines(std::span<const Rollout> batch, double gamma) {
  require(!batch.empty(), "REINFORCE needs at least one episode");
  std::vector<double> b(batch.front().length(), 0.0);
  for (const Rollout& r : batch) {
    require(r.length() == b.size(), "episodes in a batch must share the horizon");
    const auto g = discounted_tail_returns(r.rewards, gamma);
    for (std::size_t t = 0; t < b.size(); ++t) b[t] += g[t];
  }
  for (double& x : b) x /= static_cast<double>(batch.size());
  return b;
}

void reinforce_gradient(const TruncNormalPolicy& policy, std::span<const double> theta,
                        std::span<const Rollout> batch, std::span<const double> baselines,
                        double gamma, std::vector<double>& grad) {
  require(!batch.empty(), "REINFORCE needs at least one episode");
  grad.assign(policy.num_params(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (const Rollout& r : batch) {
    require(baselines.size() == r.length(), "one baseline per time step");
    const auto g = discounted_tail_returns(r.rewards, gamma);
    for (std::size_t t = 0; t < r.length(); ++t) {
      const double w = inv_m * (g[t] - baselines[t]);
      if (w != 0.0) policy.log_prob_grad(theta, r.states[t], r.actions[t], w, grad);
    }
  }
}

void reinforce_update(const TruncNormalPolicy& policy, Params& theta,
                      std::span<const Rollout> batch, std::vector<double>& baselines,
                      double gamma, double lr) {
  if (baselines.empty()) baselines.assign(batch.front().length(), 0.0);
  std::vector<double> grad;
  reinforce_gradient(policy, theta, batch, baselines, gamma, grad);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += lr * grad[i];
  baselines = reinforce_baselines(batch, gamma);
}

void vpg_gradient(const TruncNormalPolicy& policy, std::span<const double> theta,
                  std::span<const Rollout> batch,
                  std::span<const std::vector<double>> advantages, double gamma,
                  std::vector<double>& grad) {
  require(batch.size() == advantages.size() && !batch.empty(), "one advantage row per episode");
  grad.assign(policy.num_params(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Rollout& r = batch[j];
    require(advantages[j].size() == r.length(), "advantages must align with steps");
    double disc = 1.0;
    for (std::size_t t = 0; t < r.length(); ++t, disc *= gamma) {
      const double w = inv_m * disc * advantages[j][t];
      if (w != 0.0) policy.log_prob_grad(theta, r.states[t], r.actions[t], w, grad);
    }
  }
}

void vpg_update(const TruncNormalPolicy& policy, Params& theta, std::span<const Rollout> batch,
                std::span<const std::vector<double>> advantages, double gamma, double lr) {
  std::vector<double> grad;
  vpg_gradient(policy, theta, batch, advantages, gamma, grad);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += lr * grad[i];
}

std::vector<std::vector<double>> batch_log_probs(const TruncNormalPolicy& policy,
                                                 std::span<const double> theta,
                                                 std::span<const Rollout> batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const Rollout& r : batch) {
    std::vector<double> lp(r.length());
    for (std::size_t t = 0; t < r.length(); ++t)
      lp[t] = policy.log_prob(theta, r.states[t], r.actions[t]);
    out.push_back(std::move(lp));
  }
  return out;
}

double ppo_objective(const TruncNormalPolicy& policy, std::span<const double> theta,
                     std::span<const Rollout> batch,
                     std::span<const std::vector<double>> old_log_probs,
                     std::span<const std::vector<double>> advantages, double clip_eps,
                     double gamma, std::vector<double>* grad) {
  require(!batch.empty() && batch.size() == advantages.size() &&
              batch.size() == old_log_probs.size(),
          "PPO batch, advantages and old log-probabilities must align");
  if (grad) grad->assign(policy.num_params(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Rollout& r = batch[j];
    double disc = 1.0;
    for (std::size_t t = 0; t < r.length(); ++t, disc *= gamma) {
      const double a_hat = advantages[j][t];
      const double lp = policy.log_prob(theta, r.states[t], r.actions[t]);
      const double ratio = std::exp(lp - old_log_probs[j][t]);
      const double unclipped = ratio * a_hat;
      const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a_hat;
      total += disc * std::min(unclipped, clipped);
      // The clipped arm is flat in theta unless the ratio is inside the band.
      const bool active = unclipped <= clipped ||
                          (ratio >= 1.0 - clip_eps && ratio <= 1.0 + clip_eps);
      if (grad && active && a_hat != 0.0)
        policy.log_prob_grad(theta, r.states[t], r.actions[t], inv_m * disc * a_hat * ratio,
                             *grad);
    }
  }
  return inv_m * total;
}

ValueNetwork::ValueNetwork(const EnvironmentSpec& spec, std::vector<std::size_t> hidden)
    : spec_(spec) {
  std::vector<std::size_t> sizes{spec.state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = Mlp(std::move(sizes));
}

double ValueNetwork::value(std::span<const double> w, const StateVec& s) const {
  return net_.scalar(w, spec_.goal_centered(s).span());
}

double ValueNetwork::value_grad(std::span<const double> w, const StateVec& s, double scale,
                                std::span<double> grad) const {
  Mlp::Cache c;
  net_.forward(w, spec_.goal_centered(s).span(), c);
  const double d[1] = {scale};
  net_.backward(w, c, d, grad);
  return Mlp::output(c)[0];
}

std::vector<double> ValueNetwork::values(std::span<const double> w, const Rollout& r) const {
  std::vector<double> v(r.length());
  for (std::size_t t = 0; t < r.length(); ++t) v[t] = value(w, r.states[t]);
  return v;
}

std::size_t value_td_terms(std::span<const Rollout> batch, std::size_t n_td) noexcept {
  std::size_t n = 0;
  for (const Rollout& r : batch)
    if (r.length() > n_td) n += r.length() - n_td;
  return n;
}

double value_td_loss(const ValueNetwork& critic, std::span<const double> w,
                     std::span<const Rollout> batch, double gamma, std::size_t n_td,
                     std::vector<double>* grad) {
  require(n_td >= 1, "TD order must be positive");
  if (grad) grad->assign(critic.num_params(), 0.0);
  const double gn = std::pow(gamma, static_cast<double>(n_td));
  const Mlp& net = critic.net();
  std::vector<Mlp::Cache> caches;
  std::vector<double> coef;
  double loss = 0.0;
  for (const Rollout& r : batch) {
    const std::size_t len = r.length();
    if (len <= n_td) continue;
    // One forward pass per state; the cotangents of every residual touching
    // V(s_t) are summed into coef[t] and back-propagated once.
    caches.resize(len);
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) {
      net.forward(w, critic.features(r.states[t]).span(), caches[t]);
      v[t] = Mlp::output(caches[t])[0];
    }
    coef.assign(len, 0.0);
    for (std::size_t t = 0; t + n_td < len; ++t) {
      double target = 0.0, disc = 1.0;
      for (std::size_t k = 0; k < n_td; ++k, disc *= gamma) target += disc * r.rewards[t + k];
      const double e = v[t] - target - gn * v[t + n_td];
      loss += e * e;
      coef[t] += 2.0 * e;
      coef[t + n_td] -= 2.0 * e * gn;
    }
    if (!grad) continue;
    for (std::size_t t = 0; t < len; ++t) {
      if (coef[t] == 0.0) continue;
      const double d[1] = {coef[t]};
      net.backward(w, caches[t], d, *grad);
    }
  }
  return loss;
}

}  // namespace calf::baselines
