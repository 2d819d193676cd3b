#include "calf/critic/critic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "calf/simd/kernels.hpp"

namespace calf::critic {

void KappaBounds::validate() const {
  if (!(c_low > 0.0 && c_low < c_up)) throw ConfigError("kappa bounds need 0 < C_low < C_up");
}

CriticModel::CriticModel(CriticKind kind, std::size_t state_dim, std::size_t action_dim,
                         std::size_t hidden, double eps_reg, double weight_bound)
    : kind_(kind),
      state_dim_(state_dim),
      input_dim_(kind == CriticKind::state_action ? state_dim + action_dim : state_dim),
      hidden_(hidden),
      eps_reg_(eps_reg),
      weight_bound_(weight_bound) {
  if (hidden_ == 0 || hidden_ > kMaxHidden) throw ConfigError("critic hidden width out of range");
  if (input_dim_ > env::kMaxDim) throw ConfigError("critic input dimension too large");
  if (!(eps_reg_ >= 0.0)) throw ConfigError("critic regularizer must be non-negative");
  if (!(weight_bound_ > 0.0)) throw ConfigError("critic weight bound must be positive");
}

ModelInput CriticModel::input(const StateVec& z, const ActionVec* a) const {
  ModelInput x(input_dim_);
  for (std::size_t i = 0; i < state_dim_; ++i) x[i] = z[i];
  if (kind_ == CriticKind::state_action) {
    require(a != nullptr, "state-action critic needs an action");
    for (std::size_t i = state_dim_; i < input_dim_; ++i) x[i] = (*a)[i - state_dim_];
  }
  return x;
}

double CriticModel::z_norm(const ModelInput& x) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < state_dim_; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

double CriticModel::h(std::span<const double> w, const ModelInput& x) const {
  std::array<double, kMaxHidden> act{};
  const std::span<double> a(act.data(), hidden_);
  simd::gemv(w.first(hidden_ * input_dim_), x.span(), a);
  for (double& v : a) v = std::tanh(v);
  return simd::dot(w.subspan(hidden_ * input_dim_, hidden_), a);
}

double CriticModel::lambda(std::span<const double> w, const ModelInput& x) const {
  const double hv = h(w, x);
  const double zn = z_norm(x);
  return hv * hv + eps_reg_ * zn * zn;
}

double CriticModel::value(std::span<const double> w, const ModelInput& x) const {
  const double lam = lambda(w, x);
  return kind_ == CriticKind::state_value ? -lam : lam;
}

double CriticModel::value_grad(std::span<const double> w, const ModelInput& x, double scale,
                               std::span<double> grad) const {
  const std::size_t nw = hidden_ * input_dim_;
  std::array<double, kMaxHidden> act{};
  std::array<double, kMaxHidden> back{};
  const std::span<double> a(act.data(), hidden_);
  simd::gemv(w.first(nw), x.span(), a);
  for (double& v : a) v = std::tanh(v);
  const auto out_w = w.subspan(nw, hidden_);
  const double hv = simd::dot(out_w, a);
  const double zn = z_norm(x);
  const double lam = hv * hv + eps_reg_ * zn * zn;
  const double sgn = kind_ == CriticKind::state_value ? -1.0 : 1.0;

  // d value / d h = sgn * 2h
  const double coef = scale * sgn * 2.0 * hv;
  if (coef != 0.0) {
    for (std::size_t j = 0; j < hidden_; ++j) back[j] = out_w[j] * (1.0 - a[j] * a[j]);
    simd::ger(coef, std::span<const double>(back.data(), hidden_), x.span(), grad.first(nw));
    simd::axpy(coef, a, grad.subspan(nw, hidden_));
  }
  return sgn * lam;
}

void CriticModel::clamp(std::span<double> w) const {
  simd::clamp(w, -weight_bound_, weight_bound_);
}

bool CriticModel::in_box(std::span<const double> w) const noexcept {
  return std::all_of(w.begin(), w.end(),
                     [this](double v) { return v >= -weight_bound_ && v <= weight_bound_; });
}

namespace {

double reward_sign(const CriticModel& m) {
  return m.kind() == CriticKind::state_value ? 1.0 : -1.0;
}

struct Residuals {
  double loss = 0.0;
  std::vector<double> coef;  // d loss / d f(x_i)
};

Residuals residuals(const CriticModel& m, std::span<const double> w, const TdBatch& batch,
                    double gamma, std::size_t n_td) {
  const std::size_t n = batch.transitions();
  require(batch.inputs.size() == n + 1, "td batch needs one more input than rewards");
  require(n_td >= 1 && n >= n_td, "td batch shorter than the TD order");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i) f[i] = m.value(w, batch.inputs[i]);
  const double c_sign = reward_sign(m);
  const double gamma_n = std::pow(gamma, static_cast<double>(n_td));

  Residuals out;
  out.coef.assign(n + 1, 0.0);
  for (std::size_t t = 0; t + n_td <= n; ++t) {
    double ret = 0.0;
    double disc = 1.0;
    for (std::size_t k = 0; k < n_td; ++k) {
      ret += disc * c_sign * batch.rewards[t + k];
      disc *= gamma;
    }
    const double delta = f[t] - ret - gamma_n * f[t + n_td];
    out.loss += delta * delta;
    out.coef[t] += 2.0 * delta;
    out.coef[t + n_td] -= 2.0 * delta * gamma_n;
  }
  return out;
}

}  // namespace

double td_loss(const CriticModel& m, std::span<const double> w, const TdBatch& batch,
               double gamma, std::size_t n_td) {
  return residuals(m, w, batch, gamma, n_td).loss;
}

double td_loss_grad(const CriticModel& m, std::span<const double> w, const TdBatch& batch,
                    double gamma, std::size_t n_td, std::vector<double>& grad) {
  const Residuals r = residuals(m, w, batch, gamma, n_td);
  grad.assign(m.num_weights(), 0.0);
  for (std::size_t i = 0; i < r.coef.size(); ++i)
    if (r.coef[i] != 0.0) m.value_grad(w, batch.inputs[i], r.coef[i], grad);
  return r.loss;
}

void TransitionBuffer::push(const ModelInput& input, double reward, const ModelInput& next_input) {
  if (inputs_.empty()) inputs_.push_back(input);
  inputs_.push_back(next_input);
  rewards_.push_back(reward);
  while (rewards_.size() > capacity_) {
    rewards_.pop_front();
    inputs_.pop_front();
  }
}

void TransitionBuffer::replace_last_input(const ModelInput& input) {
  if (!inputs_.empty()) inputs_.back() = input;
}

TdBatch TransitionBuffer::window() const {
  TdBatch b;
  b.inputs.assign(inputs_.begin(), inputs_.end());
  b.rewards.assign(rewards_.begin(), rewards_.end());
  return b;
}

bool fit_sandwich(const CriticModel& m, const KappaBounds& b, const ModelInput& x0, Weights& w) {
  const std::size_t nw = m.hidden() * m.input_dim();
  const double r = m.z_norm(x0);
  const double reg = m.eps_reg() * r * r;
  const double lo = b.low(r);
  const double up = b.up(r);
  const auto holds = [&] {
    const double lam = m.lambda(w, x0);
    return lo <= lam && lam <= up;
  };
  if (holds()) return true;
  const double h_lo = std::max(lo - reg, 0.0);
  const double h_up = up - reg;
  if (h_up < h_lo || h_up < 0.0) return false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double h0 = m.h(w, x0);
    if (h0 == 0.0) return false;
    double target = h0 * h0 > h_up ? 0.5 * (h_lo + h_up) : std::min(2.0 * h_lo, 0.5 * (h_lo + h_up));
    if (h_lo == 0.0) target = 0.25 * h_up;
    const double s = std::sqrt(target / (h0 * h0));
    for (std::size_t j = 0; j < m.hidden(); ++j) w[nw + j] *= s;
    if (!m.in_box(w)) return false;
    if (holds()) return true;
  }
  return false;
}

Weights initial_weights(const CriticModel& m, const CriticConfig& cfg, const ModelInput& x0,
                        CounterRng rng) {
  cfg.bounds.validate();
  Weights w(m.num_weights());
  const std::size_t nw = m.hidden() * m.input_dim();
  const double a = 1.0 / std::sqrt(static_cast<double>(m.input_dim()));
  for (std::size_t i = 0; i < nw; ++i) w[i] = rng.uniform(-a, a);
  for (std::size_t j = 0; j < m.hidden(); ++j)
    w[nw + j] = cfg.output_init_scale * rng.uniform(-1.0, 1.0);
  m.clamp(w);
  if (cfg.init_lambda_ratio > 0.0) {
    // Place Lambda(x0) at init_lambda_ratio * |z0|^2 by rescaling the output layer.
    const double r = m.z_norm(x0);
    const double h_target = cfg.init_lambda_ratio * r * r - m.eps_reg() * r * r;
    const double h0 = m.h(w, x0);
    if (h_target > 0.0 && h0 != 0.0) {
      const double s = std::sqrt(h_target) / std::fabs(h0);
      for (std::size_t j = 0; j < m.hidden(); ++j) w[nw + j] *= s;
      m.clamp(w);
    }
  }
  if (!fit_sandwich(m, cfg.bounds, x0, w))
    throw ConfigError("no initial critic weights satisfy the kappa sandwich at the initial state");
  return w;
}

void start_epoch(CriticState& c, const CriticModel& m, Weights certified, const StateVec& s0,
                 const ModelInput& x0, std::optional<ActionVec> a0) {
  c.certified = std::move(certified);
  c.anchor_state = s0;
  c.anchor_input = x0;
  c.anchor_action = std::move(a0);
  c.certified_lambda = m.lambda(c.certified, x0);
  c.lambda0 = c.certified_lambda;
  c.acceptances = 0;
  c.ladder.assign(1, m.value(c.certified, x0));
  c.buffer.clear();
}

UpdateOutcome check_candidate(const CriticState& c, const CriticModel& m,
                              std::span<const double> candidate, const ModelInput& x_t) {
  UpdateOutcome out;
  const double lam = m.lambda(candidate, x_t);
  const double r = m.z_norm(x_t);
  out.candidate_value = m.kind() == CriticKind::state_value ? -lam : lam;
  // Lambda = -V (or Q): improvement V - V_dagger >= nu  <=>  Lambda_dagger - Lambda >= nu.
  out.decrease_ok = c.certified_lambda - lam >= c.nu_bar;
  out.sandwich_ok = c.bounds.low(r) <= lam && lam <= c.bounds.up(r);
  // Each acceptance lowers Lambda_dagger by >= nu from lambda0, so at most
  // max{(lambda0 - nu)/nu, 0} of them fit in one epoch; the rare extra one that
  // would only be possible with Lambda_dagger < nu is refused.
  out.budget_ok =
      static_cast<double>(c.acceptances + 1) <= std::max((c.lambda0 - c.nu_bar) / c.nu_bar, 0.0);
  out.accepted = out.decrease_ok && out.sandwich_ok && out.budget_ok && std::isfinite(lam);
  return out;
}

const Weights& learn_step(CriticState& c, const CriticModel& m, const CriticConfig& cfg,
                          const TdBatch& batch) {
  Weights& w = c.live;
  if (batch.transitions() >= cfg.n_td && batch.transitions() > 0) {
    std::vector<double> grad;
    for (std::size_t k = 0; k < cfg.grad_steps; ++k) {
      td_loss_grad(m, w, batch, cfg.gamma, cfg.n_td, grad);
      double scale = cfg.learning_rate;
      if (cfg.max_grad_norm > 0.0) {
        const double gn = std::sqrt(simd::dot(grad, grad));
        if (gn > cfg.max_grad_norm) scale *= cfg.max_grad_norm / gn;
      }
      if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }))
        break;
      simd::axpy(-scale, grad, w);
      m.clamp(w);
    }
  }
  return w;
}

UpdateOutcome try_critic_update(CriticState& c, const CriticModel& m, const CriticConfig& cfg,
                                const StateVec& s_t, const ModelInput& x_t, const TdBatch& batch,
                                std::optional<ActionVec> a_t) {
  Weights w = learn_step(c, m, cfg, batch);
  UpdateOutcome out = check_candidate(c, m, w, x_t);
  if (out.accepted) {
    c.certified = std::move(w);
    c.anchor_state = s_t;
    c.anchor_input = x_t;
    c.anchor_action = std::move(a_t);
    c.certified_lambda = m.lambda(c.certified, x_t);
    ++c.acceptances;
    c.ladder.push_back(out.candidate_value);
  }
  return out;
}

}  // namespace calf::critic
