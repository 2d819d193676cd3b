#pragma once

// Constrained critic: a squared-output network with a quadratic regularizer,
// the temporal-difference loss, and the "try critic update" acceptance test.
//
// Both critic flavours are handled in cost form Lambda >= 0:
//   state critic         V(s)   = -Lambda(z),   Lambda = h_w(z)^2 + eps * |z|^2
//   state-action critic  Q(s,a) = +Lambda(z,a), Lambda = h_w(z,a)^2 + eps * |z|^2
// with z the goal-centered state. h_w(x) = v . tanh(W x) has no biases, so
// Lambda vanishes at the goal center.

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "calf/env/core.hpp"
#include "calf/rng.hpp"

namespace calf::critic {

using env::ActionVec;
using env::StateVec;

struct InputTag;
/// Network input: goal-centered state, optionally followed by the action.
using ModelInput = env::FixedVec<InputTag>;

using Weights = std::vector<double>;

struct KappaBounds {
  double c_low = 1e-3;
  double c_up = 1e3;

  double low(double x) const noexcept { return c_low * x * x; }
  double up(double x) const noexcept { return c_up * x * x; }
  void validate() const;
};

enum class CriticKind { state_value, state_action };

class CriticModel {
 public:
  static constexpr std::size_t kMaxHidden = 64;

  CriticModel(CriticKind kind, std::size_t state_dim, std::size_t action_dim,
              std::size_t hidden = 16, double eps_reg = 1e-3, double weight_bound = 100.0);

  CriticKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t hidden() const noexcept { return hidden_; }
  double eps_reg() const noexcept { return eps_reg_; }
  double weight_bound() const noexcept { return weight_bound_; }
  std::size_t num_weights() const noexcept { return hidden_ * input_dim_ + hidden_; }

  /// Builds the network input from a goal-centered state (and action for Q).
  ModelInput input(const StateVec& z, const ActionVec* a = nullptr) const;

  double h(std::span<const double> w, const ModelInput& x) const;
  /// Cost-form value Lambda >= 0.
  double lambda(std::span<const double> w, const ModelInput& x) const;
  /// Signed critic output: V = -Lambda for the state critic, Q = Lambda otherwise.
  double value(std::span<const double> w, const ModelInput& x) const;
  /// Returns value(w, x) and adds scale * d value / d w into grad.
  double value_grad(std::span<const double> w, const ModelInput& x, double scale,
                    std::span<double> grad) const;

  double z_norm(const ModelInput& x) const noexcept;
  void clamp(std::span<double> w) const;
  bool in_box(std::span<const double> w) const noexcept;

 private:
  CriticKind kind_;
  std::size_t state_dim_;
  std::size_t input_dim_;
  std::size_t hidden_;
  double eps_reg_;
  double weight_bound_;
};

/// Contiguous transition window: inputs[t] for t = 0..n, rewards[t] for t = 0..n-1.
struct TdBatch {
  std::vector<ModelInput> inputs;
  std::vector<double> rewards;

  std::size_t transitions() const noexcept { return rewards.size(); }
};

/// Sum over t = 0..n-N of (f(x_t) - sum_{k<N} gamma^k c_{t+k} - gamma^N f(x_{t+N}))^2, where
/// f is the signed critic output and c = r for the state critic, c = -r for the
/// cost-form state-action critic. Requires n >= N.
double td_loss(const CriticModel& m, std::span<const double> w, const TdBatch& batch,
               double gamma, std::size_t n_td);
/// td_loss with its full gradient written to grad (resized as needed).
double td_loss_grad(const CriticModel& m, std::span<const double> w, const TdBatch& batch,
                    double gamma, std::size_t n_td, std::vector<double>& grad);

struct CriticConfig {
  std::size_t hidden = 16;
  double eps_reg = 1e-3;
  double weight_bound = 100.0;
  /// Minimum certified improvement; <= 0 means 1e-3 * dt.
  double nu_bar = 0.0;
  KappaBounds bounds{};
  std::size_t grad_steps = 1;
  double learning_rate = 1e-2;
  /// Gradient L2-norm cap per step; 0 disables.
  double max_grad_norm = 0.0;
  double gamma = 1.0;
  std::size_t n_td = 1;
  std::size_t batch_size = 3;
  /// Scale of the initial output-layer weights before the sandwich fit.
  double output_init_scale = 1e-2;
  /// When > 0, w0 is rescaled so that Lambda(x0) = init_lambda_ratio * |z0|^2.
  double init_lambda_ratio = 0.0;
};

class TransitionBuffer {
 public:
  explicit TransitionBuffer(std::size_t capacity = 1) : capacity_(capacity) {}

  void clear() { inputs_.clear(); rewards_.clear(); }
  /// Appends a transition ending at next_input. The first push needs the start input.
  void push(const ModelInput& input, double reward, const ModelInput& next_input);
  /// Replaces the input ending the newest transition.
  void replace_last_input(const ModelInput& input);
  std::size_t size() const noexcept { return rewards_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  TdBatch window() const;

 private:
  std::size_t capacity_;
  std::deque<ModelInput> inputs_;
  std::deque<double> rewards_;
};

struct CriticState {
  Weights live;
  Weights certified;
  StateVec anchor_state;
  std::optional<ActionVec> anchor_action;
  ModelInput anchor_input;
  double nu_bar = 0.0;
  KappaBounds bounds{};
  TransitionBuffer buffer;

  // Certification-epoch bookkeeping.
  double certified_lambda = 0.0;  // Lambda^{w_dagger}(x_dagger)
  double lambda0 = 0.0;           // certified_lambda at epoch start
  long acceptances = 0;
  std::vector<double> ladder;     // certified signed values, epoch start first
};

/// Draws w0 and rescales the output layer until the sandwich holds at x0.
/// Throws ConfigError when the bounds make that impossible.
Weights initial_weights(const CriticModel& m, const CriticConfig& cfg, const ModelInput& x0,
                        CounterRng rng);

/// Fits the output-layer scale of w so the sandwich holds at x0; returns false if impossible.
bool fit_sandwich(const CriticModel& m, const KappaBounds& b, const ModelInput& x0, Weights& w);

/// Resets the certification epoch with anchor (s0, a0) and certified weights w.
void start_epoch(CriticState& c, const CriticModel& m, Weights certified, const StateVec& s0,
                 const ModelInput& x0, std::optional<ActionVec> a0 = std::nullopt);

struct UpdateOutcome {
  bool accepted = false;
  double candidate_value = 0.0;  // signed critic output of w* at x_t
  bool decrease_ok = false;
  bool sandwich_ok = false;
  bool budget_ok = false;
};

/// Acceptance test of a given candidate w* at x_t (no learning).
UpdateOutcome check_candidate(const CriticState& c, const CriticModel& m,
                              std::span<const double> candidate, const ModelInput& x_t);

/// K clamped gradient steps on td_loss from c.live; c.live <- result. Returns it.
const Weights& learn_step(CriticState& c, const CriticModel& m, const CriticConfig& cfg,
                          const TdBatch& batch);

/// K clamped gradient steps on td_loss from c.live give w*; accept iff the
/// improvement and sandwich constraints hold at x_t. On acceptance w_dagger and
/// the anchor move to (w*, s_t[, a_t]). c.live <- w* in both branches.
UpdateOutcome try_critic_update(CriticState& c, const CriticModel& m, const CriticConfig& cfg,
                                const StateVec& s_t, const ModelInput& x_t, const TdBatch& batch,
                                std::optional<ActionVec> a_t = std::nullopt);

}  // namespace calf::critic
