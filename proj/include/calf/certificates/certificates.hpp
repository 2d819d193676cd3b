#pragma once

// Post-hoc certificates computed from episode logs: critic-update budget,
// Hoeffding lower confidence bound on the goal-reaching probability, the
// q-Pochhammer reaching bound, and exponential envelope fitting.

#include <cstddef>
#include <span>
#include <vector>

namespace calf::cert {

/// max{(lambda0 - nu)/nu, 0}. Throws ContractViolation for nu <= 0.
double update_budget(double lambda_dagger_0, double nu_bar);

struct ReachingStats {
  long n_runs = 0;
  long n_reached = 0;
  double delta = 0.05;  // confidence parameter
};

/// max(0, reached/n - sqrt(ln(1/delta) / (2n))).
double hoeffding_lower_bound(const ReachingStats& stats);

/// prod_{i>=0} (1 - c q^i), stopping once a factor exceeds 1 - 1e-16.
double q_pochhammer(double c, double q);

/// (1 - eta) * (relax_factor^T_relax ; relax_factor)_inf.
double reaching_probability_bound(double eta, double relax_factor, long t_relax);

struct ExpEnvelope {
  double C = 0.0;
  double lambda = 0.0;  // decay per step
  long skipped = 0;     // trajectories with zero initial distance
};

struct EnvelopeOptions {
  double c_cap = 100.0;
  std::size_t grid_size = 64;
  double lambda_min = 1e-4;
  double lambda_max = 1.0;
};

/// Largest grid lambda whose tightest C (max over points of d_t e^{lambda t} / d_0)
/// stays <= c_cap; the smallest grid lambda if none does.
ExpEnvelope fit_exp_envelope(std::span<const std::vector<double>> trajectories,
                             const EnvelopeOptions& opts = {});

/// True iff d_t <= C d_0 e^{-lambda t} at every point of every non-skipped trajectory.
bool envelope_covers(const ExpEnvelope& env, std::span<const std::vector<double>> trajectories);

}  // namespace calf::cert
