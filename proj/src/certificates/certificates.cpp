#include "calf/certificates/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "calf/error.hpp"

namespace calf::cert {

double update_budget(double lambda_dagger_0, double nu_bar) {
  require(nu_bar > 0.0, "nu_bar must be positive");
  return std::max((lambda_dagger_0 - nu_bar) / nu_bar, 0.0);
}

double hoeffding_lower_bound(const ReachingStats& s) {
  require(s.n_runs >= 1, "need at least one run");
  require(s.n_reached >= 0 && s.n_reached <= s.n_runs, "reached count out of range");
  require(s.delta > 0.0 && s.delta <= 1.0, "delta must lie in (0, 1]");
  const double n = static_cast<double>(s.n_runs);
  const double frac = static_cast<double>(s.n_reached) / n;
  return std::max(0.0, frac - std::sqrt(std::log(1.0 / s.delta) / (2.0 * n)));
}

double q_pochhammer(double c, double q) {
  require(c >= 0.0 && c < 1.0 && q >= 0.0 && q < 1.0, "q_pochhammer needs c, q in [0, 1)");
  double prod = 1.0;
  double term = c;  // c q^i
  while (true) {
    const double factor = 1.0 - term;
    if (factor > 1.0 - 1e-16) break;
    prod *= factor;
    term *= q;
  }
  return prod;
}

double reaching_probability_bound(double eta, double relax_factor, long t_relax) {
  require(eta >= 0.0 && eta < 1.0, "eta must lie in [0, 1)");
  require(t_relax >= 0, "T_relax must be non-negative");
  // relax_factor^0 = 1 makes the leading factor (1 - 1) vanish.
  if (t_relax == 0) return 0.0;
  return (1.0 - eta) * q_pochhammer(std::pow(relax_factor, static_cast<double>(t_relax)),
                                    relax_factor);
}

namespace {

double tightest_c(double lambda, std::span<const std::vector<double>> trajs) {
  double c = 0.0;
  for (const auto& d : trajs) {
    if (d.empty() || !(d[0] > 0.0)) continue;
    for (std::size_t t = 0; t < d.size(); ++t)
      c = std::max(c, d[t] * std::exp(lambda * static_cast<double>(t)) / d[0]);
  }
  return c;
}

bool covers(double c, double lambda, std::span<const std::vector<double>> trajs) {
  for (const auto& d : trajs) {
    if (d.empty() || !(d[0] > 0.0)) continue;
    for (std::size_t t = 0; t < d.size(); ++t)
      if (!(d[t] <= c * d[0] * std::exp(-lambda * static_cast<double>(t)))) return false;
  }
  return true;
}

}  // namespace

ExpEnvelope fit_exp_envelope(std::span<const std::vector<double>> trajectories,
                             const EnvelopeOptions& opts) {
  require(!trajectories.empty(), "need at least one trajectory");
  require(opts.grid_size >= 2 && opts.lambda_min > 0.0 && opts.lambda_max > opts.lambda_min,
          "bad envelope grid");
  ExpEnvelope out;
  for (const auto& d : trajectories)
    if (d.empty() || !(d[0] > 0.0)) ++out.skipped;

  const double log_lo = std::log(opts.lambda_min);
  const double log_hi = std::log(opts.lambda_max);
  std::vector<double> grid(opts.grid_size);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                    static_cast<double>(grid.size() - 1));
  grid.front() = opts.lambda_min;
  grid.back() = opts.lambda_max;

  out.lambda = grid.front();
  out.C = tightest_c(grid.front(), trajectories);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    const double c = tightest_c(*it, trajectories);
    if (c <= opts.c_cap) {
      out.lambda = *it;
      out.C = c;
      break;
    }
  }
  // The replay check recomputes the bound in a different order; nudge C up
  // until rounding can no longer break coverage.
  while (!covers(out.C, out.lambda, trajectories))
    out.C = std::nextafter(out.C, std::numeric_limits<double>::infinity());
  return out;
}

bool envelope_covers(const ExpEnvelope& env, std::span<const std::vector<double>> trajectories) {
  return covers(env.C, env.lambda, trajectories);
}

}  // namespace calf::cert
