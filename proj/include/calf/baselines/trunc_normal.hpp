#pragma once

// Standard normal helpers and a one-dimensional truncated normal.
// Sampling is by inverse CDF, working in whichever tail keeps the argument of
// the quantile below 1/2 so that far-tail truncation keeps its precision.

namespace calf::baselines {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x) noexcept;
/// Inverse of normal_cdf on (0, 1): rational approximation plus one Halley step.
double normal_quantile(double p);

struct TruncatedNormal {
  double mu;
  double sigma;
  double lo;
  double hi;

  /// Phi(beta) - Phi(alpha), alpha = (lo - mu)/sigma, beta = (hi - mu)/sigma.
  double mass() const noexcept;
  double log_pdf(double x) const noexcept;
  /// d log_pdf(x) / d mu.
  double dlog_pdf_dmu(double x) const noexcept;
  double mean() const noexcept;
  /// Maps u in [0, 1) to a draw in [lo, hi].
  double sample(double u) const;
};

}  // namespace calf::baselines
