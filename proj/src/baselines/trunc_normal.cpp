#include "calf/baselines/trunc_normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calf/error.hpp"

namespace calf::baselines {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile needs p in (0, 1)");
  // Acklam's rational approximation, relative error ~1e-9 before refinement.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the erfc-based CDF.
  const double e = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double TruncatedNormal::mass() const noexcept {
  const double alpha = (lo - mu) / sigma;
  const double beta = (hi - mu) / sigma;
  if (beta <= 0.0) return normal_cdf(beta) - normal_cdf(alpha);
  if (alpha >= 0.0) return normal_sf(alpha) - normal_sf(beta);
  return 1.0 - normal_cdf(alpha) - normal_sf(beta);
}

double TruncatedNormal::log_pdf(double x) const noexcept {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi) -
         std::log(mass());
}

double TruncatedNormal::dlog_pdf_dmu(double x) const noexcept {
  const double alpha = (lo - mu) / sigma;
  const double beta = (hi - mu) / sigma;
  return (x - mu) / (sigma * sigma) + (normal_pdf(beta) - normal_pdf(alpha)) / (sigma * mass());
}

double TruncatedNormal::mean() const noexcept {
  const double alpha = (lo - mu) / sigma;
  const double beta = (hi - mu) / sigma;
  return mu + sigma * (normal_pdf(alpha) - normal_pdf(beta)) / mass();
}

double TruncatedNormal::sample(double u) const {
  const double alpha = (lo - mu) / sigma;
  const double beta = (hi - mu) / sigma;
  const double z_mass = mass();
  const double below = normal_cdf(alpha);  // mass left of the box
  const double above = normal_sf(beta);    // mass right of the box
  const double p = below + u * z_mass;
  double z;
  if (p < 0.5) {
    z = p > 0.0 ? normal_quantile(p) : alpha;
  } else {
    const double q = above + (1.0 - u) * z_mass;
    z = q > 0.0 ? -normal_quantile(q) : beta;
  }
  return std::clamp(mu + sigma * z, lo, hi);
}

}  // namespace calf::baselines
