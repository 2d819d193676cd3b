#include "calf/baselines/mlp.hpp"

#include <cmath>

#include "calf/error.hpp"
#include "calf/simd/kernels.hpp"

namespace calf::baselines {

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("network needs at least input and output sizes");
  for (std::size_t s : sizes_)
    if (s == 0) throw ConfigError("network layer sizes must be positive");
  offsets_.assign(1, 0);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    offsets_.push_back(offsets_.back() + sizes_[l] * sizes_[l + 1] + sizes_[l + 1]);
}

std::vector<double> Mlp::init(CounterRng rng, double out_scale) const {
  std::vector<double> p(num_params(), 0.0);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double r = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const double scale = l + 1 == num_layers() ? out_scale : 1.0;
    const std::size_t n = sizes_[l] * sizes_[l + 1];
    for (std::size_t i = 0; i < n; ++i) p[weight_offset(l) + i] = scale * rng.uniform(-r, r);
  }
  return p;
}

void Mlp::forward(std::span<const double> p, std::span<const double> x, Cache& c) const {
  require(p.size() == num_params(), "parameter vector has the wrong size");
  require(x.size() == input_dim(), "network input has the wrong size");
  c.acts.resize(sizes_.size());
  c.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    auto& y = c.acts[l + 1];
    y.resize(out);
    simd::gemv(p.subspan(weight_offset(l), in * out), c.acts[l], y);
    const double* b = p.data() + bias_offset(l);
    const bool hidden = l + 1 < num_layers();
    for (std::size_t i = 0; i < out; ++i) {
      y[i] += b[i];
      if (hidden) y[i] = std::tanh(y[i]);
    }
  }
}

double Mlp::scalar(std::span<const double> p, std::span<const double> x) const {
  require(output_dim() == 1, "scalar() needs a single-output network");
  Cache c;
  forward(p, x, c);
  return c.acts.back()[0];
}

void Mlp::backward(std::span<const double> p, const Cache& c, std::span<const double> dout,
                   std::span<double> grad) const {
  require(grad.size() == num_params(), "gradient vector has the wrong size");
  require(dout.size() == output_dim(), "output cotangent has the wrong size");
  std::vector<double> delta(dout.begin(), dout.end());
  std::vector<double> prev;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    simd::ger(1.0, delta, c.acts[l], grad.subspan(weight_offset(l), in * out));
    simd::axpy(1.0, delta, grad.subspan(bias_offset(l), out));
    if (l == 0) break;
    prev.assign(in, 0.0);
    simd::gemv_t_acc(p.subspan(weight_offset(l), in * out), delta, prev);
    for (std::size_t i = 0; i < in; ++i) {
      const double a = c.acts[l][i];
      prev[i] *= 1.0 - a * a;
    }
    delta.swap(prev);
  }
}

}  // namespace calf::baselines
