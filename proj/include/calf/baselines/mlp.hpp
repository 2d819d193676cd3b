#pragma once

// Fully connected tanh network with a linear output layer and hand-written
// backprop. Parameters live in one flat vector; per layer the weight matrix
// (out x in, row-major) is followed by its bias.

#include <cstddef>
#include <span>
#include <vector>

#include "calf/rng.hpp"

namespace calf::baselines {

class Mlp {
 public:
  struct Cache {
    // acts[0] is the input, acts[l] the output of layer l (tanh except the last).
    std::vector<std::vector<double>> acts;
  };

  Mlp() = default;
  /// sizes = {input, hidden..., output}.
  explicit Mlp(std::vector<std::size_t> sizes);

  std::size_t input_dim() const noexcept { return sizes_.front(); }
  std::size_t output_dim() const noexcept { return sizes_.back(); }
  std::size_t num_layers() const noexcept { return sizes_.size() - 1; }
  std::size_t num_params() const noexcept { return offsets_.back(); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  /// Uniform(+-1/sqrt(fan_in)) weights, zero biases; the last layer is scaled by out_scale.
  std::vector<double> init(CounterRng rng, double out_scale = 1.0) const;

  void forward(std::span<const double> p, std::span<const double> x, Cache& c) const;
  static std::span<const double> output(const Cache& c) { return c.acts.back(); }
  /// Convenience for single-output networks.
  double scalar(std::span<const double> p, std::span<const double> x) const;

  /// grad += d(output . dout) / dp, using the activations of the matching forward().
  void backward(std::span<const double> p, const Cache& c, std::span<const double> dout,
                std::span<double> grad) const;

 private:
  std::size_t weight_offset(std::size_t l) const noexcept { return offsets_[l]; }
  std::size_t bias_offset(std::size_t l) const noexcept {
    return offsets_[l] + sizes_[l] * sizes_[l + 1];
  }

  std::vector<std::size_t> sizes_{1, 1};
  std::vector<std::size_t> offsets_{0, 2};
};

}  // namespace calf::baselines
