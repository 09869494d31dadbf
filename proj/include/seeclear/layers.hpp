#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "seeclear/rng.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

/// Square-kernel 2D convolution, stride 1, zero "same" padding.
struct Conv2d {
  Tensor weight;              // (out, in, k, k)
  Tensor bias;                // (out)

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t kernel() const { return weight.dim(2); }

  Tensor forward(const Tensor& chw) const;

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero bias.
  static Conv2d seeded(std::size_t in, std::size_t out, std::size_t k, RandomStream& rng, double gain = 1.0);
  static Conv2d zeros(std::size_t in, std::size_t out, std::size_t k);
};

/// Bias-free dense map applied to token rows: (n, in) -> (n, out).
struct Linear {
  Tensor weight;  // (in, out)

  Tensor forward(const Tensor& tokens) const { return matmul(tokens, weight); }
  static Linear seeded(std::size_t in, std::size_t out, RandomStream& rng);
};

/// Channel concatenation of (C_i, H, W) maps.
Tensor concat_channels(std::span<const Tensor> parts);
/// Split channels [first, first+count).
Tensor channel_range(const Tensor& chw, std::size_t first, std::size_t count);

/// Nearest-neighbour resize of a (C,H,W) map.
Tensor resize_nearest(const Tensor& chw, std::size_t h, std::size_t w);
/// Per-pixel normalization across channels: zero mean, unit variance
/// (eps 1e-6). An all-zero map stays zero.
Tensor channel_norm(const Tensor& chw);

/// Average pooling by an integer factor.
Tensor avg_pool(const Tensor& chw, std::size_t factor);

/// Run fn(i) for i in [0, n) on up to `workers` threads. Each index must
/// write only its own output slot; the result is then schedule-independent.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace seeclear
