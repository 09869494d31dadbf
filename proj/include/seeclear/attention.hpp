#pragma once

#include <cstddef>
#include <cstdint>

#include "seeclear/tensor.hpp"

namespace seeclear {

/// Bias-free query/key/value projections for (multi-head) attention.
///
/// w_q is (d_query x d*heads); w_k and w_v are (d_kv x d*heads). Heads are
/// independent slices of width d whose outputs are concatenated.
struct AttentionParams {
  Tensor w_q;
  Tensor w_k;
  Tensor w_v;
  std::size_t d = 0;
  std::size_t heads = 1;

  std::size_t width() const { return d * heads; }
  void validate() const;

  /// Uniform init in [-1/sqrt(d_in), 1/sqrt(d_in)] from a seeded stream.
  static AttentionParams seeded(std::size_t d_query, std::size_t d_kv, std::size_t d, std::size_t heads,
                                std::uint64_t seed);
  /// Identity projections (square, single head).
  static AttentionParams identity(std::size_t dim);
};

/// SoftMax(Q K^T / sqrt(d)) V with Q = queries w_q, K = kv w_k, V = kv w_v.
/// Output shape: rows(queries) x d*heads.
Tensor cross_attention(const Tensor& queries, const Tensor& keys_values, const AttentionParams& params);

Tensor self_attention(const Tensor& tokens, const AttentionParams& params);

/// Joint self-attention over the concatenated tokens of all frames.
/// frames: (m, tokens, d_in) -> (m, tokens, d*heads). No positional encoding.
Tensor multi_frame_self_attention(const Tensor& frames, const AttentionParams& params);

/// Self-attention inside non-overlapping window x window tiles of a
/// (C,H,W) map; non-divisible extents are reflect-padded and cropped.
/// Output is (d*heads, H, W).
Tensor window_self_attention(const Tensor& feat, std::size_t window, const AttentionParams& params);

/// Channels as tokens: Q, K, V are 1x1 projections across channels
/// (params are C x C) and attention runs over the channel axis with
/// spatial positions as the feature dimension.
Tensor channel_self_attention(const Tensor& feat, const AttentionParams& params);

/// Reflect-pad a (C,H,W) map on the bottom/right edges to (C,new_h,new_w).
Tensor reflect_pad(const Tensor& chw, std::size_t new_h, std::size_t new_w);
Tensor crop(const Tensor& chw, std::size_t h, std::size_t w);

}  // namespace seeclear
