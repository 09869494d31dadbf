#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seeclear/attention.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

/// Which axis of O_c C_j the memory softmax normalizes.
enum class SoftmaxAxis {
  kMemory,  // over memory channels: A_j T_j is a convex mix of texture rows
  kToken,   // over clip tokens (ablation)
};

struct CategoryConfig {
  std::size_t groups = 4;         // J
  std::size_t channel_dim = 32;   // width of clip tokens; also memory channel count
  std::size_t texture_dim = 16;   // width of texture rows (= decoder feature channels)
  SoftmaxAxis axis = SoftmaxAxis::kMemory;
};

/// One semantic/texture pair. semantics is (channel_dim x channel_dim):
/// rows meet the clip tokens' channels, columns index memory channels.
/// textures is (channel_dim x texture_dim), one texture row per memory
/// channel.
struct MemoryGroup {
  Tensor semantics;
  Tensor textures;

  bool operator==(const MemoryGroup&) const = default;
};

struct MemoryBank {
  std::vector<MemoryGroup> groups;
  std::size_t updates = 0;

  static MemoryBank zeros(const CategoryConfig& cfg);
  bool operator==(const MemoryBank&) const = default;
};

struct CategoryGroupWeights {
  AttentionParams gather;       // texture rows attend to pooled features
  AttentionParams refine;       // self-attention over texture rows
  Tensor semantic_refresh;      // texture_dim x channel_dim
};

struct CategoryWeights {
  std::vector<CategoryGroupWeights> groups;
  AttentionParams read;  // decoder features attend to A_j T_j

  static CategoryWeights seeded(const CategoryConfig& cfg, std::uint64_t seed);
};

/// A_j = softmax(O_c C_j) along the configured axis; (k x channel_dim).
Tensor memory_affinity(const Tensor& clip_tokens, const MemoryGroup& group, SoftmaxAxis axis);

/// Fold one clip's multi-scale decoder features into the bank.
///
/// multiscale: exactly 4 entries, each (m, texture_dim, H_l, W_l). Scales
/// are average-pooled to the coarsest grid and concatenated as tokens.
/// Per group: T^ = C T; R = CA(T^, feats); T = LN(T^ + R + SA(T^ + R));
/// C = LN(C + R W_refresh). Returns the updated bank with updates + 1.
MemoryBank build_or_update(const MemoryBank& bank, std::span<const Tensor> multiscale, const CategoryWeights& weights);

/// F~ = CA(F, stack_j A_j T_j) + F for feature tokens F (N x texture_dim).
Tensor query(const Tensor& clip_tokens, const MemoryBank& bank, const Tensor& feature_tokens,
             const CategoryWeights& weights, SoftmaxAxis axis = SoftmaxAxis::kMemory);

/// Zero-mean, unit-variance rows; all-zero rows stay zero.
Tensor layer_norm_rows(const Tensor& m);

}  // namespace seeclear
