#pragma once

#include <cstddef>

#include "seeclear/attention.hpp"
#include "seeclear/layers.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

/// Per-pixel scale and bias, each (C,H,W).
struct ModulationPair {
  Tensor gamma;
  Tensor beta;
};

/// conv -> ReLU -> conv over segmentation features; the second conv emits
/// 2C channels split into (gamma, beta).
struct ModulationNet {
  Conv2d first;
  Conv2d second;

  std::size_t feature_channels() const { return second.out_channels() / 2; }
  static ModulationNet seeded(std::size_t seg_dim, std::size_t channels, RandomStream& rng);
};

/// Segmentation features are nearest-resized to (height, width) first.
ModulationPair modulation_pairs(const Tensor& seg, const ModulationNet& net, std::size_t height, std::size_t width);

/// (f * gamma + beta) + f.
Tensor modulate(const Tensor& f, const ModulationPair& pair);

/// Cross-attention from every pixel of a (C,H,W) map to the semantic
/// tokens; returns (d*heads, H, W) without residual.
Tensor embed_semantics(const Tensor& features, const Tensor& tokens, const AttentionParams& params);

/// One-layer instance encoder (self-attention + residual over all frames'
/// tokens) and one-layer decoder (initializer tokens cross-attend).
struct ClipTokenCoder {
  AttentionParams encoder;
  AttentionParams decoder;

  static ClipTokenCoder seeded(std::size_t token_dim, std::uint64_t seed);
  static ClipTokenCoder identity(std::size_t token_dim);
};

/// per_frame_tokens: (m, k, d); init: (k, d). Returns clip tokens (k, d).
Tensor clip_tokens(const Tensor& per_frame_tokens, const Tensor& init, const ClipTokenCoder& coder);

enum class GateMode { kRowMax, kMean };

/// Per-pixel activation from the similarity of each pixel feature with
/// the clip tokens: max (or mean) over tokens of F O_c^T. tokens: (N, c),
/// clip: (k, c). Returns N values.
std::vector<double> semantic_gate(const Tensor& tokens, const Tensor& clip, GateMode mode);

/// Gate every frame's features by their semantic activation, then run
/// multi-frame self-attention over the whole clip.
/// features: (m, N, c); clip: (k, c). Returns (m, N, d*heads).
Tensor align(const Tensor& clip, const Tensor& features, const AttentionParams& mfsa, GateMode mode);

/// align() over a clip of (C,H,W) maps, with multi-frame attention done per
/// spatial window (tokens of the same window across all frames attend
/// jointly). A window covering the whole map is the unwindowed case.
std::vector<Tensor> align_windows(const Tensor& clip, std::span<const Tensor> frames, std::size_t window,
                                  const AttentionParams& mfsa, GateMode mode);

}  // namespace seeclear
