#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "seeclear/attention.hpp"
#include "seeclear/category.hpp"
#include "seeclear/diffusion.hpp"
#include "seeclear/incam.hpp"
#include "seeclear/layers.hpp"
#include "seeclear/schedule.hpp"
#include "seeclear/semantics.hpp"
#include "seeclear/spectral.hpp"

namespace seeclear {

struct CondenserConfig {
  std::size_t channels = 16;      // base feature width, every level
  std::size_t token_dim = 32;     // d
  std::size_t seg_dim = 16;       // d_p
  std::size_t topk = 8;
  std::size_t groups = 4;         // CaTeGory J
  std::size_t window = 4;         // window self-attention
  std::size_t mfsa_window = 8;    // spatial window of multi-frame attention
  std::size_t clip_length = 5;    // m
  std::size_t upscale = 4;        // s
  std::size_t dwt_levels = 2;     // k, s = 2^k
  std::size_t encoder_depth = 4;
  std::size_t middle_blocks = 3;
  std::size_t decoder_depth = 4;
  std::size_t distill_stride = 8;
  double head_gain = 0.1;
  double time_gain = 1.0;
  GateMode gate = GateMode::kRowMax;
  SoftmaxAxis memory_axis = SoftmaxAxis::kMemory;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  CategoryConfig category() const;
  /// Channels of the packed network state: 3 * 4^k.
  std::size_t state_channels() const;
};

/// x + conv_b(relu(conv_a(x) * (1 + time_gain * eta_t))). Zero in, zero out.
struct ResBlock {
  Conv2d a;
  Conv2d b;
  Tensor forward(const Tensor& x, double eta, double time_gain) const;
};

/// Residual block, window attention, residual block, channel attention.
struct Stage {
  ResBlock first;
  AttentionParams wsa;
  ResBlock second;
  AttentionParams csa;
};

struct EncoderLevel {
  Conv2d input;    // level 1: LR + packed state; deeper levels: packed LR pyramid
  Stage stage;
};

struct MiddleBlock {
  ModulationNet modulation;
  AttentionParams semantic;  // pixels -> O_i
  AttentionParams mfsa;
  ResBlock res;
};

struct DecoderLevel {
  ModulationNet modulation;
  AttentionParams semantic;  // pixels -> O_c
  AttentionParams mfsa;
  Stage stage;
};

struct CondenserWeights {
  std::vector<EncoderLevel> encoder;
  std::vector<MiddleBlock> middle;
  std::vector<DecoderLevel> decoder;
  Linear gate_projection;   // token_dim -> channels
  ClipTokenCoder tokens;
  Tensor init_tokens;       // topk x token_dim
  CategoryWeights memory;
  Conv2d head;

  static CondenserWeights seeded(const CondenserConfig& cfg, std::uint64_t seed);
  /// Every parameter zero (the init tokens stay seeded).
  static CondenserWeights zeros(const CondenserConfig& cfg, std::uint64_t seed);

  /// Flat, fixed-order view of every parameter tensor.
  std::vector<Tensor*> parameters();
};

/// High-frequency bands saved by the encoder, finest first.
struct SkipStack {
  std::vector<std::vector<WaveletBands>> levels;  // [level][frame]

  std::size_t size() const { return levels.size(); }
  std::vector<WaveletBands> pop();
};

struct EncodeResult {
  std::vector<Tensor> features;  // per frame, at the coarsest level
  SkipStack skips;
};

struct DecodeResult {
  std::vector<Tensor> residual;          // per frame, (3, s*h, s*w)
  std::vector<Tensor> level_features;    // 4 entries, each (m, c, H_l, W_l)
};

class PixelCondenser {
 public:
  PixelCondenser(CondenserConfig cfg, CondenserWeights weights, std::uint64_t semantic_seed = 0,
                 Vocabulary vocab = Vocabulary::defaults());

  const CondenserConfig& config() const { return cfg_; }
  const CondenserWeights& weights() const { return weights_; }
  CondenserWeights& weights() { return weights_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  /// Per-frame tokens and segmentation features of the LR clip, plus O_c.
  SemanticSet prepare_semantics(std::span<const Tensor> lr_frames, std::size_t workers = 1) const;

  /// lr_frames: (3, h, w); states: packed noisy state, (3*4^k, h, w).
  EncodeResult encode(std::span<const Tensor> lr_frames, std::span<const Tensor> states, double eta,
                      std::size_t workers = 1) const;
  std::vector<Tensor> middle(std::vector<Tensor> features, const SemanticSet& sem, double eta,
                             std::size_t workers = 1) const;
  DecodeResult decode(std::vector<Tensor> features, SkipStack skips, const MemoryBank& bank, const SemanticSet& sem,
                      double eta, std::size_t workers = 1) const;

  /// Residual of every frame for the packed states at noise level eta.
  DecodeResult forward(std::span<const Tensor> lr_frames, std::span<const Tensor> states, const MemoryBank& bank,
                       const SemanticSet& sem, double eta, std::size_t workers = 1) const;

 private:
  CondenserConfig cfg_;
  CondenserWeights weights_;
  std::uint64_t semantic_seed_;
  Vocabulary vocab_;
};

struct GenerateOptions {
  std::size_t workers = 1;
  /// Replaces the network with the oracle denoiser built from these HR
  /// frames (m, 3, H, W). The bank is left untouched in this mode.
  std::optional<Tensor> oracle_hr;
};

struct ClipResult {
  Tensor sr;                      // (m, 3, s*h, s*w)
  Tensor upsampled;               // bicubic anchor, same shape
  std::size_t network_calls = 0;
  std::size_t bank_updates = 0;
};

/// Bicubic-upsample every frame of an (m, C, h, w) clip by `scale`.
Tensor upsample_clip(const Tensor& lr_clip, std::size_t scale, std::size_t workers = 1);

/// Reverse-sample one clip: the DCT-domain chain anchored on the bicubic
/// upsampling, with the network (or an oracle) as the u_0 estimator. The
/// bank is updated once, after the last step.
ClipResult generate_clip(const Tensor& lr_clip, const DiffusionSchedule& sched, const PixelCondenser& net,
                         MemoryBank& bank, std::uint64_t seed, std::uint32_t clip_index,
                         const GenerateOptions& opts = {});

}  // namespace seeclear
