#include "seeclear/condenser.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "seeclear/resample.hpp"

namespace seeclear {

namespace {

AttentionParams zero_attention(std::size_t d_query, std::size_t d_kv, std::size_t d) {
  return AttentionParams{Tensor({d_query, d}), Tensor({d_kv, d}), Tensor({d_kv, d}), d, 1};
}

// Hands out either seeded or all-zero parameters from one stream.
struct Factory {
  bool zero;
  RandomStream rng;

  Conv2d conv(std::size_t in, std::size_t out, std::size_t k, double gain = 1.0) {
    return zero ? Conv2d::zeros(in, out, k) : Conv2d::seeded(in, out, k, rng, gain);
  }
  AttentionParams attention(std::size_t d_query, std::size_t d_kv, std::size_t d) {
    return zero ? zero_attention(d_query, d_kv, d) : AttentionParams::seeded(d_query, d_kv, d, 1, rng.next_u64());
  }
  ResBlock res(std::size_t c) { return {conv(c, c, 3), conv(c, c, 3, 0.5)}; }
  Stage stage(std::size_t c) { return {res(c), attention(c, c, c), res(c), attention(c, c, c)}; }
  ModulationNet modulation(std::size_t seg_dim, std::size_t c) {
    if (zero) return {Conv2d::zeros(seg_dim, c, 3), Conv2d::zeros(c, 2 * c, 3)};
    return ModulationNet::seeded(seg_dim, c, rng);
  }
};

CondenserWeights build_weights(const CondenserConfig& cfg, std::uint64_t seed, bool zero) {
  cfg.validate();
  Factory f{zero, RandomStream(seed, 0xC0DE)};
  const std::size_t c = cfg.channels, d = cfg.token_dim;
  CondenserWeights w;
  for (std::size_t level = 0; level < cfg.encoder_depth; ++level) {
    const std::size_t in = level == 0 ? 3 + cfg.state_channels() : 12;
    w.encoder.push_back({f.conv(in, c, 3), f.stage(c)});
  }
  for (std::size_t j = 0; j < cfg.middle_blocks; ++j) {
    w.middle.push_back({f.modulation(cfg.seg_dim, c), f.attention(c, d, c), f.attention(c, c, c), f.res(c)});
  }
  for (std::size_t level = 0; level < cfg.decoder_depth; ++level) {
    w.decoder.push_back({f.modulation(cfg.seg_dim, c), f.attention(c, d, c), f.attention(c, c, c), f.stage(c)});
  }
  w.gate_projection = zero ? Linear{Tensor({d, c})} : Linear::seeded(d, c, f.rng);
  w.tokens = zero ? ClipTokenCoder{zero_attention(d, d, d), zero_attention(d, d, d)}
                  : ClipTokenCoder::seeded(d, f.rng.next_u64());
  w.init_tokens = seeded_init_tokens(cfg.topk, d, seed);
  if (zero) {
    const auto cat = cfg.category();
    for (std::size_t j = 0; j < cat.groups; ++j) {
      w.memory.groups.push_back({zero_attention(c, c, c), zero_attention(c, c, c), Tensor({c, d})});
    }
    w.memory.read = zero_attention(c, c, c);
  } else {
    w.memory = CategoryWeights::seeded(cfg.category(), f.rng.next_u64());
  }
  w.head = f.conv(c, cfg.state_channels(), 3, cfg.head_gain);
  return w;
}

void push(std::vector<Tensor*>& out, Conv2d& c) {
  out.push_back(&c.weight);
  out.push_back(&c.bias);
}
void push(std::vector<Tensor*>& out, AttentionParams& a) {
  out.push_back(&a.w_q);
  out.push_back(&a.w_k);
  out.push_back(&a.w_v);
}
void push(std::vector<Tensor*>& out, ResBlock& r) {
  push(out, r.a);
  push(out, r.b);
}
void push(std::vector<Tensor*>& out, Stage& s) {
  push(out, s.first);
  push(out, s.wsa);
  push(out, s.second);
  push(out, s.csa);
}
void push(std::vector<Tensor*>& out, ModulationNet& m) {
  push(out, m.first);
  push(out, m.second);
}

Tensor run_stage(const Stage& s, const Tensor& x, double eta, const CondenserConfig& cfg) {
  Tensor f = s.first.forward(x, eta, cfg.time_gain);
  add_inplace(f, window_self_attention(channel_norm(f), cfg.window, s.wsa));
  f = s.second.forward(f, eta, cfg.time_gain);
  add_inplace(f, channel_self_attention(channel_norm(f), s.csa));
  return f;
}

std::vector<Tensor> normalized(const std::vector<Tensor>& frames, std::size_t workers) {
  std::vector<Tensor> out(frames.size());
  parallel_for(frames.size(), workers, [&](std::size_t i) { out[i] = channel_norm(frames[i]); });
  return out;
}

Tensor spectrum_of(const Tensor& pixels, std::size_t patch) { return dct2_patches(pixels, patch).coeffs; }

}  // namespace

void CondenserConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("condenser config: " + what); };
  if (channels == 0 || token_dim == 0 || seg_dim == 0) fail("widths must be positive");
  if (topk == 0) fail("topk must be >= 1");
  if (groups == 0) fail("memory groups must be >= 1");
  if (window == 0 || mfsa_window == 0) fail("windows must be positive");
  if (clip_length == 0) fail("clip length must be >= 1");
  if (distill_stride == 0) fail("distill stride must be positive");
  if (encoder_depth != 4 || middle_blocks != 3 || decoder_depth != 4) {
    fail("depths must be 4 / 3 / 4 (encoder / middle / decoder)");
  }
  if (dwt_levels == 0 || dwt_levels > 8 || upscale != (std::size_t{1} << dwt_levels)) {
    fail("upscale " + std::to_string(upscale) + " must equal 2^dwt_levels");
  }
}

CategoryConfig CondenserConfig::category() const { return {groups, token_dim, channels, memory_axis}; }

std::size_t CondenserConfig::state_channels() const { return 3 * (std::size_t{1} << (2 * dwt_levels)); }

Tensor ResBlock::forward(const Tensor& x, double eta, double time_gain) const {
  Tensor h = a.forward(channel_norm(x));
  const double g = 1.0 + time_gain * eta;
  for (auto& v : h.values()) v = v > 0.0 ? v * g : 0.0;
  Tensor out = b.forward(h);
  add_inplace(out, x);
  return out;
}

CondenserWeights CondenserWeights::seeded(const CondenserConfig& cfg, std::uint64_t seed) {
  return build_weights(cfg, seed, false);
}

CondenserWeights CondenserWeights::zeros(const CondenserConfig& cfg, std::uint64_t seed) {
  return build_weights(cfg, seed, true);
}

std::vector<Tensor*> CondenserWeights::parameters() {
  std::vector<Tensor*> out;
  for (auto& e : encoder) {
    push(out, e.input);
    push(out, e.stage);
  }
  for (auto& m : middle) {
    push(out, m.modulation);
    push(out, m.semantic);
    push(out, m.mfsa);
    push(out, m.res);
  }
  for (auto& d : decoder) {
    push(out, d.modulation);
    push(out, d.semantic);
    push(out, d.mfsa);
    push(out, d.stage);
  }
  out.push_back(&gate_projection.weight);
  push(out, tokens.encoder);
  push(out, tokens.decoder);
  out.push_back(&init_tokens);
  for (auto& g : memory.groups) {
    push(out, g.gather);
    push(out, g.refine);
    out.push_back(&g.semantic_refresh);
  }
  push(out, memory.read);
  push(out, head);
  return out;
}

std::vector<WaveletBands> SkipStack::pop() {
  if (levels.empty()) throw std::logic_error("skip stack underflow");
  auto top = std::move(levels.back());
  levels.pop_back();
  return top;
}

PixelCondenser::PixelCondenser(CondenserConfig cfg, CondenserWeights weights, std::uint64_t semantic_seed,
                               Vocabulary vocab)
    : cfg_(cfg), weights_(std::move(weights)), semantic_seed_(semantic_seed), vocab_(std::move(vocab)) {
  cfg_.validate();
  if (weights_.encoder.size() != cfg_.encoder_depth || weights_.middle.size() != cfg_.middle_blocks ||
      weights_.decoder.size() != cfg_.decoder_depth) {
    throw std::invalid_argument("condenser weights do not match the configured depths");
  }
}

SemanticSet PixelCondenser::prepare_semantics(std::span<const Tensor> lr_frames, std::size_t workers) const {
  const std::size_t m = lr_frames.size();
  if (m == 0) throw DimensionError("semantics need at least one frame");
  SemanticSet sem;
  sem.o_tokens.resize(m);
  sem.seg_features.resize(m);
  const DistillerConfig dc{cfg_.distill_stride, cfg_.token_dim, cfg_.seg_dim};
  parallel_for(m, workers, [&](std::size_t i) {
    Distilled out = distill(lr_frames[i], vocab_, semantic_seed_, dc);
    // Frames smaller than k distiller cells keep every cell.
    const std::size_t k = std::min(cfg_.topk, out.image_features.dim(0));
    sem.o_tokens[i] = select_topk(out.image_features, out.text_features, k).tokens;
    sem.seg_features[i] = std::move(out.seg_features);
  });
  sem.init_tokens = weights_.init_tokens;
  sem.clip_tokens = clip_tokens(stack(sem.o_tokens), sem.init_tokens, weights_.tokens);
  return sem;
}

EncodeResult PixelCondenser::encode(std::span<const Tensor> lr_frames, std::span<const Tensor> states, double eta,
                                    std::size_t workers) const {
  const std::size_t m = lr_frames.size();
  if (states.size() != m) throw DimensionError("encode: frame and state counts differ");
  const std::size_t depth = cfg_.encoder_depth;
  EncodeResult res;
  res.features.resize(m);
  res.skips.levels.assign(depth - 1, std::vector<WaveletBands>(m));
  parallel_for(m, workers, [&](std::size_t i) {
    const Tensor& lr = lr_frames[i];
    if (lr.rank() != 3 || lr.dim(0) != 3) throw DimensionError("encode: LR frames must be (3, h, w)");
    if (states[i].shape() != Shape{cfg_.state_channels(), lr.dim(1), lr.dim(2)}) {
      throw DimensionError("encode: state " + shape_to_string(states[i].shape()) + " does not match LR " +
                           shape_to_string(lr.shape()));
    }
    const Tensor both[] = {lr, states[i]};
    Tensor f = run_stage(weights_.encoder[0].stage, weights_.encoder[0].input.forward(concat_channels(both)), eta, cfg_);
    Tensor ll = lr;
    for (std::size_t level = 1; level < depth; ++level) {
      WaveletBands bands = haar_analyze(f);
      f = std::move(bands.ll);
      bands.ll = Tensor();
      res.skips.levels[level - 1][i] = std::move(bands);
      add_inplace(f, weights_.encoder[level].input.forward(wavelet_pack(ll, 1)));
      ll = haar_analyze(ll).ll;
      f = run_stage(weights_.encoder[level].stage, f, eta, cfg_);
    }
    res.features[i] = std::move(f);
  });
  return res;
}

std::vector<Tensor> PixelCondenser::middle(std::vector<Tensor> features, const SemanticSet& sem, double eta,
                                           std::size_t workers) const {
  const std::size_t m = features.size();
  if (sem.o_tokens.size() != m || sem.seg_features.size() != m) throw DimensionError("middle: semantics per frame");
  const Tensor gate_clip = weights_.gate_projection.forward(sem.clip_tokens);
  for (const auto& block : weights_.middle) {
    parallel_for(m, workers, [&](std::size_t i) {
      Tensor& f = features[i];
      f = modulate(f, modulation_pairs(sem.seg_features[i], block.modulation, f.dim(1), f.dim(2)));
      add_inplace(f, embed_semantics(channel_norm(f), sem.o_tokens[i], block.semantic));
    });
    const auto aligned = align_windows(gate_clip, normalized(features, workers), cfg_.mfsa_window, block.mfsa, cfg_.gate);
    parallel_for(m, workers, [&](std::size_t i) {
      add_inplace(features[i], aligned[i]);
      features[i] = block.res.forward(features[i], eta, cfg_.time_gain);
    });
  }
  return features;
}

DecodeResult PixelCondenser::decode(std::vector<Tensor> features, SkipStack skips, const MemoryBank& bank,
                                    const SemanticSet& sem, double eta, std::size_t workers) const {
  const std::size_t m = features.size();
  if (sem.seg_features.size() != m) throw DimensionError("decode: semantics per frame");
  if (skips.size() != cfg_.decoder_depth - 1) {
    throw DimensionError("decode expects " + std::to_string(cfg_.decoder_depth - 1) + " skip levels, got " +
                         std::to_string(skips.size()));
  }
  const Tensor gate_clip = weights_.gate_projection.forward(sem.clip_tokens);
  DecodeResult out;
  for (std::size_t level = 0; level < cfg_.decoder_depth; ++level) {
    const DecoderLevel& dl = weights_.decoder[level];
    std::vector<WaveletBands> bands;
    if (level + 1 < cfg_.decoder_depth) bands = skips.pop();
    parallel_for(m, workers, [&](std::size_t i) {
      Tensor& f = features[i];
      if (!bands.empty()) {
        WaveletBands& b = bands[i];
        b.ll = std::move(f);
        f = haar_synthesize(b);
      }
      f = modulate(f, modulation_pairs(sem.seg_features[i], dl.modulation, f.dim(1), f.dim(2)));
      add_inplace(f, embed_semantics(channel_norm(f), sem.clip_tokens, dl.semantic));
    });
    const auto aligned = align_windows(gate_clip, normalized(features, workers), cfg_.mfsa_window, dl.mfsa, cfg_.gate);
    parallel_for(m, workers, [&](std::size_t i) {
      Tensor& f = features[i];
      add_inplace(f, aligned[i]);
      f = run_stage(dl.stage, f, eta, cfg_);
      f = from_tokens(query(sem.clip_tokens, bank, to_tokens(f), weights_.memory, cfg_.memory_axis), f.dim(1),
                      f.dim(2));
    });
    out.level_features.push_back(stack(features));
  }
  out.residual.resize(m);
  parallel_for(m, workers, [&](std::size_t i) {
    out.residual[i] = wavelet_unpack(weights_.head.forward(channel_norm(features[i])), cfg_.dwt_levels);
  });
  return out;
}

DecodeResult PixelCondenser::forward(std::span<const Tensor> lr_frames, std::span<const Tensor> states,
                                     const MemoryBank& bank, const SemanticSet& sem, double eta,
                                     std::size_t workers) const {
  EncodeResult enc = encode(lr_frames, states, eta, workers);
  auto mid = middle(std::move(enc.features), sem, eta, workers);
  return decode(std::move(mid), std::move(enc.skips), bank, sem, eta, workers);
}

Tensor upsample_clip(const Tensor& lr_clip, std::size_t scale, std::size_t workers) {
  if (lr_clip.rank() != 4) throw DimensionError("clip must be (m, C, h, w)");
  const std::size_t m = lr_clip.dim(0);
  std::vector<Tensor> frames(m);
  parallel_for(m, workers, [&](std::size_t i) {
    frames[i] = resize_bicubic(lr_clip.slice(i), lr_clip.dim(2) * scale, lr_clip.dim(3) * scale);
  });
  return stack(frames);
}

ClipResult generate_clip(const Tensor& lr_clip, const DiffusionSchedule& sched, const PixelCondenser& net,
                         MemoryBank& bank, std::uint64_t seed, std::uint32_t clip_index, const GenerateOptions& opts) {
  const CondenserConfig& cfg = net.config();
  if (lr_clip.rank() != 4 || lr_clip.dim(0) == 0 || lr_clip.dim(1) != 3) {
    throw DimensionError("LR clip must be (m >= 1, 3, h, w), got " + shape_to_string(lr_clip.shape()));
  }
  const std::size_t m = lr_clip.dim(0), h = lr_clip.dim(2), w = lr_clip.dim(3);
  const std::size_t down = std::size_t{1} << (cfg.encoder_depth - 1);
  if (h % down || w % down) {
    throw DimensionError("LR size " + std::to_string(h) + "x" + std::to_string(w) + " not divisible by " +
                         std::to_string(down));
  }
  const std::size_t hh = h * cfg.upscale, ww = w * cfg.upscale;
  if (hh % sched.patch || ww % sched.patch) {
    throw DimensionError("HR size " + std::to_string(hh) + "x" + std::to_string(ww) + " not divisible by patch " +
                         std::to_string(sched.patch));
  }

  ClipResult result;
  result.upsampled = upsample_clip(lr_clip, cfg.upscale, opts.workers);
  const SpectralState ul{spectrum_of(result.upsampled, sched.patch), sched.steps};
  const KeyedNormal noise(seed, clip_index);

  Denoiser denoiser;
  std::vector<Tensor> last_features;
  std::optional<SemanticSet> sem;
  const std::vector<Tensor> lr_frames = unstack(lr_clip);
  if (opts.oracle_hr) {
    if (opts.oracle_hr->shape() != result.upsampled.shape()) {
      throw DimensionError("oracle HR " + shape_to_string(opts.oracle_hr->shape()) + " vs expected " +
                           shape_to_string(result.upsampled.shape()));
    }
    denoiser = oracle_denoiser(spectrum_of(*opts.oracle_hr, sched.patch));
  } else {
    denoiser = [&](const Tensor& u_t, std::size_t t) {
      const Tensor pixels = idct2_patches({sched.patch, hh, ww, u_t});
      std::vector<Tensor> states(m);
      parallel_for(m, opts.workers, [&](std::size_t i) { states[i] = wavelet_pack(pixels.slice(i), cfg.dwt_levels); });
      if (!sem) sem = net.prepare_semantics(lr_frames, opts.workers);
      DecodeResult dec = net.forward(lr_frames, states, bank, *sem, sched.eta[t], opts.workers);
      last_features = std::move(dec.level_features);
      ++result.network_calls;
      Tensor estimate = stack(dec.residual);
      add_inplace(estimate, result.upsampled);
      return spectrum_of(estimate, sched.patch);
    };
  }

  const SpectralState final_state = reverse_sample(ul, denoiser, sched, noise);
  result.sr = idct2_patches({sched.patch, hh, ww, final_state.u});
  if (!opts.oracle_hr) {
    bank = build_or_update(bank, last_features, net.weights().memory);
    result.bank_updates = 1;
  }
  return result;
}

}  // namespace seeclear
