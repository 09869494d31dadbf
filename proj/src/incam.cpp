#include "seeclear/incam.hpp"

#include <algorithm>
#include <limits>

namespace seeclear {

ModulationNet ModulationNet::seeded(std::size_t seg_dim, std::size_t channels, RandomStream& rng) {
  ModulationNet net;
  net.first = Conv2d::seeded(seg_dim, channels, 3, rng);
  net.second = Conv2d::seeded(channels, 2 * channels, 3, rng, 0.5);
  return net;
}

ModulationPair modulation_pairs(const Tensor& seg, const ModulationNet& net, std::size_t height, std::size_t width) {
  if (seg.rank() != 3) throw DimensionError("segmentation features must be (d_p, h, w)");
  const Tensor resized = resize_nearest(seg, height, width);
  const Tensor both = net.second.forward(relu(net.first.forward(resized)));
  const std::size_t c = net.feature_channels();
  return {channel_range(both, 0, c), channel_range(both, c, c)};
}

Tensor modulate(const Tensor& f, const ModulationPair& pair) {
  if (f.shape() != pair.gamma.shape() || f.shape() != pair.beta.shape()) {
    throw DimensionError("modulate: features " + shape_to_string(f.shape()) + ", gamma " +
                         shape_to_string(pair.gamma.shape()) + ", beta " + shape_to_string(pair.beta.shape()));
  }
  Tensor out(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] * pair.gamma[i] + pair.beta[i]) + f[i];
  return out;
}

Tensor embed_semantics(const Tensor& features, const Tensor& tokens, const AttentionParams& params) {
  if (features.rank() != 3) throw DimensionError("embed_semantics expects (C,H,W) features");
  const Tensor out = cross_attention(to_tokens(features), tokens, params);
  return from_tokens(out, features.dim(1), features.dim(2));
}

ClipTokenCoder ClipTokenCoder::seeded(std::size_t token_dim, std::uint64_t seed) {
  return {AttentionParams::seeded(token_dim, token_dim, token_dim, 1, seed ^ 0xE11C),
          AttentionParams::seeded(token_dim, token_dim, token_dim, 1, seed ^ 0xDEC0)};
}

ClipTokenCoder ClipTokenCoder::identity(std::size_t token_dim) {
  return {AttentionParams::identity(token_dim), AttentionParams::identity(token_dim)};
}

Tensor clip_tokens(const Tensor& per_frame_tokens, const Tensor& init, const ClipTokenCoder& coder) {
  if (per_frame_tokens.rank() != 3) throw DimensionError("clip_tokens expects (m, k, d)");
  const std::size_t m = per_frame_tokens.dim(0), k = per_frame_tokens.dim(1), d = per_frame_tokens.dim(2);
  if (init.rank() != 2 || init.dim(1) != d) throw DimensionError("initializer tokens must be (k, d)");
  const Tensor joint = per_frame_tokens.reshaped({m * k, d});
  const Tensor encoded = add(joint, self_attention(joint, coder.encoder));
  return add(init, cross_attention(init, encoded, coder.decoder));
}

std::vector<double> semantic_gate(const Tensor& tokens, const Tensor& clip, GateMode mode) {
  if (tokens.rank() != 2 || clip.rank() != 2 || tokens.dim(1) != clip.dim(1)) {
    throw DimensionError("semantic_gate: feature width " + shape_to_string(tokens.shape()) + " vs clip tokens " +
                         shape_to_string(clip.shape()));
  }
  const Tensor sim = matmul(tokens, transpose(clip));
  std::vector<double> gate(sim.dim(0));
  const std::size_t k = sim.dim(1);
  for (std::size_t i = 0; i < sim.dim(0); ++i) {
    const double* row = sim.data().data() + i * k;
    if (mode == GateMode::kRowMax) {
      gate[i] = *std::max_element(row, row + k);
    } else {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += row[j];
      gate[i] = s / static_cast<double>(k);
    }
  }
  return gate;
}

Tensor align(const Tensor& clip, const Tensor& features, const AttentionParams& mfsa, GateMode mode) {
  if (features.rank() != 3) throw DimensionError("align expects (m, N, c) features");
  const std::size_t m = features.dim(0), n = features.dim(1), c = features.dim(2);
  Tensor gated = features;
  for (std::size_t f = 0; f < m; ++f) {
    const Tensor frame = features.slice(f);
    const auto gate = semantic_gate(frame, clip, mode);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) gated[(f * n + i) * c + j] *= gate[i];
  }
  return multi_frame_self_attention(gated, mfsa);
}

std::vector<Tensor> align_windows(const Tensor& clip, std::span<const Tensor> frames, std::size_t window,
                                  const AttentionParams& mfsa, GateMode mode) {
  if (frames.empty()) throw DimensionError("align_windows needs at least one frame");
  if (window == 0) throw DimensionError("window must be positive");
  const std::size_t m = frames.size(), c = frames[0].dim(0), h = frames[0].dim(1), w = frames[0].dim(2);
  const std::size_t ph = (h + window - 1) / window * window;
  const std::size_t pw = (w + window - 1) / window * window;
  std::vector<Tensor> gated;
  gated.reserve(m);
  for (const auto& f : frames) {
    if (f.shape() != frames[0].shape()) throw DimensionError("align_windows: frames differ in shape");
    Tensor g = f;
    const auto gate = semantic_gate(to_tokens(f), clip, mode);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < h * w; ++p) g[ch * h * w + p] *= gate[p];
    gated.push_back(reflect_pad(g, ph, pw));
  }
  const std::size_t out_c = mfsa.width();
  std::vector<Tensor> out(m, Tensor({out_c, ph, pw}));
  const std::size_t win2 = window * window;
  Tensor joint({m, win2, c});
  for (std::size_t wy = 0; wy < ph; wy += window) {
    for (std::size_t wx = 0; wx < pw; wx += window) {
      for (std::size_t f = 0; f < m; ++f)
        for (std::size_t y = 0; y < window; ++y)
          for (std::size_t x = 0; x < window; ++x)
            for (std::size_t ch = 0; ch < c; ++ch)
              joint[(f * win2 + y * window + x) * c + ch] = gated[f].at(ch, wy + y, wx + x);
      const Tensor res = multi_frame_self_attention(joint, mfsa);
      for (std::size_t f = 0; f < m; ++f)
        for (std::size_t y = 0; y < window; ++y)
          for (std::size_t x = 0; x < window; ++x)
            for (std::size_t ch = 0; ch < out_c; ++ch)
              out[f].at(ch, wy + y, wx + x) = res[(f * win2 + y * window + x) * out_c + ch];
    }
  }
  for (auto& o : out) o = crop(o, h, w);
  return out;
}

}  // namespace seeclear
