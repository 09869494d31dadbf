#include "seeclear/category.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seeclear/layers.hpp"
#include "seeclear/rng.hpp"

namespace seeclear {

MemoryBank MemoryBank::zeros(const CategoryConfig& cfg) {
  if (cfg.groups == 0 || cfg.channel_dim == 0 || cfg.texture_dim == 0) throw std::invalid_argument("empty memory bank");
  MemoryBank bank;
  for (std::size_t j = 0; j < cfg.groups; ++j) {
    bank.groups.push_back({Tensor({cfg.channel_dim, cfg.channel_dim}), Tensor({cfg.channel_dim, cfg.texture_dim})});
  }
  return bank;
}

CategoryWeights CategoryWeights::seeded(const CategoryConfig& cfg, std::uint64_t seed) {
  CategoryWeights w;
  RandomStream rng(seed, 0xCA7E);
  const std::size_t c = cfg.texture_dim, d = cfg.channel_dim;
  for (std::size_t j = 0; j < cfg.groups; ++j) {
    CategoryGroupWeights g;
    g.gather = AttentionParams::seeded(c, c, c, 1, rng.next_u64());
    g.refine = AttentionParams::seeded(c, c, c, 1, rng.next_u64());
    g.semantic_refresh = Linear::seeded(c, d, rng).weight;
    w.groups.push_back(std::move(g));
  }
  w.read = AttentionParams::seeded(c, c, c, 1, rng.next_u64());
  return w;
}

Tensor layer_norm_rows(const Tensor& m) {
  if (m.rank() != 2) throw DimensionError("layer_norm_rows needs a matrix");
  Tensor out = m;
  const std::size_t cols = m.dim(1);
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    double* row = out.data().data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += row[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + 1e-6);
    for (std::size_t c = 0; c < cols; ++c) row[c] = (row[c] - mean) * inv;
  }
  return out;
}

Tensor memory_affinity(const Tensor& clip_tokens, const MemoryGroup& group, SoftmaxAxis axis) {
  if (clip_tokens.rank() != 2 || clip_tokens.dim(1) != group.semantics.dim(0)) {
    throw DimensionError("clip tokens " + shape_to_string(clip_tokens.shape()) + " do not meet channel semantics " +
                         shape_to_string(group.semantics.shape()));
  }
  const Tensor logits = matmul(clip_tokens, group.semantics);
  if (axis == SoftmaxAxis::kMemory) return softmax_rows(logits);
  return transpose(softmax_rows(transpose(logits)));
}

MemoryBank build_or_update(const MemoryBank& bank, std::span<const Tensor> multiscale, const CategoryWeights& weights) {
  if (multiscale.size() != 4) {
    throw DimensionError("memory update expects 4 feature scales, got " + std::to_string(multiscale.size()));
  }
  if (weights.groups.size() != bank.groups.size()) throw DimensionError("memory weights and bank disagree on J");
  std::size_t gh = std::numeric_limits<std::size_t>::max(), gw = gh;
  for (const auto& f : multiscale) {
    if (f.rank() != 4) throw DimensionError("memory features must be (m, c, H, W)");
    gh = std::min(gh, f.dim(2));
    gw = std::min(gw, f.dim(3));
  }
  std::vector<Tensor> token_sets;
  for (const auto& f : multiscale) {
    const std::size_t factor = f.dim(2) / gh;
    if (f.dim(2) % gh || f.dim(3) != gw * factor) {
      throw DimensionError("feature scale " + shape_to_string(f.shape()) + " does not pool onto a " +
                           std::to_string(gh) + "x" + std::to_string(gw) + " grid");
    }
    for (std::size_t frame = 0; frame < f.dim(0); ++frame) {
      token_sets.push_back(to_tokens(avg_pool(f.slice(frame), factor)));
    }
  }
  const Tensor feats = concat_rows(token_sets);

  MemoryBank out;
  out.updates = bank.updates + 1;
  for (std::size_t j = 0; j < bank.groups.size(); ++j) {
    const MemoryGroup& g = bank.groups[j];
    const CategoryGroupWeights& w = weights.groups[j];
    if (feats.dim(1) != g.textures.dim(1)) throw DimensionError("feature width does not match texture width");
    const Tensor embedded = matmul(g.semantics, g.textures);
    const Tensor gathered = cross_attention(embedded, feats, w.gather);
    const Tensor mixed = add(embedded, gathered);
    MemoryGroup next;
    next.textures = layer_norm_rows(add(mixed, self_attention(mixed, w.refine)));
    next.semantics = layer_norm_rows(add(g.semantics, matmul(gathered, w.semantic_refresh)));
    out.groups.push_back(std::move(next));
  }
  return out;
}

Tensor query(const Tensor& clip_tokens, const MemoryBank& bank, const Tensor& feature_tokens,
             const CategoryWeights& weights, SoftmaxAxis axis) {
  std::vector<Tensor> mixtures;
  mixtures.reserve(bank.groups.size());
  for (const auto& g : bank.groups) mixtures.push_back(matmul(memory_affinity(clip_tokens, g, axis), g.textures));
  const Tensor memory = concat_rows(mixtures);
  return add(cross_attention(feature_tokens, memory, weights.read), feature_tokens);
}

}  // namespace seeclear
