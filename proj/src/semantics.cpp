#include "seeclear/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "seeclear/attention.hpp"
#include "seeclear/rng.hpp"

namespace seeclear {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Tensor projection(std::size_t in, std::size_t out, RandomStream rng) {
  Tensor w({in, out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("vocabulary is empty");
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e).second) throw std::invalid_argument("duplicate vocabulary entry: " + e);
  }
}

Vocabulary Vocabulary::defaults() {
  return Vocabulary({"person", "car", "building", "tree", "sky", "road", "sign", "window", "text", "grass",
                     "water", "animal"});
}

Distilled distill(const Tensor& frame, const Vocabulary& vocab, std::uint64_t seed, const DistillerConfig& cfg) {
  if (frame.rank() != 3) throw DimensionError("distill expects a (C,H,W) frame");
  if (cfg.stride == 0 || cfg.token_dim == 0 || cfg.seg_dim == 0) throw std::invalid_argument("bad distiller config");
  const std::size_t s = cfg.stride;
  const std::size_t c = frame.dim(0);
  const std::size_t h = (frame.dim(1) + s - 1) / s * s;
  const std::size_t w = (frame.dim(2) + s - 1) / s * s;
  const Tensor padded = reflect_pad(frame, h, w);
  const std::size_t gh = h / s, gw = w / s, cells = gh * gw, cell_len = c * s * s;

  Tensor cells_mat({cells, cell_len});
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx) {
      double* row = cells_mat.data().data() + (gy * gw + gx) * cell_len;
      std::size_t j = 0;
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < s; ++y)
          for (std::size_t x = 0; x < s; ++x) row[j++] = padded.at(ch, gy * s + y, gx * s + x);
    }

  const RandomStream root(seed, 0x5E3A);
  Distilled out;
  out.image_features = matmul(cells_mat, projection(cell_len, cfg.token_dim, root.split(1)));
  const Tensor seg_tokens = matmul(cells_mat, projection(cell_len, cfg.seg_dim, root.split(2)));
  out.seg_features = from_tokens(seg_tokens, gh, gw);

  out.text_features = Tensor({vocab.size(), cfg.token_dim});
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    RandomStream rng = root.split(fnv1a(vocab.entries()[v]));
    for (std::size_t j = 0; j < cfg.token_dim; ++j) out.text_features.at(v, j) = rng.normal();
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine of unequal-length vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

TopK select_topk(const Tensor& image_features, const Tensor& text_features, std::size_t k) {
  if (image_features.rank() != 2 || text_features.rank() != 2 || image_features.dim(1) != text_features.dim(1)) {
    throw DimensionError("select_topk: feature widths disagree");
  }
  const std::size_t m = image_features.dim(0), d = image_features.dim(1);
  if (k < 1 || k > m) throw std::out_of_range("top-k count " + std::to_string(k) + " outside 1.." + std::to_string(m));

  std::vector<double> best(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    const std::span<const double> img(image_features.data().data() + i * d, d);
    for (std::size_t v = 0; v < text_features.dim(0); ++v) {
      best[i] = std::max(best[i], cosine_similarity(img, {text_features.data().data() + v * d, d}));
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });
  order.resize(k);

  TopK out{Tensor({k, d}), order, {}};
  for (std::size_t r = 0; r < k; ++r) {
    out.scores.push_back(best[order[r]]);
    for (std::size_t j = 0; j < d; ++j) out.tokens.at(r, j) = image_features.at(order[r], j);
  }
  return out;
}

Tensor seeded_init_tokens(std::size_t k, std::size_t d, std::uint64_t seed) {
  RandomStream rng(seed, 0x1417);
  Tensor t({k, d});
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace seeclear
