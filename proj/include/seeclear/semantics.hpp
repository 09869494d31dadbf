#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "seeclear/tensor.hpp"

namespace seeclear {

class Vocabulary {
 public:
  /// Throws std::invalid_argument when empty or containing duplicates.
  explicit Vocabulary(std::vector<std::string> entries);

  static Vocabulary defaults();

  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
};

struct DistillerConfig {
  std::size_t stride = 8;       // pixels per token cell
  std::size_t token_dim = 32;   // d
  std::size_t seg_dim = 16;     // d_p
};

/// Image tokens (M x d), text embeddings (|V| x d) and segmentation
/// features (d_p x H/stride x W/stride).
struct Distilled {
  Tensor image_features;
  Tensor text_features;
  Tensor seg_features;
};

/// Deterministic stand-in for a frozen open-vocabulary segmenter.
///
/// Text embeddings are seeded by a hash of each class name; image tokens
/// and segmentation features are fixed random linear projections of the
/// stride x stride pixel cells. Same (frame, vocabulary, seed) always
/// yields bit-identical output.
Distilled distill(const Tensor& frame, const Vocabulary& vocab, std::uint64_t seed, const DistillerConfig& cfg = {});

/// Cosine similarity; 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct TopK {
  Tensor tokens;                    // k x d, best first
  std::vector<std::size_t> indices; // source rows of F_img
  std::vector<double> scores;       // best cosine vs any text embedding
};

/// Keep the k image tokens whose best text match is highest. Ties go to
/// the lower row index.
TopK select_topk(const Tensor& image_features, const Tensor& text_features, std::size_t k);

/// Per-frame semantic conditioning plus the clip-level tokens.
struct SemanticSet {
  std::vector<Tensor> o_tokens;      // per frame, k x d
  std::vector<Tensor> seg_features;  // per frame, d_p x h x w
  Tensor clip_tokens;                // k x d (filled by the alignment module)
  Tensor init_tokens;                // k x d, seeded
};

Tensor seeded_init_tokens(std::size_t k, std::size_t d, std::uint64_t seed);

}  // namespace seeclear
