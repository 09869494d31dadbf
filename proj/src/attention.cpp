#include "seeclear/attention.hpp"

#include <cmath>

#include "seeclear/rng.hpp"

namespace seeclear {

namespace {

Tensor seeded_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
  Tensor w({rows, cols});
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (auto& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

// Columns [first, first+count) of a matrix.
Tensor column_block(const Tensor& m, std::size_t first, std::size_t count) {
  Tensor out({m.dim(0), count});
  for (std::size_t r = 0; r < m.dim(0); ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = m.at(r, first + c);
  return out;
}

void put_column_block(Tensor& m, const Tensor& block, std::size_t first) {
  for (std::size_t r = 0; r < block.dim(0); ++r)
    for (std::size_t c = 0; c < block.dim(1); ++c) m.at(r, first + c) = block.at(r, c);
}

Tensor attend_projected(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t d, std::size_t heads) {
  if (heads == 1) {
    Tensor logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(d)));
    return matmul(softmax_rows(logits), v);
  }
  Tensor out({q.dim(0), d * heads});
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = column_block(q, h * d, d);
    Tensor kh = column_block(k, h * d, d);
    Tensor vh = column_block(v, h * d, d);
    Tensor logits = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(d)));
    put_column_block(out, matmul(softmax_rows(logits), vh), h * d);
  }
  return out;
}

std::size_t reflect_index(std::size_t i, std::size_t n) {
  if (n == 1) return 0;
  const std::size_t period = 2 * (n - 1);
  i %= period;
  return i < n ? i : period - i;
}

}  // namespace

void AttentionParams::validate() const {
  if (d == 0 || heads == 0) throw DimensionError("attention needs d > 0 and heads > 0");
  for (const Tensor* w : {&w_q, &w_k, &w_v}) {
    if (w->rank() != 2 || w->dim(1) != width()) {
      throw DimensionError("attention projection " + shape_to_string(w->shape()) + " does not map to d*heads = " +
                           std::to_string(width()));
    }
  }
  if (w_k.dim(0) != w_v.dim(0)) throw DimensionError("key and value projections disagree on input width");
}

AttentionParams AttentionParams::seeded(std::size_t d_query, std::size_t d_kv, std::size_t d, std::size_t heads,
                                        std::uint64_t seed) {
  RandomStream rng(seed, 0xA77E);
  AttentionParams p;
  p.d = d;
  p.heads = heads;
  p.w_q = seeded_matrix(d_query, d * heads, rng);
  p.w_k = seeded_matrix(d_kv, d * heads, rng);
  p.w_v = seeded_matrix(d_kv, d * heads, rng);
  return p;
}

AttentionParams AttentionParams::identity(std::size_t dim) {
  return AttentionParams{Tensor::identity(dim), Tensor::identity(dim), Tensor::identity(dim), dim, 1};
}

Tensor cross_attention(const Tensor& queries, const Tensor& keys_values, const AttentionParams& params) {
  params.validate();
  if (queries.rank() != 2 || keys_values.rank() != 2 || queries.dim(1) != params.w_q.dim(0) ||
      keys_values.dim(1) != params.w_k.dim(0)) {
    throw DimensionError("cross_attention: queries " + shape_to_string(queries.shape()) + ", keys/values " +
                         shape_to_string(keys_values.shape()) + " do not match projections");
  }
  return attend_projected(matmul(queries, params.w_q), matmul(keys_values, params.w_k),
                          matmul(keys_values, params.w_v), params.d, params.heads);
}

Tensor self_attention(const Tensor& tokens, const AttentionParams& params) {
  return cross_attention(tokens, tokens, params);
}

Tensor multi_frame_self_attention(const Tensor& frames, const AttentionParams& params) {
  if (frames.rank() != 3) throw DimensionError("multi_frame_self_attention expects (m, tokens, d)");
  const std::size_t m = frames.dim(0), n = frames.dim(1);
  Tensor joint = frames.reshaped({m * n, frames.dim(2)});
  Tensor out = self_attention(joint, params);
  return out.reshaped({m, n, params.width()});
}

Tensor reflect_pad(const Tensor& chw, std::size_t new_h, std::size_t new_w) {
  const std::size_t c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (new_h < h || new_w < w) throw DimensionError("reflect_pad cannot shrink");
  if (new_h == h && new_w == w) return chw;
  Tensor out({c, new_h, new_w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < new_h; ++y)
      for (std::size_t x = 0; x < new_w; ++x) out.at(ch, y, x) = chw.at(ch, reflect_index(y, h), reflect_index(x, w));
  return out;
}

Tensor crop(const Tensor& chw, std::size_t h, std::size_t w) {
  if (chw.dim(1) == h && chw.dim(2) == w) return chw;
  Tensor out({chw.dim(0), h, w});
  for (std::size_t ch = 0; ch < chw.dim(0); ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(ch, y, x) = chw.at(ch, y, x);
  return out;
}

Tensor window_self_attention(const Tensor& feat, std::size_t window, const AttentionParams& params) {
  if (feat.rank() != 3) throw DimensionError("window_self_attention expects (C,H,W)");
  if (window == 0) throw DimensionError("window must be positive");
  params.validate();
  const std::size_t c = feat.dim(0), h = feat.dim(1), w = feat.dim(2);
  if (c != params.w_q.dim(0)) throw DimensionError("window_self_attention: channel count does not match projections");
  const std::size_t ph = (h + window - 1) / window * window;
  const std::size_t pw = (w + window - 1) / window * window;
  const Tensor padded = reflect_pad(feat, ph, pw);
  const std::size_t out_c = params.width();
  Tensor out({out_c, ph, pw});
  Tensor tokens({window * window, c});
  for (std::size_t wy = 0; wy < ph; wy += window) {
    for (std::size_t wx = 0; wx < pw; wx += window) {
      for (std::size_t y = 0; y < window; ++y)
        for (std::size_t x = 0; x < window; ++x)
          for (std::size_t ch = 0; ch < c; ++ch) tokens.at(y * window + x, ch) = padded.at(ch, wy + y, wx + x);
      const Tensor res = self_attention(tokens, params);
      for (std::size_t y = 0; y < window; ++y)
        for (std::size_t x = 0; x < window; ++x)
          for (std::size_t ch = 0; ch < out_c; ++ch) out.at(ch, wy + y, wx + x) = res.at(y * window + x, ch);
    }
  }
  return crop(out, h, w);
}

Tensor channel_self_attention(const Tensor& feat, const AttentionParams& params) {
  if (feat.rank() != 3) throw DimensionError("channel_self_attention expects (C,H,W)");
  params.validate();
  const std::size_t h = feat.dim(1), w = feat.dim(2);
  const Tensor x = to_tokens(feat);
  if (x.dim(1) != params.w_q.dim(0) || x.dim(1) != params.w_k.dim(0)) {
    throw DimensionError("channel_self_attention: channel count does not match projections");
  }
  // Rows are channels, columns spatial positions.
  const Tensor q = transpose(matmul(x, params.w_q));
  const Tensor k = transpose(matmul(x, params.w_k));
  const Tensor v = transpose(matmul(x, params.w_v));
  const std::size_t d = params.d, hw = h * w;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hw));
  Tensor out_rows({params.width(), hw});
  for (std::size_t head = 0; head < params.heads; ++head) {
    Tensor qh({d, hw}), kh({d, hw}), vh({d, hw});
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t p = 0; p < hw; ++p) {
        qh.at(r, p) = q.at(head * d + r, p);
        kh.at(r, p) = k.at(head * d + r, p);
        vh.at(r, p) = v.at(head * d + r, p);
      }
    const Tensor attn = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt));
    const Tensor res = matmul(attn, vh);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t p = 0; p < hw; ++p) out_rows.at(head * d + r, p) = res.at(r, p);
  }
  return out_rows.reshaped({params.width(), h, w});
}

}  // namespace seeclear
