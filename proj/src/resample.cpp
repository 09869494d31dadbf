#include "seeclear/resample.hpp"

#include <cmath>
#include <vector>

namespace seeclear {

namespace {

double cubic(double x) {
  const double ax = std::abs(x);
  const double ax2 = ax * ax, ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

struct Contributions {
  std::size_t taps;
  std::vector<std::size_t> index;  // out_len * taps
  std::vector<double> weight;      // out_len * taps
};

// Symmetric reflection into [0, n).
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < len ? i : period - 1 - i);
}

Contributions contributions(std::size_t in_len, std::size_t out_len) {
  const double scale = static_cast<double>(out_len) / static_cast<double>(in_len);
  const double kernel_scale = scale < 1.0 ? scale : 1.0;
  const double width = 4.0 / kernel_scale;
  const auto taps = static_cast<std::size_t>(std::ceil(width)) + 2;
  Contributions c{taps, std::vector<std::size_t>(out_len * taps), std::vector<double>(out_len * taps)};
  for (std::size_t o = 0; o < out_len; ++o) {
    // 1-based coordinates as in imresize.
    const double x = static_cast<double>(o + 1);
    const double u = x / scale + 0.5 * (1.0 - 1.0 / scale);
    const double left = std::floor(u - width / 2.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < taps; ++k) {
      const double j = left + static_cast<double>(k);
      const double wgt = kernel_scale * cubic(kernel_scale * (u - j));
      c.index[o * taps + k] = mirror(static_cast<std::ptrdiff_t>(j) - 1, in_len);
      c.weight[o * taps + k] = wgt;
      sum += wgt;
    }
    for (std::size_t k = 0; k < taps; ++k) c.weight[o * taps + k] /= sum;
  }
  return c;
}

}  // namespace

Tensor resize_bicubic(const Tensor& chw, std::size_t height, std::size_t width) {
  if (chw.rank() != 3) throw DimensionError("resize_bicubic expects (C,H,W)");
  if (height == 0 || width == 0) throw DimensionError("resize target must be positive");
  const std::size_t c = chw.dim(0), ih = chw.dim(1), iw = chw.dim(2);
  if (ih == height && iw == width) return chw;

  // imresize resizes the dimension with the smaller scale first.
  const double sh = static_cast<double>(height) / static_cast<double>(ih);
  const double sw = static_cast<double>(width) / static_cast<double>(iw);
  const bool rows_first = sh <= sw;

  auto resize_rows = [&](const Tensor& in, std::size_t out_h) {
    const std::size_t h = in.dim(1), w = in.dim(2);
    const auto ctb = contributions(h, out_h);
    Tensor out({c, out_h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t k = 0; k < ctb.taps; ++k) {
          const double wgt = ctb.weight[y * ctb.taps + k];
          if (wgt == 0.0) continue;
          const std::size_t sy = ctb.index[y * ctb.taps + k];
          for (std::size_t x = 0; x < w; ++x) out.at(ch, y, x) += wgt * in.at(ch, sy, x);
        }
    return out;
  };
  auto resize_cols = [&](const Tensor& in, std::size_t out_w) {
    const std::size_t h = in.dim(1), w = in.dim(2);
    const auto ctb = contributions(w, out_w);
    Tensor out({c, h, out_w});
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) {
          double s = 0.0;
          for (std::size_t k = 0; k < ctb.taps; ++k) s += ctb.weight[x * ctb.taps + k] * in.at(ch, y, ctb.index[x * ctb.taps + k]);
          out.at(ch, y, x) = s;
        }
    return out;
  };

  if (rows_first) return resize_cols(resize_rows(chw, height), width);
  return resize_rows(resize_cols(chw, width), height);
}

}  // namespace seeclear
