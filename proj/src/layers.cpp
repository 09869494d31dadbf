#include "seeclear/layers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace seeclear {

Tensor Conv2d::forward(const Tensor& x) const {
  if (x.rank() != 3 || x.dim(0) != in_channels()) {
    throw DimensionError("conv2d: input " + shape_to_string(x.shape()) + " vs weight " +
                         shape_to_string(weight.shape()));
  }
  const std::size_t cin = in_channels(), cout = out_channels(), k = kernel();
  const std::size_t h = x.dim(1), w = x.dim(2);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  Tensor out({cout, h, w});
  const double* px = x.data().data();
  const double* pw = weight.data().data();
  double* po = out.data().data();
  for (std::size_t o = 0; o < cout; ++o) {
    double* plane = po + o * h * w;
    std::fill(plane, plane + h * w, bias[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = px + i * h * w;
      for (std::size_t ky = 0; ky < k; ++ky) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - half;
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - half;
          const double wv = pw[((o * cin + i) * k + ky) * k + kx];
          if (wv == 0.0) continue;
          const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -dx));
          const std::size_t x1 = static_cast<std::size_t>(
              std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w), static_cast<std::ptrdiff_t>(w) - dx));
          for (std::size_t y = 0; y < h; ++y) {
            const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
            const double* srow = src + static_cast<std::size_t>(sy) * w;
            double* orow = plane + y * w;
            for (std::size_t xx = x0; xx < x1; ++xx) orow[xx] += wv * srow[static_cast<std::ptrdiff_t>(xx) + dx];
          }
        }
      }
    }
  }
  return out;
}

Conv2d Conv2d::seeded(std::size_t in, std::size_t out, std::size_t k, RandomStream& rng, double gain) {
  Conv2d c = zeros(in, out, k);
  const double bound = gain / std::sqrt(static_cast<double>(in * k * k));
  for (auto& v : c.weight.values()) v = rng.uniform(-bound, bound);
  return c;
}

Conv2d Conv2d::zeros(std::size_t in, std::size_t out, std::size_t k) {
  if (k % 2 == 0) throw DimensionError("conv kernel must be odd");
  return Conv2d{Tensor({out, in, k, k}), Tensor({out})};
}

Linear Linear::seeded(std::size_t in, std::size_t out, RandomStream& rng) {
  Linear l{Tensor({in, out})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : l.weight.values()) v = rng.uniform(-bound, bound);
  return l;
}

Tensor concat_channels(std::span<const Tensor> parts) { return concat_rows(parts); }

Tensor channel_range(const Tensor& chw, std::size_t first, std::size_t count) {
  if (first + count > chw.dim(0)) throw DimensionError("channel range out of bounds");
  const std::size_t plane = chw.dim(1) * chw.dim(2);
  std::vector<double> d(chw.values().begin() + static_cast<std::ptrdiff_t>(first * plane),
                        chw.values().begin() + static_cast<std::ptrdiff_t>((first + count) * plane));
  return Tensor({count, chw.dim(1), chw.dim(2)}, std::move(d));
}

Tensor resize_nearest(const Tensor& chw, std::size_t h, std::size_t w) {
  const std::size_t c = chw.dim(0), ih = chw.dim(1), iw = chw.dim(2);
  if (ih == h && iw == w) return chw;
  Tensor out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t sy = std::min(ih - 1, y * ih / h);
      for (std::size_t x = 0; x < w; ++x) out.at(ch, y, x) = chw.at(ch, sy, std::min(iw - 1, x * iw / w));
    }
  return out;
}

Tensor channel_norm(const Tensor& chw) {
  if (chw.rank() != 3) throw DimensionError("channel_norm expects (C,H,W)");
  const std::size_t c = chw.dim(0), plane = chw.dim(1) * chw.dim(2);
  Tensor out(chw.shape());
  for (std::size_t p = 0; p < plane; ++p) {
    double mean = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) mean += chw[ch * plane + p];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) var += (chw[ch * plane + p] - mean) * (chw[ch * plane + p] - mean);
    const double inv = 1.0 / std::sqrt(var / static_cast<double>(c) + 1e-6);
    for (std::size_t ch = 0; ch < c; ++ch) out[ch * plane + p] = (chw[ch * plane + p] - mean) * inv;
  }
  return out;
}

Tensor avg_pool(const Tensor& chw, std::size_t factor) {
  if (factor == 1) return chw;
  const std::size_t c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  if (factor == 0 || h % factor || w % factor) throw DimensionError("avg_pool factor does not divide map");
  Tensor out({c, h / factor, w / factor});
  const double inv = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(ch, y / factor, x / factor) += chw.at(ch, y, x) * inv;
  return out;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace seeclear
