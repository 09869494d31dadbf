#include "seeclear/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "seeclear/attention.hpp"

namespace seeclear {

namespace {

struct SpatialLayout {
  std::size_t outer;  // product of leading axes
  std::size_t h;
  std::size_t w;
};

SpatialLayout layout_of(const Tensor& t) {
  if (t.rank() < 2) throw DimensionError("spatial transform needs at least two axes");
  const std::size_t h = t.dim(t.rank() - 2), w = t.dim(t.rank() - 1);
  return {t.size() / (h * w), h, w};
}

Shape with_spatial(const Shape& shape, std::size_t h, std::size_t w) {
  Shape s = shape;
  s[s.size() - 2] = h;
  s[s.size() - 1] = w;
  return s;
}

// Apply `out = basis * tile * basis^T` (or the transpose pair) to every tile.
Tensor transform_tiles(const Tensor& in, const Tensor& basis, std::size_t p, bool inverse) {
  const auto [outer, h, w] = layout_of(in);
  Tensor out(in.shape());
  std::vector<double> tile(p * p), tmp(p * p);
  const double* b = basis.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = in.data().data() + o * h * w;
    double* dst = out.data().data() + o * h * w;
    for (std::size_t ty = 0; ty < h; ty += p) {
      for (std::size_t tx = 0; tx < w; tx += p) {
        for (std::size_t y = 0; y < p; ++y)
          for (std::size_t x = 0; x < p; ++x) tile[y * p + x] = src[(ty + y) * w + tx + x];
        // tmp = M * tile, where M = basis (forward) or basis^T (inverse)
        for (std::size_t r = 0; r < p; ++r)
          for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += (inverse ? b[k * p + r] : b[r * p + k]) * tile[k * p + c];
            tmp[r * p + c] = s;
          }
        // tile = tmp * M^T
        for (std::size_t r = 0; r < p; ++r)
          for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += tmp[r * p + k] * (inverse ? b[k * p + c] : b[c * p + k]);
            dst[(ty + r) * w + tx + c] = s;
          }
      }
    }
  }
  return out;
}

Tensor pad_spatial(const Tensor& t, std::size_t nh, std::size_t nw) {
  const auto [outer, h, w] = layout_of(t);
  if (nh == h && nw == w) return t;
  Tensor flat = t.reshaped({outer, h, w});
  return reflect_pad(flat, nh, nw).reshaped(with_spatial(t.shape(), nh, nw));
}

Tensor crop_spatial(const Tensor& t, std::size_t nh, std::size_t nw) {
  const auto [outer, h, w] = layout_of(t);
  if (nh == h && nw == w) return t;
  return crop(t.reshaped({outer, h, w}), nh, nw).reshaped(with_spatial(t.shape(), nh, nw));
}

}  // namespace

Tensor dct_matrix(std::size_t p) {
  if (p == 0) throw std::invalid_argument("patch size must be positive");
  Tensor c({p, p});
  const double a0 = std::sqrt(1.0 / static_cast<double>(p));
  const double ak = std::sqrt(2.0 / static_cast<double>(p));
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t n = 0; n < p; ++n)
      c.at(k, n) = (k == 0 ? a0 : ak) *
                   std::cos(std::numbers::pi * static_cast<double>((2 * n + 1) * k) / (2.0 * static_cast<double>(p)));
  return c;
}

PatchSpectrum dct2_patches(const Tensor& frame, std::size_t patch) {
  if (patch == 0) throw std::invalid_argument("patch size must be positive");
  const auto [outer, h, w] = layout_of(frame);
  const std::size_t ph = (h + patch - 1) / patch * patch;
  const std::size_t pw = (w + patch - 1) / patch * patch;
  const Tensor padded = pad_spatial(frame, ph, pw);
  return PatchSpectrum{patch, h, w, transform_tiles(padded, dct_matrix(patch), patch, false)};
}

Tensor idct2_patches(const PatchSpectrum& spec) {
  if (spec.patch == 0) throw std::invalid_argument("patch size must be positive");
  const Tensor pixels = transform_tiles(spec.coeffs, dct_matrix(spec.patch), spec.patch, true);
  return crop_spatial(pixels, spec.height, spec.width);
}

double heat_eigenvalue(std::size_t ky, std::size_t kx, std::size_t patch) {
  const double p2 = static_cast<double>(patch * patch);
  return -std::numbers::pi * std::numbers::pi *
         (static_cast<double>(ky * ky) / p2 + static_cast<double>(kx * kx) / p2);
}

std::vector<double> blur_factors(std::size_t patch, double tau) {
  if (tau < 0.0) throw std::invalid_argument("dissipation time must be non-negative");
  std::vector<double> f(patch * patch);
  for (std::size_t ky = 0; ky < patch; ++ky)
    for (std::size_t kx = 0; kx < patch; ++kx) f[ky * patch + kx] = std::exp(heat_eigenvalue(ky, kx, patch) * tau);
  return f;
}

Tensor blur_coefficients(const Tensor& coeffs, std::size_t patch, double tau) {
  const auto factors = blur_factors(patch, tau);
  const auto [outer, h, w] = layout_of(coeffs);
  if (h % patch || w % patch) throw DimensionError("coefficient grid is not tiled by the patch size");
  Tensor out = coeffs;
  double* d = out.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) d[(o * h + y) * w + x] *= factors[(y % patch) * patch + x % patch];
  return out;
}

PatchSpectrum blur_apply(const PatchSpectrum& spec, double tau) {
  PatchSpectrum out = spec;
  out.coeffs = blur_coefficients(spec.coeffs, spec.patch, tau);
  return out;
}

WaveletBands haar_analyze(const Tensor& x) {
  const auto [outer, h, w] = layout_of(x);
  if (h % 2 || w % 2) throw DimensionError("Haar analysis needs even extents, got " + shape_to_string(x.shape()));
  const Shape half = with_spatial(x.shape(), h / 2, w / 2);
  WaveletBands b{Tensor(half), Tensor(half), Tensor(half), Tensor(half)};
  const std::size_t hh = h / 2, hw = w / 2;
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = x.data().data() + o * h * w;
    for (std::size_t y = 0; y < hh; ++y)
      for (std::size_t c = 0; c < hw; ++c) {
        const double a = src[(2 * y) * w + 2 * c];
        const double bb = src[(2 * y) * w + 2 * c + 1];
        const double cc = src[(2 * y + 1) * w + 2 * c];
        const double d = src[(2 * y + 1) * w + 2 * c + 1];
        const std::size_t i = (o * hh + y) * hw + c;
        b.ll[i] = 0.5 * (a + bb + cc + d);
        b.lh[i] = 0.5 * (a + bb - cc - d);
        b.hl[i] = 0.5 * (a - bb + cc - d);
        b.hh[i] = 0.5 * (a - bb - cc + d);
      }
  }
  return b;
}

Tensor haar_synthesize(const WaveletBands& b) {
  for (const Tensor* t : {&b.lh, &b.hl, &b.hh}) {
    if (t->shape() != b.ll.shape()) throw DimensionError("Haar synthesis bands disagree in shape");
  }
  const auto [outer, hh, hw] = layout_of(b.ll);
  const std::size_t w = 2 * hw;
  Tensor out(with_spatial(b.ll.shape(), 2 * hh, w));
  for (std::size_t o = 0; o < outer; ++o) {
    double* dst = out.data().data() + o * 4 * hh * hw;
    for (std::size_t y = 0; y < hh; ++y)
      for (std::size_t c = 0; c < hw; ++c) {
        const std::size_t i = (o * hh + y) * hw + c;
        const double ll = b.ll[i], lh = b.lh[i], hl = b.hl[i], hhv = b.hh[i];
        dst[(2 * y) * w + 2 * c] = 0.5 * (ll + lh + hl + hhv);
        dst[(2 * y) * w + 2 * c + 1] = 0.5 * (ll + lh - hl - hhv);
        dst[(2 * y + 1) * w + 2 * c] = 0.5 * (ll - lh + hl - hhv);
        dst[(2 * y + 1) * w + 2 * c + 1] = 0.5 * (ll - lh - hl + hhv);
      }
  }
  return out;
}

WaveletPyramid dwt2(const Tensor& frame, std::size_t levels) {
  const auto [outer, h, w] = layout_of(frame);
  const std::size_t div = std::size_t{1} << levels;
  if (h % div || w % div) {
    throw DimensionError("frame " + shape_to_string(frame.shape()) + " is not divisible by 2^" +
                         std::to_string(levels));
  }
  WaveletPyramid pyr;
  pyr.ll = frame;
  for (std::size_t level = 0; level < levels; ++level) {
    WaveletBands b = haar_analyze(pyr.ll);
    pyr.ll = std::move(b.ll);
    b.ll = Tensor();
    pyr.details.push_back(std::move(b));
  }
  return pyr;
}

Tensor idwt2(const WaveletPyramid& pyramid) {
  Tensor ll = pyramid.ll;
  for (auto it = pyramid.details.rbegin(); it != pyramid.details.rend(); ++it) {
    ll = haar_synthesize(WaveletBands{std::move(ll), it->lh, it->hl, it->hh});
  }
  return ll;
}

Tensor wavelet_pack(const Tensor& chw, std::size_t levels) {
  if (chw.rank() != 3) throw DimensionError("wavelet_pack expects (C,H,W)");
  Tensor x = chw;
  for (std::size_t level = 0; level < levels; ++level) {
    WaveletBands b = haar_analyze(x);
    const Tensor parts[] = {b.ll, b.lh, b.hl, b.hh};
    x = concat_rows(parts);
  }
  return x;
}

Tensor wavelet_unpack(const Tensor& packed, std::size_t levels) {
  if (packed.rank() != 3) throw DimensionError("wavelet_unpack expects (C,H,W)");
  Tensor x = packed;
  for (std::size_t level = 0; level < levels; ++level) {
    const std::size_t c = x.dim(0);
    if (c % 4) throw DimensionError("packed channel count is not divisible by 4");
    const std::size_t q = c / 4, plane = x.dim(1) * x.dim(2);
    auto part = [&](std::size_t i) {
      std::vector<double> d(x.values().begin() + static_cast<std::ptrdiff_t>(i * q * plane),
                            x.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * q * plane));
      return Tensor({q, x.dim(1), x.dim(2)}, std::move(d));
    };
    x = haar_synthesize(WaveletBands{part(0), part(1), part(2), part(3)});
  }
  return x;
}

Tensor luma(const Tensor& frame) {
  if (frame.rank() == 2) return frame;
  if (frame.rank() != 3) throw DimensionError("luma expects (H,W) or (C,H,W)");
  const std::size_t h = frame.dim(1), w = frame.dim(2);
  if (frame.dim(0) == 1) return frame.reshaped({h, w});
  if (frame.dim(0) != 3) throw DimensionError("luma expects 1 or 3 channels");
  Tensor y({h, w});
  const std::size_t plane = h * w;
  for (std::size_t i = 0; i < plane; ++i)
    y[i] = 0.299 * frame[i] + 0.587 * frame[plane + i] + 0.114 * frame[2 * plane + i];
  return y;
}

namespace {

// In-place 1D DFT of `n` strided complex values.
void dft_strided(std::complex<double>* data, std::size_t n, std::size_t stride,
                 const std::vector<std::complex<double>>& twiddle, std::vector<std::complex<double>>& scratch) {
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) s += data[j * stride] * twiddle[(j * k) % n];
    scratch[k] = s;
  }
  for (std::size_t k = 0; k < n; ++k) data[k * stride] = scratch[k];
}

std::vector<std::complex<double>> twiddles(std::size_t n) {
  std::vector<std::complex<double>> t(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    t[j] = {std::cos(a), std::sin(a)};
  }
  return t;
}

}  // namespace

PSDProfile psd_radial(const Tensor& frame) {
  const Tensor y = luma(frame);
  const std::size_t h = y.dim(0), w = y.dim(1);
  std::vector<std::complex<double>> f(h * w);
  for (std::size_t i = 0; i < h * w; ++i) f[i] = y[i];
  std::vector<std::complex<double>> scratch(std::max(h, w));
  const auto tw = twiddles(w);
  for (std::size_t r = 0; r < h; ++r) dft_strided(f.data() + r * w, w, 1, tw, scratch);
  const auto th = twiddles(h);
  for (std::size_t c = 0; c < w; ++c) dft_strided(f.data() + c, h, w, th, scratch);

  const std::size_t nbins = std::min(h, w) / 2;
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::size_t> count(nbins, 0);
  const double norm = 1.0 / static_cast<double>(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const double fy = static_cast<double>(r <= h / 2 ? r : h - r);
    for (std::size_t c = 0; c < w; ++c) {
      const double fx = static_cast<double>(c <= w / 2 ? c : w - c);
      const auto bin = static_cast<std::size_t>(std::floor(std::sqrt(fy * fy + fx * fx)));
      if (bin >= nbins) continue;
      sum[bin] += std::norm(f[r * w + c]) * norm;
      ++count[bin];
    }
  }
  PSDProfile profile;
  profile.bins.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) profile.bins[b] = count[b] ? sum[b] / static_cast<double>(count[b]) : 0.0;
  return profile;
}

}  // namespace seeclear
