#include "seeclear/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace seeclear {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
}

// (H,W) plane for SSIM / Y-PSNR.
Tensor plane(const Tensor& t) {
  if (t.rank() == 2) return t;
  if (t.rank() == 3 && t.dim(0) == 1) return t.reshaped({t.dim(1), t.dim(2)});
  if (t.rank() == 3 && t.dim(0) == 3) return luma(t);
  throw DimensionError("expected (H,W), (1,H,W) or (3,H,W), got " + shape_to_string(t.shape()));
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double c = static_cast<double>(size - 1) / 2.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = static_cast<double>(i) - c;
    g[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  const double s = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& v : g) v /= s;
  return g;
}

// Valid-mode separable filtering of an (H,W) plane.
Tensor filter_valid(const Tensor& x, const std::vector<double>& g) {
  const std::size_t n = g.size(), h = x.dim(0), w = x.dim(1);
  const std::size_t oh = h - n + 1, ow = w - n + 1;
  Tensor rows({h, ow});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t xx = 0; xx < ow; ++xx) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[k] * x.at(y, xx + k);
      rows.at(y, xx) = s;
    }
  Tensor out({oh, ow});
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t xx = 0; xx < ow; ++xx) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[k] * rows.at(y + k, xx);
      out.at(y, xx) = s;
    }
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, PsnrMode mode) {
  require_same(a, b, "psnr");
  double mse = 0.0;
  if (mode == PsnrMode::kY && a.rank() == 3 && a.dim(0) == 3) {
    const Tensor ya = luma(a), yb = luma(b);
    for (std::size_t i = 0; i < ya.size(); ++i) mse += (ya[i] - yb[i]) * (ya[i] - yb[i]);
    mse /= static_cast<double>(ya.size());
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.size());
  }
  if (!std::isfinite(mse)) throw std::domain_error("psnr of non-finite frames");
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same(a, b, "ssim");
  const Tensor x = plane(a), y = plane(b);
  constexpr std::size_t kWin = 11;
  if (x.dim(0) < kWin || x.dim(1) < kWin) throw DimensionError("ssim needs frames of at least 11x11");
  const auto g = gaussian_window(kWin, 1.5);
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  const Tensor mx = filter_valid(x, g), my = filter_valid(y, g);
  const Tensor sxx = filter_valid(hadamard(x, x), g);
  const Tensor syy = filter_valid(hadamard(y, y), g);
  const Tensor sxy = filter_valid(hadamard(x, y), g);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

double charbonnier(const Tensor& a, const Tensor& b, double eps) {
  require_same(a, b, "charbonnier");
  if (!(eps > 0.0)) throw std::invalid_argument("charbonnier eps must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += std::sqrt(d * d + eps * eps);
  }
  return s / static_cast<double>(a.size());
}

double psd_distance(const PSDProfile& a, const PSDProfile& b, Band band, double delta) {
  if (a.bins.size() != b.bins.size()) {
    throw DimensionError("psd profiles have " + std::to_string(a.bins.size()) + " and " +
                         std::to_string(b.bins.size()) + " bins");
  }
  const std::size_t n = a.bins.size();
  const std::size_t q = std::max<std::size_t>(1, n / 4);
  if (n == 0) throw DimensionError("empty psd profile");
  const std::size_t first = band == Band::kLow ? 0 : n - q;
  double s = 0.0;
  for (std::size_t i = first; i < first + q; ++i) s += std::abs(std::log(a.bins[i] + delta) - std::log(b.bins[i] + delta));
  return s / static_cast<double>(q);
}

double MetricReport::mean_psnr() const {
  double s = 0.0;
  for (const auto& f : frames) s += f.psnr;
  return frames.empty() ? 0.0 : s / static_cast<double>(frames.size());
}

double MetricReport::mean_ssim() const {
  double s = 0.0;
  for (const auto& f : frames) s += f.ssim;
  return frames.empty() ? 0.0 : s / static_cast<double>(frames.size());
}

double MetricReport::mean_charbonnier() const {
  double s = 0.0;
  for (const auto& f : frames) s += f.charbonnier;
  return frames.empty() ? 0.0 : s / static_cast<double>(frames.size());
}

MetricReport evaluate(const std::vector<Tensor>& a, const std::vector<Tensor>& b, PsnrMode mode) {
  if (a.size() != b.size()) throw DimensionError("frame counts differ");
  MetricReport r;
  for (std::size_t i = 0; i < a.size(); ++i) r.frames.push_back({i, psnr(a[i], b[i], mode), ssim(a[i], b[i]), charbonnier(a[i], b[i])});
  return r;
}

void write_csv(std::ostream& os, const MetricReport& report) {
  os << "index,psnr,ssim,charbonnier\n" << std::setprecision(10);
  for (const auto& f : report.frames) os << f.index << ',' << f.psnr << ',' << f.ssim << ',' << f.charbonnier << '\n';
}

}  // namespace seeclear
