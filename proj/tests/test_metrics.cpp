#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seeclear/metrics.hpp"
#include "seeclear/resample.hpp"
#include "test_util.hpp"

using namespace seeclear;
using seeclear::test::random_tensor;

namespace {

// Direct 2D evaluation of the SSIM map on a single plane.
double brute_ssim(const Tensor& x, const Tensor& y) {
  const int n = 11;
  double w[11][11], z = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
  const std::size_t h = x.dim(0), wd = x.dim(1);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t oy = 0; oy + n <= h; ++oy)
    for (std::size_t ox = 0; ox + n <= wd; ++ox) {
      double mx = 0, my = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          mx += w[i][j] / z * x.at(oy + i, ox + j);
          my += w[i][j] / z * y.at(oy + i, ox + j);
        }
      double vx = 0, vy = 0, cv = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double dx = x.at(oy + i, ox + j) - mx, dy = y.at(oy + i, ox + j) - my;
          vx += w[i][j] / z * dx * dx;
          vy += w[i][j] / z * dy * dy;
          cv += w[i][j] / z * dx * dy;
        }
      const double c1 = 1e-4, c2 = 9e-4;
      total += (2 * mx * my + c1) * (2 * cv + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("psnr") {
  const Tensor a = random_tensor({3, 16, 16}, 1, 0, 1);
  CHECK(psnr(a, a) == kPsnrCap);
  Tensor b = a;
  for (double& v : b.values()) v += 0.1;
  CHECK(psnr(a, b, PsnrMode::kRGB) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(a, b, PsnrMode::kY) == doctest::Approx(20.0).epsilon(1e-12));
  // Y mode sees only the luma difference.
  Tensor c = a;
  for (std::size_t i = 0; i < 256; ++i) c[i] += 0.1;
  CHECK(psnr(a, c, PsnrMode::kY) == doctest::Approx(10.0 * std::log10(1.0 / (0.0299 * 0.0299))).epsilon(1e-9));
  CHECK(psnr(a, c, PsnrMode::kRGB) == doctest::Approx(10.0 * std::log10(3.0 / 0.01)).epsilon(1e-9));
  CHECK_THROWS_AS(psnr(a, random_tensor({3, 16, 8}, 1)), DimensionError);
  Tensor bad = a;
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(psnr(a, bad), std::domain_error);
}

TEST_CASE("ssim") {
  const Tensor a = random_tensor({1, 24, 20}, 2, 0, 1);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  const Tensor b = random_tensor({1, 24, 20}, 3, 0, 1);
  CHECK(std::abs(ssim(a, b) - brute_ssim(a.reshaped({24, 20}), b.reshaped({24, 20}))) < 1e-9);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));

  // Colour frames are scored on luma.
  const Tensor x = random_tensor({3, 16, 16}, 4, 0, 1), y = random_tensor({3, 16, 16}, 5, 0, 1);
  CHECK(std::abs(ssim(x, y) - brute_ssim(luma(x), luma(y))) < 1e-9);

  Tensor inverted = a, nudged = a;
  for (double& v : inverted.values()) v = 1.0 - v;
  for (double& v : nudged.values()) v += 0.01;
  CHECK(ssim(a, inverted) < ssim(a, nudged));
  CHECK_THROWS_AS(ssim(Tensor({1, 8, 8}), Tensor({1, 8, 8})), DimensionError);
}

TEST_CASE("charbonnier") {
  const Tensor a = random_tensor({2, 3, 3}, 6);
  CHECK(charbonnier(a, a) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(charbonnier(Tensor({1}, 3.0), Tensor({1}, 0.0), 4.0) == doctest::Approx(5.0).epsilon(1e-15));
  const Tensor b = random_tensor({2, 3, 3}, 7);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]) / a.size();
  CHECK(charbonnier(a, b, 1e-9) == doctest::Approx(l1).epsilon(1e-9));
  CHECK_THROWS_AS(charbonnier(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("psd distance") {
  const PSDProfile p = psd_radial(random_tensor({3, 32, 32}, 8, 0, 1));
  CHECK(psd_distance(p, p, Band::kLow) == 0.0);
  PSDProfile scaled = p;
  for (double& v : scaled.bins) v *= std::exp(1.0);
  CHECK(psd_distance(p, scaled, Band::kLow) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(psd_distance(p, scaled, Band::kHigh) == doctest::Approx(1.0).epsilon(1e-6));
  const PSDProfile q = psd_radial(random_tensor({3, 32, 32}, 9, 0, 1));
  CHECK(psd_distance(p, q, Band::kHigh) == psd_distance(q, p, Band::kHigh));

  // Quartile bands: 16 bins -> bins 0..3 and 12..15.
  PSDProfile x{std::vector<double>(16, 1.0)}, y = x;
  y.bins[4] = 100.0;
  CHECK(psd_distance(x, y, Band::kLow) == 0.0);
  CHECK(psd_distance(x, y, Band::kHigh) == 0.0);
  y.bins[12] = std::exp(4.0);
  CHECK(psd_distance(x, y, Band::kHigh) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(psd_distance(x, PSDProfile{std::vector<double>(8, 1.0)}, Band::kLow), DimensionError);
}

TEST_CASE("report and csv") {
  std::vector<Tensor> a{random_tensor({3, 16, 16}, 1, 0, 1), random_tensor({3, 16, 16}, 2, 0, 1)};
  std::vector<Tensor> b = a;
  for (double& v : b[1].values()) v += 0.1;
  const MetricReport r = evaluate(a, b);
  CHECK(r.frames.size() == 2);
  CHECK(r.frames[0].psnr == kPsnrCap);
  CHECK(r.frames[1].psnr == doctest::Approx(20.0));
  CHECK(r.mean_psnr() == doctest::Approx((99.0 + 20.0) / 2));
  std::ostringstream os;
  write_csv(os, r);
  const std::string s = os.str();
  CHECK(s.rfind("index,psnr,ssim,charbonnier\n0,99,", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK_THROWS_AS(evaluate(a, {b[0]}), DimensionError);
}

TEST_CASE("bicubic resize") {
  // Constants survive in both directions.
  const Tensor flat({3, 12, 16}, 0.4);
  const Tensor big = resize_bicubic(flat, 48, 64), small = resize_bicubic(flat, 3, 4);
  for (double v : big.values()) CHECK(std::abs(v - 0.4) < 1e-14);
  for (double v : small.values()) CHECK(std::abs(v - 0.4) < 1e-14);
  // Linear ramps are reproduced exactly away from the mirrored border.
  Tensor ramp({1, 8, 8});
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) ramp.at(0, y, x) = 0.1 * static_cast<double>(x);
  const Tensor up = resize_bicubic(ramp, 16, 16);
  for (std::size_t x = 4; x < 12; ++x) {
    const double src = (static_cast<double>(x) + 0.5) / 2.0 - 0.5;
    CHECK(std::abs(up.at(0, 7, x) - 0.1 * src) < 1e-12);
  }
  CHECK(resize_bicubic(ramp, 8, 8) == ramp);
}
