#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seeclear/spectral.hpp"
#include "test_util.hpp"

using namespace seeclear;
using seeclear::test::random_normal;
using seeclear::test::random_tensor;

namespace {

double energy(const Tensor& t) {
  double e = 0.0;
  for (double v : t.values()) e += v * v;
  return e;
}

}  // namespace

TEST_CASE("DCT basis is orthonormal") {
  for (std::size_t p : {1u, 2u, 4u, 8u, 16u}) {
    const Tensor c = dct_matrix(p);
    CHECK(max_abs_diff(matmul(transpose(c), c), Tensor::identity(p)) < 1e-12);
  }
}

TEST_CASE("DCT of a constant patch is a single DC term") {
  const PatchSpectrum s = dct2_patches(Tensor({8, 8}, 1.0), 8);
  CHECK(std::abs(s.coeffs[0] - 8.0) < 1e-12);
  for (std::size_t i = 1; i < 64; ++i) CHECK(std::abs(s.coeffs[i]) < 1e-12);
}

TEST_CASE("DCT round trips and preserves energy") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor f = random_tensor({3, 32, 24}, seed);
    const PatchSpectrum s = dct2_patches(f, 8);
    CHECK(max_abs_diff(idct2_patches(s), f) < 1e-10);
    CHECK(std::abs(energy(s.coeffs) - energy(f)) < 1e-9);
  }
  // Non-divisible extents are padded and cropped back.
  const Tensor odd = random_tensor({2, 30, 27}, 5);
  const PatchSpectrum s = dct2_patches(odd, 8);
  CHECK(s.coeffs.shape() == Shape{2, 32, 32});
  CHECK(max_abs_diff(idct2_patches(s), odd) < 1e-10);
}

TEST_CASE("heat eigenvalues and blur factors") {
  CHECK(heat_eigenvalue(0, 0, 8) == 0.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(heat_eigenvalue(1, 1, 8) == doctest::Approx(-pi2 / 32.0).epsilon(1e-15));
  const auto f = blur_factors(8, 1.0);
  CHECK(f[0] == 1.0);
  CHECK(f[1 * 8 + 1] == doctest::Approx(std::exp(-pi2 / 32.0)).epsilon(1e-15));
  for (std::size_t i = 1; i < 64; ++i) CHECK(f[i] < 1.0);
}

TEST_CASE("blur is a semigroup that preserves DC") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PatchSpectrum s = dct2_patches(random_tensor({2, 16, 16}, seed), 8);
    const double a = 0.1 * static_cast<double>(seed + 1), b = 0.37;
    CHECK(max_abs_diff(blur_apply(blur_apply(s, a), b).coeffs, blur_apply(s, a + b).coeffs) < 1e-12);
    CHECK(max_abs_diff(blur_apply(s, 0.0).coeffs, s.coeffs) == 0.0);
    const PatchSpectrum big = blur_apply(s, 50.0 * a);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t py = 0; py < 16; py += 8)
        for (std::size_t px = 0; px < 16; px += 8) CHECK(big.coeffs.at(c, py, px) == s.coeffs.at(c, py, px));
  }
  CHECK_THROWS_AS(blur_apply(dct2_patches(Tensor({8, 8}), 8), -0.1), std::invalid_argument);
}

TEST_CASE("long dissipation flattens each patch to its mean") {
  const Tensor f = random_tensor({16, 16}, 3);
  const Tensor flat = idct2_patches(blur_apply(dct2_patches(f, 8), 1e3));
  for (std::size_t py = 0; py < 16; py += 8)
    for (std::size_t px = 0; px < 16; px += 8) {
      double mean = 0.0;
      for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) mean += f.at(py + y, px + x) / 64.0;
      for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) CHECK(std::abs(flat.at(py + y, px + x) - mean) < 1e-12);
    }
}

TEST_CASE("Haar DWT") {
  // Constant input: LL gains a factor 2 per level, details vanish.
  const WaveletPyramid p = dwt2(Tensor({1, 8, 8}, 1.0), 2);
  CHECK(p.levels() == 2);
  for (double v : p.ll.values()) CHECK(std::abs(v - 4.0) < 1e-12);
  for (const auto& b : p.details)
    for (const Tensor* t : {&b.lh, &b.hl, &b.hh}) CHECK(max_abs(*t) < 1e-12);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor f = random_tensor({3, 64, 64}, seed);
    const WaveletPyramid w = dwt2(f, 3);
    CHECK(w.details[0].lh.shape() == Shape{3, 32, 32});
    CHECK(w.ll.shape() == Shape{3, 8, 8});
    CHECK(max_abs_diff(idwt2(w), f) < 1e-10);
    double e = energy(w.ll);
    for (const auto& b : w.details) e += energy(b.lh) + energy(b.hl) + energy(b.hh);
    CHECK(std::abs(e - energy(f)) < 1e-9);
  }
  CHECK_THROWS_AS(dwt2(Tensor({1, 6, 6}), 2), DimensionError);
}

TEST_CASE("wavelet packet layout") {
  const Tensor f = random_tensor({3, 16, 16}, 1);
  const Tensor packed = wavelet_pack(f, 2);
  CHECK(packed.shape() == Shape{48, 4, 4});
  CHECK(max_abs_diff(wavelet_unpack(packed, 2), f) < 1e-12);
  CHECK(std::abs(energy(packed) - energy(f)) < 1e-10);
  CHECK(wavelet_pack(f, 0) == f);
}

TEST_CASE("luma weights") {
  Tensor rgb({3, 1, 1});
  rgb[0] = 1.0;
  CHECK(luma(rgb)[0] == doctest::Approx(0.299));
  Tensor white({3, 2, 2}, 1.0);
  const Tensor lw = luma(white);
  for (double v : lw.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("radial power spectrum") {
  const Tensor c({1, 32, 32}, 0.5);
  const PSDProfile pc = psd_radial(c);
  CHECK(pc.bins.size() == 16);
  CHECK(pc.bins[0] == doctest::Approx(0.25 * 32 * 32).epsilon(1e-12));
  for (std::size_t b = 1; b < 16; ++b) CHECK(pc.bins[b] < 1e-20);

  // A horizontal cosine at frequency 5 peaks in bin 5.
  Tensor cosine({1, 32, 32});
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) cosine.at(0, y, x) = std::cos(2 * std::numbers::pi * 5 * x / 32.0);
  const auto pk = psd_radial(cosine).bins;
  CHECK(std::max_element(pk.begin(), pk.end()) - pk.begin() == 5);

  // White noise is flat on average.
  std::vector<double> avg(32, 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = psd_radial(random_normal({1, 64, 64}, seed)).bins;
    for (std::size_t i = 0; i < 32; ++i) avg[i] += b[i] / 20.0;
  }
  double m = 0.0, v = 0.0;
  for (std::size_t i = 1; i < 32; ++i) m += avg[i] / 31.0;
  for (std::size_t i = 1; i < 32; ++i) v += (avg[i] - m) * (avg[i] - m) / 31.0;
  CHECK(m == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::sqrt(v) / m < 0.2);
}
