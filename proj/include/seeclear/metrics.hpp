#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "seeclear/spectral.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

enum class PsnrMode { kY, kRGB };

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) for images in [0, 1], capped at 99 dB. Throws
/// std::domain_error when either frame holds NaN or infinity.
double psnr(const Tensor& a, const Tensor& b, PsnrMode mode = PsnrMode::kY);

/// Mean SSIM over the luma plane (or the single plane of an (H,W) or
/// (1,H,W) input). 11x11 Gaussian window, sigma 1.5, K1 = 0.01, K2 = 0.03,
/// dynamic range 1, valid positions only.
double ssim(const Tensor& a, const Tensor& b);

/// Mean over elements of sqrt(d^2 + eps^2).
double charbonnier(const Tensor& a, const Tensor& b, double eps = 1e-3);

enum class Band { kLow, kHigh };

/// Mean |log(a + delta) - log(b + delta)| over the bottom (low) or top
/// (high) quartile of radial bins.
double psd_distance(const PSDProfile& a, const PSDProfile& b, Band band, double delta = 1e-10);

struct FrameMetrics {
  std::size_t index = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  double charbonnier = 0.0;
};

struct MetricReport {
  std::vector<FrameMetrics> frames;

  double mean_psnr() const;
  double mean_ssim() const;
  double mean_charbonnier() const;
};

/// Per-frame metrics of two equally shaped frame lists.
MetricReport evaluate(const std::vector<Tensor>& a, const std::vector<Tensor>& b, PsnrMode mode = PsnrMode::kY);

/// Header "index,psnr,ssim,charbonnier" then one row per frame.
void write_csv(std::ostream& os, const MetricReport& report);

}  // namespace seeclear
