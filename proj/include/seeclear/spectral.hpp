#pragma once

#include <cstddef>
#include <vector>

#include "seeclear/tensor.hpp"

namespace seeclear {

/// Orthonormal DCT-II basis: row k holds the k-th cosine, so
/// coefficients = C * block * C^T and C^T C = I.
Tensor dct_matrix(std::size_t p);

/// Per-patch DCT coefficients tiling a frame.
///
/// `coeffs` has the frame's leading axes with the two spatial axes padded up
/// to multiples of `patch`; each patch x patch tile holds that tile's
/// coefficients with (0,0) the DC term. `height`/`width` remember the
/// unpadded extent so the inverse can crop.
struct PatchSpectrum {
  std::size_t patch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  Tensor coeffs;
};

/// Forward transform over the last two axes; non-divisible extents are
/// reflect-padded first.
PatchSpectrum dct2_patches(const Tensor& frame, std::size_t patch);
Tensor idct2_patches(const PatchSpectrum& spec);

/// Heat-equation eigenvalue for in-patch frequency (ky, kx):
/// -pi^2 (ky^2 + kx^2) / p^2. Exactly 0 at DC.
double heat_eigenvalue(std::size_t ky, std::size_t kx, std::size_t patch);

/// exp(lambda * tau) for every in-patch frequency, row-major p x p.
std::vector<double> blur_factors(std::size_t patch, double tau);

/// Multiply each coefficient by exp(lambda * tau). Throws for tau < 0.
PatchSpectrum blur_apply(const PatchSpectrum& spec, double tau);

/// Same as blur_apply on a raw coefficient tensor whose last two axes tile
/// `patch` x `patch` blocks.
Tensor blur_coefficients(const Tensor& coeffs, std::size_t patch, double tau);

struct WaveletBands {
  Tensor ll;
  Tensor lh;  // horizontal detail
  Tensor hl;  // vertical detail
  Tensor hh;  // diagonal detail
};

/// One level of the orthonormal 2D Haar analysis over the last two axes.
WaveletBands haar_analyze(const Tensor& x);
Tensor haar_synthesize(const WaveletBands& bands);

struct WaveletPyramid {
  /// details[0] is the finest level; `ll` is the coarsest approximation.
  std::vector<WaveletBands> details;
  Tensor ll;

  std::size_t levels() const { return details.size(); }
};

/// Recursive Haar decomposition of the LL band, `levels` times.
WaveletPyramid dwt2(const Tensor& frame, std::size_t levels);
Tensor idwt2(const WaveletPyramid& pyramid);

/// Full Haar packet on a (C,H,W) map: every band is split again at each
/// level and stacked on the channel axis, giving (C*4^levels, H/2^levels,
/// W/2^levels). Lossless; used as the network's input/output layout.
Tensor wavelet_pack(const Tensor& chw, std::size_t levels);
Tensor wavelet_unpack(const Tensor& packed, std::size_t levels);

/// Radially averaged power spectrum.
struct PSDProfile {
  std::vector<double> bins;
};

/// BT.601 luma of a 3-channel frame; single-channel frames pass through as (H,W).
Tensor luma(const Tensor& frame);

/// |DFT|^2 / (H*W) averaged over integer-radius annuli; floor(min(H,W)/2)
/// bins, bin 0 holding only the DC term.
PSDProfile psd_radial(const Tensor& frame);

}  // namespace seeclear
