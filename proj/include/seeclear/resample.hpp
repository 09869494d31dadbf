#pragma once

#include <cstddef>

#include "seeclear/tensor.hpp"

namespace seeclear {

/// Bicubic resize of a (C,H,W) frame following MATLAB imresize: Keys cubic
/// (a = -0.5), symmetric boundary, and an antialiasing (widened) kernel
/// when shrinking.
Tensor resize_bicubic(const Tensor& chw, std::size_t height, std::size_t width);

}  // namespace seeclear
