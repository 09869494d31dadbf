#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seeclear/tensor.hpp"

namespace seeclear {

/// Textured shapes drifting over a smooth background: (m, 3, H, W) in
/// [0, 1]. Each shape moves by a fixed seeded velocity per frame.
Tensor moving_shapes_clip(std::size_t frames, std::size_t height, std::size_t width, std::uint64_t seed);

/// Independent single frames (3, H, W), one scene per seed offset.
std::vector<Tensor> synthetic_corpus(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed);

/// Bicubic (antialiased) downscale of every frame by `scale`.
Tensor downsample_clip(const Tensor& hr_clip, std::size_t scale);

}  // namespace seeclear
