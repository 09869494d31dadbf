#include "seeclear/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seeclear/resample.hpp"
#include "seeclear/rng.hpp"

namespace seeclear {

namespace {

struct Shape2D {
  bool disc;
  double cy, cx, radius;
  double vy, vx;
  double color[3];
  double stripe_freq, stripe_angle;
};

struct Scene {
  double base[3];
  double grad[3];
  std::vector<Shape2D> shapes;
};

Scene make_scene(std::uint64_t seed, std::size_t height, std::size_t width) {
  RandomStream rng(seed, 0x5CE);
  Scene s;
  for (int c = 0; c < 3; ++c) {
    s.base[c] = rng.uniform(0.2, 0.6);
    s.grad[c] = rng.uniform(-0.2, 0.2);
  }
  const double extent = static_cast<double>(std::min(height, width));
  const int n = 3 + static_cast<int>(rng.uniform() * 4.0);
  for (int i = 0; i < n; ++i) {
    Shape2D sh{};
    sh.disc = rng.uniform() < 0.5;
    sh.cy = rng.uniform(0.1, 0.9) * static_cast<double>(height);
    sh.cx = rng.uniform(0.1, 0.9) * static_cast<double>(width);
    sh.radius = rng.uniform(0.08, 0.25) * extent;
    sh.vy = rng.uniform(-1.5, 1.5) * extent / 64.0;
    sh.vx = rng.uniform(-1.5, 1.5) * extent / 64.0;
    for (auto& c : sh.color) c = rng.uniform(0.05, 0.95);
    sh.stripe_freq = rng.uniform(0.05, 0.35);
    sh.stripe_angle = rng.uniform(0.0, std::numbers::pi);
    s.shapes.push_back(sh);
  }
  return s;
}

Tensor render(const Scene& s, std::size_t height, std::size_t width, double time) {
  Tensor out({3, height, width});
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double fy = static_cast<double>(y) / static_cast<double>(height);
      const double fx = static_cast<double>(x) / static_cast<double>(width);
      double px[3];
      for (int c = 0; c < 3; ++c) px[c] = s.base[c] + s.grad[c] * (fy - fx);
      for (const auto& sh : s.shapes) {
        const double dy = static_cast<double>(y) + 0.5 - (sh.cy + sh.vy * time);
        const double dx = static_cast<double>(x) + 0.5 - (sh.cx + sh.vx * time);
        const bool inside = sh.disc ? dy * dy + dx * dx <= sh.radius * sh.radius
                                    : std::abs(dy) <= sh.radius && std::abs(dx) <= sh.radius;
        if (!inside) continue;
        const double u = dy * std::sin(sh.stripe_angle) + dx * std::cos(sh.stripe_angle);
        const double stripe = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * sh.stripe_freq * u);
        for (int c = 0; c < 3; ++c) px[c] = sh.color[c] * (0.6 + 0.4 * stripe);
      }
      for (std::size_t c = 0; c < 3; ++c) out.at(c, y, x) = std::clamp(px[c], 0.0, 1.0);
    }
  return out;
}

}  // namespace

Tensor moving_shapes_clip(std::size_t frames, std::size_t height, std::size_t width, std::uint64_t seed) {
  const Scene scene = make_scene(seed, height, width);
  std::vector<Tensor> out;
  for (std::size_t f = 0; f < frames; ++f) out.push_back(render(scene, height, width, static_cast<double>(f)));
  return stack(out);
}

std::vector<Tensor> synthetic_corpus(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(render(make_scene(seed + i, height, width), height, width, 0.0));
  return out;
}

Tensor downsample_clip(const Tensor& hr_clip, std::size_t scale) {
  if (hr_clip.rank() != 4 || scale == 0 || hr_clip.dim(2) % scale || hr_clip.dim(3) % scale) {
    throw DimensionError("downsample_clip: " + shape_to_string(hr_clip.shape()) + " by " + std::to_string(scale));
  }
  std::vector<Tensor> out;
  for (std::size_t f = 0; f < hr_clip.dim(0); ++f) {
    out.push_back(resize_bicubic(hr_clip.slice(f), hr_clip.dim(2) / scale, hr_clip.dim(3) / scale));
  }
  return stack(out);
}

}  // namespace seeclear
