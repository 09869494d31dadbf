#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "seeclear/rng.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear::test {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  RandomStream rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_normal(Shape shape, std::uint64_t seed) {
  RandomStream rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal();
  return t;
}

// Scratch directory for file-based tests, wiped on creation.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("SEECLEAR_TEST_TMP");
  std::filesystem::path base = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "seeclear_tests";
  auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace seeclear::test
