#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "seeclear/category.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

/// Malformed or missing input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StoreType : unsigned char { kF32 = 0, kF64 = 1 };

// Tensor record: "SEET", u8 version (1), u8 dtype, u8 ndim, u8 pad,
// ndim x u32 dims, little-endian row-major payload. A file may hold
// several records back to back.
void write_tensor(std::ostream& os, const Tensor& t, StoreType type = StoreType::kF64);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t, StoreType type = StoreType::kF64);
Tensor load_tensor(const std::filesystem::path& path);

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor>& ts);
std::vector<Tensor> load_tensors(const std::filesystem::path& path);

/// Bank as records: updates count (shape {1}) then C_j, T_j per group.
void save_bank(const std::filesystem::path& path, const MemoryBank& bank);
MemoryBank load_bank(const std::filesystem::path& path);

/// 8-bit PNG -> (C, H, W) in [0, 1]. Gray stays 1 channel, alpha is dropped.
Tensor read_png(const std::filesystem::path& path);
/// Clamp to [0, 1], round to 8 bits; 1 or 3 channels.
void write_png(const std::filesystem::path& path, const Tensor& chw);

/// Sorted *.png files of a directory; throws DataError when none exist.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace seeclear
