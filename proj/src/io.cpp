#include "seeclear/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace seeclear {

namespace {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

constexpr std::array<char, 4> kMagic = {'S', 'E', 'E', 'T'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated tensor record");
  return v;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t, StoreType type) {
  if (t.rank() > 255) throw DataError("tensor rank too large to store");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint8_t>(os, kVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(type));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  put<std::uint8_t>(os, 0);
  for (auto d : t.shape()) {
    if (d > UINT32_MAX) throw DataError("tensor dimension exceeds u32");
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  }
  if (type == StoreType::kF64) {
    os.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  } else {
    for (double v : t.values()) put<float>(os, static_cast<float>(v));
  }
  if (!os) throw DataError("failed writing tensor record");
}

Tensor read_tensor(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("bad tensor magic");
  const auto version = get<std::uint8_t>(is);
  if (version != kVersion) throw DataError("unsupported tensor version " + std::to_string(version));
  const auto dtype = get<std::uint8_t>(is);
  if (dtype > 1) throw DataError("unknown tensor dtype " + std::to_string(dtype));
  const auto ndim = get<std::uint8_t>(is);
  get<std::uint8_t>(is);
  Shape shape(ndim);
  for (auto& d : shape) d = get<std::uint32_t>(is);
  std::vector<double> data(shape_product(shape));
  if (dtype == 1) {
    if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw DataError("truncated tensor payload");
    }
  } else {
    for (auto& v : data) v = get<float>(is);
  }
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t, StoreType type) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_tensor(os, t, type);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return read_tensor(is);
}

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor>& ts) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& t : ts) write_tensor(os, t);
}

std::vector<Tensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::vector<Tensor> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_tensor(is));
  return out;
}

void save_bank(const std::filesystem::path& path, const MemoryBank& bank) {
  std::vector<Tensor> ts{Tensor({1}, {static_cast<double>(bank.updates)})};
  for (const auto& g : bank.groups) {
    ts.push_back(g.semantics);
    ts.push_back(g.textures);
  }
  save_tensors(path, ts);
}

MemoryBank load_bank(const std::filesystem::path& path) {
  const auto ts = load_tensors(path);
  if (ts.empty() || ts[0].size() != 1 || ts.size() % 2 != 1) throw DataError(path.string() + " is not a memory bank");
  MemoryBank bank;
  bank.updates = static_cast<std::size_t>(ts[0][0]);
  for (std::size_t i = 1; i < ts.size(); i += 2) bank.groups.push_back({ts[i], ts[i + 1]});
  return bank;
}

Tensor read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const std::size_t c = gray ? 1 : 3, h = image.height, w = image.width;
  Tensor out({c, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) out.at(ch, y, x) = buf[(y * w + x) * c + ch] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const Tensor& chw) {
  if (chw.rank() != 3 || (chw.dim(0) != 1 && chw.dim(0) != 3)) {
    throw DataError("PNG output needs (1|3, H, W), got " + shape_to_string(chw.shape()));
  }
  const std::size_t c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  std::vector<png_byte> buf(c * h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = std::clamp(chw.at(ch, y, x), 0.0, 1.0);
        buf[(y * w + x) * c + ch] = static_cast<png_byte>(std::lround(v * 255.0));
      }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = c == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  if (out.empty()) throw DataError("no PNG frames in " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace seeclear
