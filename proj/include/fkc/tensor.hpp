#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace fkc {

enum class StoragePrecision { f32, f64 };

/// Dense row-major (channels, height, width) feature map. Values are held
/// as 64-bit floats regardless of the on-disk storage width.
struct Tensor3 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t c, std::size_t h, std::size_t w);

  std::size_t size() const { return channels * height * width; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
};

/// Dense row-major (c_out, c_in, k_h, k_w) kernel weight tensor.
struct Tensor4 {
  std::size_t c_out = 0;
  std::size_t c_in = 0;
  std::size_t k_h = 0;
  std::size_t k_w = 0;
  std::vector<double> data;

  Tensor4() = default;
  Tensor4(std::size_t o, std::size_t i, std::size_t kh, std::size_t kw);

  std::size_t size() const { return c_out * c_in * k_h * k_w; }
  std::size_t filter_count() const { return c_out * c_in; }
  std::size_t filter_size() const { return k_h * k_w; }

  double& at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) {
    return data[((o * c_in + i) * k_h + y) * k_w + x];
  }
  double at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
    return data[((o * c_in + i) * k_h + y) * k_w + x];
  }

  /// The k_h*k_w weight slice of filter (o, i).
  std::span<double> filter(std::size_t o, std::size_t i) {
    return {data.data() + (o * c_in + i) * filter_size(), filter_size()};
  }
  std::span<const double> filter(std::size_t o, std::size_t i) const {
    return {data.data() + (o * c_in + i) * filter_size(), filter_size()};
  }
};

using AnyTensor = std::variant<Tensor3, Tensor4>;

// FKT1 container. Magic "FKT1", rank byte (3|4), element width byte (4|8),
// two reserved zero bytes, rank x u64 little-endian extents, then the
// little-endian IEEE-754 payload in row-major order. No padding anywhere;
// any size mismatch is a FormatError, non-finite payload values a DataError.
AnyTensor load_tensor(const std::filesystem::path& path);
Tensor3 load_tensor3(const std::filesystem::path& path);
Tensor4 load_tensor4(const std::filesystem::path& path);

void save_tensor(const Tensor3& t, const std::filesystem::path& path,
                 StoragePrecision precision = StoragePrecision::f64);
void save_tensor(const Tensor4& t, const std::filesystem::path& path,
                 StoragePrecision precision = StoragePrecision::f64);

// Headerless import: a bare little-endian float32 payload with extents
// supplied by the caller, for kernels exported straight out of a training
// framework.
Tensor4 import_raw_kernels(const std::filesystem::path& path, std::size_t c_out,
                           std::size_t c_in, std::size_t k_h, std::size_t k_w);
Tensor3 import_raw_map(const std::filesystem::path& path, std::size_t channels,
                       std::size_t height, std::size_t width);

}  // namespace fkc
