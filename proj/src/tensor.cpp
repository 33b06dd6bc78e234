#include "fkc/tensor.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fkc/errors.hpp"
#include "wire.hpp"

namespace fkc {

namespace {

constexpr char kMagic[5] = "FKT1";

void check_extent(std::size_t e, const char* name) {
  if (e == 0) throw ArgumentError(std::string("tensor extent ") + name + " must be positive");
}

std::size_t checked_product(const std::uint64_t* extents, std::size_t rank,
                            const std::string& origin) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    if (extents[i] == 0) throw FormatError(origin + ": zero extent");
    if (count > std::numeric_limits<std::uint64_t>::max() / extents[i])
      throw FormatError(origin + ": extent product overflows");
    count *= extents[i];
  }
  return static_cast<std::size_t>(count);
}

void append_payload(std::vector<std::uint8_t>& out, const std::vector<double>& data,
                    StoragePrecision precision) {
  if (precision == StoragePrecision::f64) {
    for (double v : data) wire::put_f64(out, v);
  } else {
    for (double v : data) wire::put_f32(out, static_cast<float>(v));
  }
}

std::vector<double> read_payload(wire::Reader& r, std::size_t count, int width) {
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v = width == 8 ? r.f64() : static_cast<double>(r.f32());
    if (!std::isfinite(v))
      throw DataError(r.origin + ": non-finite value at index " + std::to_string(i));
    data[i] = v;
  }
  return data;
}

void save_impl(const std::filesystem::path& path, std::uint8_t rank,
               const std::uint64_t* extents, const std::vector<double>& data,
               StoragePrecision precision) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + rank * 8 + data.size() * (precision == StoragePrecision::f64 ? 8 : 4));
  for (int i = 0; i < 4; ++i) wire::put_u8(out, static_cast<std::uint8_t>(kMagic[i]));
  wire::put_u8(out, rank);
  wire::put_u8(out, precision == StoragePrecision::f64 ? 8 : 4);
  wire::put_u8(out, 0);
  wire::put_u8(out, 0);
  for (std::uint8_t i = 0; i < rank; ++i) wire::put_u64(out, extents[i]);
  append_payload(out, data, precision);
  wire::write_file(path, out);
}

}  // namespace

Tensor3::Tensor3(std::size_t c, std::size_t h, std::size_t w)
    : channels(c), height(h), width(w), data(c * h * w, 0.0) {
  check_extent(c, "channels");
  check_extent(h, "height");
  check_extent(w, "width");
}

Tensor4::Tensor4(std::size_t o, std::size_t i, std::size_t kh, std::size_t kw)
    : c_out(o), c_in(i), k_h(kh), k_w(kw), data(o * i * kh * kw, 0.0) {
  check_extent(o, "c_out");
  check_extent(i, "c_in");
  check_extent(kh, "k_h");
  check_extent(kw, "k_w");
}

AnyTensor load_tensor(const std::filesystem::path& path) {
  auto bytes = wire::read_file(path);
  wire::Reader r(bytes, path.string());
  r.expect_magic(kMagic);
  const std::uint8_t rank = r.u8();
  if (rank != 3 && rank != 4)
    throw FormatError(r.origin + ": rank must be 3 or 4, got " + std::to_string(rank));
  const std::uint8_t width = r.u8();
  if (width != 4 && width != 8)
    throw FormatError(r.origin + ": element width must be 4 or 8, got " + std::to_string(width));
  if (r.u8() != 0 || r.u8() != 0) throw FormatError(r.origin + ": reserved bytes not zero");

  std::uint64_t extents[4] = {0, 0, 0, 0};
  for (std::uint8_t i = 0; i < rank; ++i) extents[i] = r.u64();
  const std::size_t count = checked_product(extents, rank, r.origin);

  if (r.remaining() / width != count || r.remaining() % width != 0)
    throw FormatError(r.origin + ": payload length mismatch, declared " +
                      std::to_string(count) + " values of " + std::to_string(width) +
                      " bytes, found " + std::to_string(r.remaining()) + " payload bytes");
  auto data = read_payload(r, count, width);
  r.expect_eof();

  if (rank == 3) {
    Tensor3 t(extents[0], extents[1], extents[2]);
    t.data = std::move(data);
    return t;
  }
  Tensor4 t(extents[0], extents[1], extents[2], extents[3]);
  t.data = std::move(data);
  return t;
}

Tensor3 load_tensor3(const std::filesystem::path& path) {
  auto any = load_tensor(path);
  if (auto* t = std::get_if<Tensor3>(&any)) return std::move(*t);
  throw FormatError(path.string() + ": expected a rank-3 tensor, found rank 4");
}

Tensor4 load_tensor4(const std::filesystem::path& path) {
  auto any = load_tensor(path);
  if (auto* t = std::get_if<Tensor4>(&any)) return std::move(*t);
  throw FormatError(path.string() + ": expected a rank-4 tensor, found rank 3");
}

void save_tensor(const Tensor3& t, const std::filesystem::path& path,
                 StoragePrecision precision) {
  const std::uint64_t extents[3] = {t.channels, t.height, t.width};
  save_impl(path, 3, extents, t.data, precision);
}

void save_tensor(const Tensor4& t, const std::filesystem::path& path,
                 StoragePrecision precision) {
  const std::uint64_t extents[4] = {t.c_out, t.c_in, t.k_h, t.k_w};
  save_impl(path, 4, extents, t.data, precision);
}

namespace {

std::vector<double> import_raw(const std::filesystem::path& path, std::size_t count) {
  auto bytes = wire::read_file(path);
  if (bytes.size() / 4 != count || bytes.size() % 4 != 0)
    throw FormatError(path.string() + ": raw payload is " + std::to_string(bytes.size()) +
                      " bytes, extents require " + std::to_string(count) + " float32 values");
  wire::Reader r(bytes, path.string());
  return read_payload(r, count, 4);
}

}  // namespace

Tensor4 import_raw_kernels(const std::filesystem::path& path, std::size_t c_out,
                           std::size_t c_in, std::size_t k_h, std::size_t k_w) {
  Tensor4 t(c_out, c_in, k_h, k_w);
  t.data = import_raw(path, t.size());
  return t;
}

Tensor3 import_raw_map(const std::filesystem::path& path, std::size_t channels,
                       std::size_t height, std::size_t width) {
  Tensor3 t(channels, height, width);
  t.data = import_raw(path, t.size());
  return t;
}

}  // namespace fkc
