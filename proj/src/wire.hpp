#pragma once

// Little-endian byte-level encode/decode helpers shared by the FKT1/FKC1/FKQ1
// readers and writers. Explicit byte shuffling keeps the formats bit-exact on
// any host endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fkc/errors.hpp"

namespace fkc::wire {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) {
  out.push_back(v);
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

/// Bounds-checked little-endian reader over a byte buffer.
struct Reader {
  const std::uint8_t* p = nullptr;
  std::size_t len = 0;
  std::size_t pos = 0;
  std::string origin;

  Reader(const std::vector<std::uint8_t>& buf, std::string origin_)
      : p(buf.data()), len(buf.size()), origin(std::move(origin_)) {}

  std::size_t remaining() const { return len - pos; }

  void need(std::size_t count) const {
    if (len - pos < count) throw FormatError(origin + ": truncated file");
  }

  std::uint8_t u8() {
    need(1);
    return p[pos++];
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }

  void expect_magic(const char (&magic)[5]) {
    need(4);
    if (std::memcmp(p + pos, magic, 4) != 0)
      throw FormatError(origin + ": bad magic, not a " + magic + " file");
    pos += 4;
  }

  void expect_eof() const {
    if (pos != len) throw FormatError(origin + ": trailing bytes after payload");
  }
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace fkc::wire
