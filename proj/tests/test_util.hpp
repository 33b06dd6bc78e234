#pragma once

// Shared helpers for the test suites: scratch directories and seeded
// random tensors.

#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>

#include "fkc/tensor.hpp"

namespace fkc::test {

namespace fs = std::filesystem;

/// Unique scratch directory, removed on destruction.
struct TempDir {
  fs::path path;

  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() /
           ("fkc-test-" + std::to_string(rng()) + "-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path file(const std::string& name) const { return path / name; }
};

inline Tensor4 random_kernels(std::size_t c_out, std::size_t c_in, std::size_t k,
                              std::uint64_t seed) {
  Tensor4 t(c_out, c_in, k, k);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

inline Tensor3 random_map(std::size_t c, std::size_t h, std::size_t w,
                          std::uint64_t seed) {
  Tensor3 t(c, h, w);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

}  // namespace fkc::test
