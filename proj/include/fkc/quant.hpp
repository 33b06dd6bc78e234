#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fkc/kernel_model.hpp"

namespace fkc {

inline constexpr int kBfpExponentBits = 7;  // signed exponent range [-64, 63]
inline constexpr int kBfpExponentMin = -64;
inline constexpr int kBfpExponentMax = 63;
inline constexpr int kBfpExponentBias = 64;  // stored exponent = e + 64

/// Block floating point with block size 1: every scalar carries its own
/// sign bit, 7-bit exponent and m-bit mantissa, m + 8 bits in total.
struct BfpConfig {
  unsigned mantissa_bits = 8;  // m, in [1, 23]
};

struct BfpCode {
  bool negative = false;
  int exponent = 0;            // clamped to [-64, 63]
  std::uint32_t mantissa = 0;  // magnitude, <= 2^m - 1; zero encodes value 0
};

/// Per-scalar encoding: e = clamp(floor(log2 |v|), -64, 63), mantissa
/// q = round(|v| / 2^(e-(m-1))) clamped to 2^m - 1. Round-to-nearest,
/// ties away from zero. v = 0 encodes as the all-zero code.
BfpCode bfp_encode(double v, const BfpConfig& config);
double bfp_decode(const BfpCode& code, const BfpConfig& config);

struct QuantResult {
  std::vector<double> values;  // dequantized, same order as the input
  std::uint64_t encoded_bits = 0;
};

QuantResult quantize_bfp(std::span<const double> values, const BfpConfig& config);

/// Straight-through gradient rule for the quantizer: the upstream gradient
/// passes unchanged wherever the value's exponent did not saturate the
/// upper clamp (|v| < 2^64); saturated positions get zero.
std::vector<double> ste_passthrough(std::span<const double> upstream_grad,
                                    std::span<const double> values,
                                    const BfpConfig& config);

/// Encoded size: 4 bytes per parameter at full 32-bit precision, otherwise
/// ceil(count * (m + 8) / 8) bytes.
std::uint64_t model_size_bytes(std::uint64_t param_count,
                               const std::optional<BfpConfig>& config);

// FKQ1 container: the FKC1 layout with the coefficient payload replaced by
// packed codes, one element per ceil((m+8)/8) bytes, bits LSB-first:
// [0, m) mantissa, [m, m+7) biased exponent, bit m+7 sign. The mantissa
// width m is recorded in the header; bias and fit trailer stay f64.
void save_quantized_layer(const CompressedLayer& layer, const BfpConfig& config,
                          const std::filesystem::path& path);

struct QuantizedLayer {
  CompressedLayer layer;  // coefficients already dequantized
  BfpConfig config;
};

QuantizedLayer load_quantized_layer(const std::filesystem::path& path);

}  // namespace fkc
