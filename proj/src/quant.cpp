#include "fkc/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkc/errors.hpp"
#include "wire.hpp"

namespace fkc {

namespace {

constexpr char kMagic[5] = "FKQ1";

void check_config(const BfpConfig& config) {
  if (config.mantissa_bits < 1 || config.mantissa_bits > 23)
    throw ArgumentError("bfp: mantissa bits must be in [1, 23], got " +
                        std::to_string(config.mantissa_bits));
}

std::size_t code_bytes(unsigned m) { return (m + 8 + 7) / 8; }

bool exponent_saturated(double v) {
  // floor(log2 |v|) > 63, so the clamp pinned the exponent at 63.
  return !std::isfinite(v) || std::abs(v) >= 0x1p64;
}

}  // namespace

BfpCode bfp_encode(double v, const BfpConfig& config) {
  check_config(config);
  if (!std::isfinite(v)) throw DataError("bfp_encode: non-finite value");
  if (v == 0.0) return {};

  const int m = static_cast<int>(config.mantissa_bits);
  const double av = std::abs(v);
  const int e = std::clamp(std::ilogb(av), kBfpExponentMin, kBfpExponentMax);
  // |v| / 2^(e-(m-1)) is an exact power-of-two scaling; round half away
  // from zero, clamp to the m-bit magnitude.
  double q = std::round(std::ldexp(av, m - 1 - e));
  const double q_max = static_cast<double>((1u << m) - 1u);
  q = std::min(q, q_max);
  return {std::signbit(v), e, static_cast<std::uint32_t>(q)};
}

double bfp_decode(const BfpCode& code, const BfpConfig& config) {
  check_config(config);
  if (code.mantissa == 0) return 0.0;  // canonical zero, sign ignored
  const int m = static_cast<int>(config.mantissa_bits);
  const double v = std::ldexp(static_cast<double>(code.mantissa), code.exponent - m + 1);
  return code.negative ? -v : v;
}

QuantResult quantize_bfp(std::span<const double> values, const BfpConfig& config) {
  check_config(config);
  QuantResult result;
  result.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    result.values[i] = bfp_decode(bfp_encode(values[i], config), config);
  result.encoded_bits =
      static_cast<std::uint64_t>(values.size()) * (config.mantissa_bits + 8);
  return result;
}

std::vector<double> ste_passthrough(std::span<const double> upstream_grad,
                                    std::span<const double> values,
                                    const BfpConfig& config) {
  check_config(config);
  if (upstream_grad.size() != values.size())
    throw ArgumentError("ste_passthrough: gradient and value shapes differ");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = exponent_saturated(values[i]) ? 0.0 : upstream_grad[i];
  return out;
}

std::uint64_t model_size_bytes(std::uint64_t param_count,
                               const std::optional<BfpConfig>& config) {
  if (!config) return param_count * 4;
  check_config(*config);
  const std::uint64_t bits = param_count * (config->mantissa_bits + 8);
  return (bits + 7) / 8;
}

void save_quantized_layer(const CompressedLayer& layer, const BfpConfig& config,
                          const std::filesystem::path& path) {
  check_config(config);
  if (layer.fit.filters.size() != layer.c_out * layer.c_in)
    throw ArgumentError("fit report must carry one entry per filter");
  const unsigned m = config.mantissa_bits;
  const std::size_t width = code_bytes(m);

  std::vector<std::uint8_t> out;
  out.reserve(39 + layer.coeffs.size() * width);
  for (int i = 0; i < 4; ++i) wire::put_u8(out, static_cast<std::uint8_t>(kMagic[i]));
  wire::put_u8(out, layer.kind == BasisKind::Cosine ? 0 : 1);
  wire::put_u8(out, static_cast<std::uint8_t>(m));
  wire::put_u64(out, layer.c_out);
  wire::put_u64(out, layer.c_in);
  wire::put_u64(out, layer.k);
  wire::put_u64(out, layer.n);
  wire::put_u8(out, layer.bias ? 1 : 0);

  for (double v : layer.coeffs.data) {
    const BfpCode code = bfp_encode(v, config);
    std::uint64_t word = code.mantissa;
    word |= static_cast<std::uint64_t>(code.exponent + kBfpExponentBias) << m;
    word |= static_cast<std::uint64_t>(code.negative ? 1 : 0) << (m + 7);
    for (std::size_t b = 0; b < width; ++b)
      wire::put_u8(out, static_cast<std::uint8_t>(word >> (8 * b)));
  }
  if (layer.bias)
    for (double v : *layer.bias) wire::put_f64(out, v);
  wire::put_u64(out, layer.fit.filters.size());
  for (const auto& f : layer.fit.filters) wire::put_f64(out, f.mse);
  wire::write_file(path, out);
}

QuantizedLayer load_quantized_layer(const std::filesystem::path& path) {
  auto bytes = wire::read_file(path);
  wire::Reader r(bytes, path.string());
  r.expect_magic(kMagic);

  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > 1)
    throw FormatError(r.origin + ": unknown basis kind " + std::to_string(kind_byte));
  const unsigned m = r.u8();
  if (m < 1 || m > 23)
    throw FormatError(r.origin + ": mantissa bits out of range: " + std::to_string(m));
  const BfpConfig config{m};
  const std::size_t width = code_bytes(m);

  CompressedLayer layer;
  layer.kind = kind_byte == 0 ? BasisKind::Cosine : BasisKind::Chebyshev;
  layer.c_out = r.u64();
  layer.c_in = r.u64();
  layer.k = r.u64();
  layer.n = r.u64();
  if (layer.c_out == 0 || layer.c_in == 0 || layer.k == 0 || layer.n == 0)
    throw FormatError(r.origin + ": zero extent");
  if (layer.n > layer.k)
    throw FormatError(r.origin + ": harmonic count exceeds kernel side");
  const std::uint8_t bias_flag = r.u8();
  if (bias_flag > 1) throw FormatError(r.origin + ": bad bias flag");

  const std::uint64_t filters = layer.c_out * layer.c_in;
  if (layer.c_out != 0 && filters / layer.c_out != layer.c_in)
    throw FormatError(r.origin + ": extent product overflows");

  layer.coeffs = CoeffTensor(layer.c_out, layer.c_in, layer.n);
  for (auto& v : layer.coeffs.data) {
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < width; ++b)
      word |= static_cast<std::uint64_t>(r.u8()) << (8 * b);
    BfpCode code;
    code.mantissa = static_cast<std::uint32_t>(word & ((1ull << m) - 1));
    code.exponent = static_cast<int>((word >> m) & 0x7f) - kBfpExponentBias;
    code.negative = ((word >> (m + 7)) & 1) != 0;
    if (word >> (m + 8) != 0)
      throw FormatError(r.origin + ": stray bits in quantized element");
    v = bfp_decode(code, config);
  }
  if (bias_flag) {
    std::vector<double> bias(layer.c_out);
    for (auto& v : bias) {
      v = r.f64();
      if (!std::isfinite(v)) throw DataError(r.origin + ": non-finite bias value");
    }
    layer.bias = std::move(bias);
  }
  const std::uint64_t mse_count = r.u64();
  if (mse_count != filters)
    throw FormatError(r.origin + ": fit trailer lists " + std::to_string(mse_count) +
                      " filters, extents say " + std::to_string(filters));
  layer.fit.filters.resize(filters);
  for (auto& f : layer.fit.filters) f.mse = r.f64();
  r.expect_eof();
  return {std::move(layer), config};
}

}  // namespace fkc
