#include "fkc/kernel_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkc/errors.hpp"
#include "wire.hpp"

namespace fkc {

namespace {

constexpr char kMagic[5] = "FKC1";

void validate_shapes(const CompressedLayer& layer) {
  if (layer.c_out == 0 || layer.c_in == 0 || layer.k == 0 || layer.n == 0)
    throw ArgumentError("compressed layer extents must be positive");
  if (layer.n > layer.k)
    throw ArgumentError("compressed layer violates n <= K: n = " +
                        std::to_string(layer.n) + ", K = " + std::to_string(layer.k));
  if (layer.coeffs.c_out != layer.c_out || layer.coeffs.c_in != layer.c_in ||
      layer.coeffs.n != layer.n)
    throw ArgumentError("coefficient tensor extents do not match the layer");
  if (layer.bias && layer.bias->size() != layer.c_out)
    throw ArgumentError("bias length must equal c_out");
}

}  // namespace

CompressedLayer compress_layer(const Tensor4& kernels, BasisKind kind, std::size_t n,
                               const FitConfig& config,
                               std::optional<std::vector<double>> bias) {
  if (bias && bias->size() != kernels.c_out)
    throw ArgumentError("compress_layer: bias length must equal c_out");
  auto [coeffs, report] = fit(kernels, kind, n, config);
  CompressedLayer layer;
  layer.kind = kind;
  layer.c_out = kernels.c_out;
  layer.c_in = kernels.c_in;
  layer.k = kernels.k_h;
  layer.n = n;
  layer.coeffs = std::move(coeffs);
  layer.fit = std::move(report);
  layer.bias = std::move(bias);
  return layer;
}

Tensor4 reconstruct(const CompressedLayer& layer) {
  validate_shapes(layer);
  const SampleGrid grid = make_grid(layer.kind, layer.k);
  Tensor4 out(layer.c_out, layer.c_in, layer.k, layer.k);
  for (std::size_t o = 0; o < layer.c_out; ++o) {
    for (std::size_t i = 0; i < layer.c_in; ++i) {
      const auto values =
          eval_series_on_grid(layer.kind, layer.coeffs.filter(o, i), layer.n, grid);
      std::copy(values.begin(), values.end(), out.filter(o, i).begin());
    }
  }
  return out;
}

std::vector<FilterErrorStats> reconstruction_error(const Tensor4& original,
                                                   const CompressedLayer& layer) {
  if (original.c_out != layer.c_out || original.c_in != layer.c_in ||
      original.k_h != layer.k || original.k_w != layer.k)
    throw ArgumentError("reconstruction_error: tensor extents do not match the layer");
  const Tensor4 recon = reconstruct(layer);
  const double kk = static_cast<double>(layer.k * layer.k);

  std::vector<FilterErrorStats> stats(layer.c_out * layer.c_in);
  for (std::size_t o = 0; o < layer.c_out; ++o) {
    for (std::size_t i = 0; i < layer.c_in; ++i) {
      const auto w = original.filter(o, i);
      const auto w_hat = recon.filter(o, i);
      FilterErrorStats& s = stats[o * layer.c_in + i];
      double sq = 0.0;
      for (std::size_t idx = 0; idx < w.size(); ++idx) {
        const double r = w[idx] - w_hat[idx];
        sq += r * r;
        s.max_abs = std::max(s.max_abs, std::abs(r));
      }
      s.mse = sq / kk;
      s.l2 = std::sqrt(sq);
    }
  }
  return stats;
}

ParamCounts layer_param_counts(const CompressedLayer& layer) {
  validate_shapes(layer);
  const std::uint64_t bias_count = layer.bias ? layer.c_out : 0;
  ParamCounts counts;
  counts.original = static_cast<std::uint64_t>(layer.c_out) * layer.c_in * layer.k * layer.k +
                    bias_count;
  counts.compressed = static_cast<std::uint64_t>(layer.c_out) * layer.c_in * layer.n * layer.n +
                      bias_count;
  counts.reduction_pct = 100.0 * (1.0 - static_cast<double>(counts.compressed) /
                                            static_cast<double>(counts.original));
  return counts;
}

void save_layer(const CompressedLayer& layer, const std::filesystem::path& path) {
  validate_shapes(layer);
  if (layer.fit.filters.size() != layer.c_out * layer.c_in)
    throw ArgumentError("fit report must carry one entry per filter");

  std::vector<std::uint8_t> out;
  out.reserve(38 + layer.coeffs.size() * 8);
  for (int i = 0; i < 4; ++i) wire::put_u8(out, static_cast<std::uint8_t>(kMagic[i]));
  wire::put_u8(out, layer.kind == BasisKind::Cosine ? 0 : 1);
  wire::put_u64(out, layer.c_out);
  wire::put_u64(out, layer.c_in);
  wire::put_u64(out, layer.k);
  wire::put_u64(out, layer.n);
  wire::put_u8(out, layer.bias ? 1 : 0);
  for (double v : layer.coeffs.data) wire::put_f64(out, v);
  if (layer.bias)
    for (double v : *layer.bias) wire::put_f64(out, v);
  wire::put_u64(out, layer.fit.filters.size());
  for (const auto& f : layer.fit.filters) wire::put_f64(out, f.mse);
  wire::write_file(path, out);
}

CompressedLayer load_layer(const std::filesystem::path& path) {
  auto bytes = wire::read_file(path);
  wire::Reader r(bytes, path.string());
  r.expect_magic(kMagic);

  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > 1)
    throw FormatError(r.origin + ": unknown basis kind " + std::to_string(kind_byte));

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

  // Guard the size arithmetic below against extent overflow.
  const std::uint64_t filters = layer.c_out * layer.c_in;
  if (layer.c_out != 0 && filters / layer.c_out != layer.c_in)
    throw FormatError(r.origin + ": extent product overflows");
  const std::uint64_t coeff_count = filters * layer.n * layer.n;

  layer.coeffs = CoeffTensor(layer.c_out, layer.c_in, layer.n);
  for (std::size_t idx = 0; idx < coeff_count; ++idx) {
    const double v = r.f64();
    if (!std::isfinite(v))
      throw DataError(r.origin + ": non-finite coefficient at index " + std::to_string(idx));
    layer.coeffs.data[idx] = v;
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
  return layer;
}

}  // namespace fkc
