#pragma once

#include <filesystem>
#include <optional>

#include "fkc/fitter.hpp"
#include "fkc/tensor.hpp"

namespace fkc {

/// The persisted compression artifact: basis kind, shape metadata, all
/// filters' coefficients and fit diagnostics. Bias vectors ride along
/// uncompressed; the series approximation applies to spatial weights only.
struct CompressedLayer {
  BasisKind kind = BasisKind::Cosine;
  std::size_t c_out = 0;
  std::size_t c_in = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  CoeffTensor coeffs;
  FitReport fit;
  std::optional<std::vector<double>> bias;
};

CompressedLayer compress_layer(const Tensor4& kernels, BasisKind kind,
                               std::size_t n, const FitConfig& config = {},
                               std::optional<std::vector<double>> bias = std::nullopt);

/// Dense (c_out, c_in, k, k) tensor with entry (o, i, a, b) equal to the
/// series evaluated at grid point (axis[a], axis[b]).
Tensor4 reconstruct(const CompressedLayer& layer);

struct FilterErrorStats {
  double mse = 0.0;
  double l2 = 0.0;
  double max_abs = 0.0;
};

/// Per-filter residual metrics between an original tensor and the layer's
/// reconstruction, computed on grid samples.
std::vector<FilterErrorStats> reconstruction_error(const Tensor4& original,
                                                   const CompressedLayer& layer);

struct ParamCounts {
  std::uint64_t original = 0;
  std::uint64_t compressed = 0;
  double reduction_pct = 0.0;
};

ParamCounts layer_param_counts(const CompressedLayer& layer);

// FKC1 container: magic "FKC1"; one basis-kind byte (0 cosine, 1 chebyshev);
// u64 LE extents c_out, c_in, k, n; one bias-present byte; coefficients as
// f64 LE row-major; the optional bias; then a trailing u64 filter count
// followed by each filter's final fit MSE as f64. Round-trips bit-exactly.
void save_layer(const CompressedLayer& layer, const std::filesystem::path& path);
CompressedLayer load_layer(const std::filesystem::path& path);

}  // namespace fkc
