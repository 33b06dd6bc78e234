#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fkc {

/// One parameterized layer of a network, as far as parameter accounting is
/// concerned. c_in counts full input channels; the weight count is
/// c_out * (c_in / groups) * k^2, plus c_out if a bias is present.
/// Normalization layers fit the same schema as 1x1 depthwise rows.
struct ArchLayer {
  std::string id;
  std::string block_tag;
  std::size_t c_out = 0;
  std::size_t c_in = 0;
  std::size_t k = 0;
  std::size_t groups = 1;
  bool bias = false;
  bool compressible = false;

  std::uint64_t param_count() const;
  std::uint64_t param_count_at(std::size_t n) const;
};

struct ArchDescriptor {
  std::string name;
  /// When set, reduction percentages are reported against the compressible
  /// subtotal instead of the whole-model total.
  bool compressible_only_delta = false;
  std::vector<ArchLayer> layers;

  /// Distinct block tags of compressible layers, in first-appearance order.
  std::vector<std::string> block_tags() const;
};

ArchDescriptor load_arch(const std::filesystem::path& path);
ArchDescriptor parse_arch(std::istream& in, const std::string& origin);

/// Harmonic count per layer, parallel to ArchDescriptor::layers; entries
/// for non-compressible layers are 0.
struct HarmonicConfig {
  std::vector<std::size_t> n_per_layer;
};

/// Parses either a per-block comma list ("6,3,3,3,2", one entry per block
/// tag) or run-length notation ("7x3,7x3,7x9,6x3", runs over compressible
/// layers in order; a bare number counts as a run of one).
HarmonicConfig parse_config(const std::string& text, const ArchDescriptor& arch);

struct ParamAccounting {
  std::uint64_t baseline_total = 0;
  std::uint64_t baseline_compressible = 0;
  std::uint64_t total = 0;         // equals baseline_total without a config
  std::uint64_t compressible = 0;  // compressed compressible subtotal
  double reduction_pct = 0.0;
  double remaining_pct = 100.0;
};

/// Whole-network accounting. With compressible_only the percentage columns
/// compare compressible subtotals; otherwise whole-model totals.
ParamAccounting total_params(const ArchDescriptor& arch,
                             const HarmonicConfig* config,
                             bool compressible_only);

}  // namespace fkc
