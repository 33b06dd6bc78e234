#pragma once

#include <optional>

#include "fkc/kernel_model.hpp"
#include "fkc/tensor.hpp"

namespace fkc {

struct ConvSpec {
  std::size_t stride = 1;
  /// Zero padding per side; unset means floor(K/2) per axis.
  std::optional<std::size_t> padding;
  std::size_t groups = 1;
};

/// Reference direct cross-correlation (no kernel flip), zero padding.
/// Kernels carry per-group input channels: the input must have
/// c_in * groups channels. Accumulation order is fixed row-major per
/// output element, so results do not depend on parallelization.
Tensor3 conv2d(const Tensor3& input, const Tensor4& kernels,
               const ConvSpec& spec = {});

/// Continuous-formulation twin: evaluates the layer's series at its sample
/// grid and performs the same accumulation. Agrees with
/// conv2d(input, reconstruct(layer), spec) to the last bit.
Tensor3 conv2d_continuous(const Tensor3& input, const CompressedLayer& layer,
                          const ConvSpec& spec = {});

struct OutputError {
  double rel_l2 = 0.0;
  double max_abs = 0.0;
};

/// Layer-output error introduced by compression:
/// rel_l2 = |y_orig - y_comp|_2 / max(|y_orig|_2, 1e-30).
OutputError layer_output_error(const Tensor3& input, const Tensor4& original,
                               const CompressedLayer& layer,
                               const ConvSpec& spec = {});

}  // namespace fkc
