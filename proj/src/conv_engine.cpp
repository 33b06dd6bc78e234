#include "fkc/conv_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fkc/errors.hpp"

namespace fkc {

namespace {

struct ConvDims {
  std::size_t groups = 1;
  std::size_t pad_h = 0, pad_w = 0;
  std::size_t out_h = 0, out_w = 0;
};

std::size_t out_extent(std::size_t in, std::size_t pad, std::size_t k,
                       std::size_t stride, const char* axis) {
  if (in + 2 * pad < k)
    throw ArgumentError(std::string("conv2d: kernel does not fit the padded input along ") +
                        axis);
  return (in + 2 * pad - k) / stride + 1;
}

ConvDims resolve(const Tensor3& input, std::size_t c_out, std::size_t c_in_pg,
                 std::size_t k_h, std::size_t k_w, const ConvSpec& spec) {
  if (spec.stride == 0) throw ArgumentError("conv2d: stride must be positive");
  if (spec.groups == 0) throw ArgumentError("conv2d: groups must be positive");
  if (c_out % spec.groups != 0)
    throw ArgumentError("conv2d: c_out is not divisible by groups");
  if (input.channels != c_in_pg * spec.groups)
    throw ArgumentError("conv2d: input has " + std::to_string(input.channels) +
                        " channels, kernels expect " + std::to_string(c_in_pg * spec.groups));
  ConvDims d;
  d.groups = spec.groups;
  d.pad_h = spec.padding.value_or(k_h / 2);
  d.pad_w = spec.padding.value_or(k_w / 2);
  d.out_h = out_extent(input.height, d.pad_h, k_h, spec.stride, "height");
  d.out_w = out_extent(input.width, d.pad_w, k_w, spec.stride, "width");
  return d;
}

// Shared accumulation used by both the discrete and continuous paths; the
// summation order per output element is fixed (ic, ky, kx).
Tensor3 accumulate(const Tensor3& input, const Tensor4& kernels, const ConvSpec& spec,
                   const ConvDims& d) {
  const std::size_t c_in_pg = kernels.c_in;
  const std::size_t out_per_group = kernels.c_out / d.groups;
  Tensor3 out(kernels.c_out, d.out_h, d.out_w);
  for (std::size_t o = 0; o < kernels.c_out; ++o) {
    const std::size_t ic0 = (o / out_per_group) * c_in_pg;
    for (std::size_t oy = 0; oy < d.out_h; ++oy) {
      for (std::size_t ox = 0; ox < d.out_w; ++ox) {
        double acc = 0.0;
        for (std::size_t ic = 0; ic < c_in_pg; ++ic) {
          for (std::size_t ky = 0; ky < kernels.k_h; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * spec.stride + ky) -
                                      static_cast<std::ptrdiff_t>(d.pad_h);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(input.height)) continue;
            for (std::size_t kx = 0; kx < kernels.k_w; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * spec.stride + kx) -
                                        static_cast<std::ptrdiff_t>(d.pad_w);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(input.width)) continue;
              acc += input.at(ic0 + ic, static_cast<std::size_t>(iy),
                              static_cast<std::size_t>(ix)) *
                     kernels.at(o, ic, ky, kx);
            }
          }
        }
        out.at(o, oy, ox) = acc;
      }
    }
  }
  return out;
}

}  // namespace

Tensor3 conv2d(const Tensor3& input, const Tensor4& kernels, const ConvSpec& spec) {
  const ConvDims d = resolve(input, kernels.c_out, kernels.c_in, kernels.k_h,
                             kernels.k_w, spec);
  return accumulate(input, kernels, spec, d);
}

Tensor3 conv2d_continuous(const Tensor3& input, const CompressedLayer& layer,
                          const ConvSpec& spec) {
  const ConvDims d = resolve(input, layer.c_out, layer.c_in, layer.k, layer.k, spec);
  // Sample the kernel function at the layer's grid, then accumulate exactly
  // as the discrete path does.
  const SampleGrid grid = make_grid(layer.kind, layer.k);
  Tensor4 sampled(layer.c_out, layer.c_in, layer.k, layer.k);
  for (std::size_t o = 0; o < layer.c_out; ++o) {
    for (std::size_t i = 0; i < layer.c_in; ++i) {
      const auto values =
          eval_series_on_grid(layer.kind, layer.coeffs.filter(o, i), layer.n, grid);
      std::copy(values.begin(), values.end(), sampled.filter(o, i).begin());
    }
  }
  return accumulate(input, sampled, spec, d);
}

OutputError layer_output_error(const Tensor3& input, const Tensor4& original,
                               const CompressedLayer& layer, const ConvSpec& spec) {
  if (original.c_out != layer.c_out || original.c_in != layer.c_in ||
      original.k_h != layer.k || original.k_w != layer.k)
    throw ArgumentError("layer_output_error: kernel extents do not match the layer");
  const Tensor3 y_orig = conv2d(input, original, spec);
  const Tensor3 y_comp = conv2d_continuous(input, layer, spec);

  double diff_sq = 0.0, orig_sq = 0.0;
  OutputError err;
  for (std::size_t idx = 0; idx < y_orig.data.size(); ++idx) {
    const double diff = y_orig.data[idx] - y_comp.data[idx];
    diff_sq += diff * diff;
    orig_sq += y_orig.data[idx] * y_orig.data[idx];
    err.max_abs = std::max(err.max_abs, std::abs(diff));
  }
  err.rel_l2 = std::sqrt(diff_sq) / std::max(std::sqrt(orig_sq), 1e-30);
  return err;
}

}  // namespace fkc
