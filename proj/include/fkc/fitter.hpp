#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fkc/basis.hpp"
#include "fkc/tensor.hpp"

namespace fkc {

/// Per-filter n x n series coefficients for a whole layer, row-major over
/// (c_out, c_in, i0, i1).
struct CoeffTensor {
  std::size_t c_out = 0;
  std::size_t c_in = 0;
  std::size_t n = 0;
  std::vector<double> data;

  CoeffTensor() = default;
  CoeffTensor(std::size_t o, std::size_t i, std::size_t n_);

  std::size_t per_filter() const { return n * n; }
  std::size_t filter_count() const { return c_out * c_in; }
  std::size_t size() const { return c_out * c_in * n * n; }

  std::span<double> filter(std::size_t o, std::size_t i) {
    return {data.data() + (o * c_in + i) * per_filter(), per_filter()};
  }
  std::span<const double> filter(std::size_t o, std::size_t i) const {
    return {data.data() + (o * c_in + i) * per_filter(), per_filter()};
  }
};

enum class InitScheme { ChebyshevMeanDC, GaussianRandom };
enum class FitMethod { GradientDescent, LeastSquares, ClosedFormDCT };

struct FitConfig {
  double learning_rate = 0.05;
  std::size_t max_iters = 2000;
  /// Stop descent once the gradient max-norm drops below this.
  double grad_tol = 1e-10;
  /// Unset means the per-basis default: GaussianRandom for Cosine,
  /// ChebyshevMeanDC for Chebyshev.
  std::optional<InitScheme> init;
  std::uint64_t seed = 0;
  FitMethod method = FitMethod::GradientDescent;
  std::size_t threads = 1;
};

struct FilterFit {
  double mse = 0.0;
  std::size_t iters = 0;
  double max_abs_residual = 0.0;
  bool fell_back_to_gd = false;
};

struct FitReport {
  std::vector<FilterFit> filters;

  double mse_mean() const;
  double mse_max() const;
  double residual_max() const;
  std::size_t iters_max() const;
};

/// DC-mean initialization: a_{00} = mean of the filter's weights, all
/// higher harmonics zero.
CoeffTensor init_chebyshev(const Tensor4& kernels, std::size_t n);

/// I.i.d. N(0, 1/(c_in * k^2)) initialization. Each filter draws from its
/// own stream derived from (seed, o, i), so results do not depend on
/// evaluation order.
CoeffTensor init_gaussian(std::size_t c_out, std::size_t c_in, std::size_t k,
                          std::size_t n, std::uint64_t seed);

/// (1/K^2) * sum_{ab} (w_ab - w_hat(p_ab))^2 for one filter slice.
double mse_loss(std::span<const double> filter, std::span<const double> coeffs,
                const SampleGrid& grid, BasisKind kind);

/// Exact gradient of mse_loss with respect to each coefficient:
/// (2/K^2) * Phi^T (Phi a - w).
std::vector<double> mse_gradient(std::span<const double> filter,
                                 std::span<const double> coeffs,
                                 const SampleGrid& grid, BasisKind kind);

/// Fits series coefficients to every filter of a square-kernel layer.
/// GradientDescent runs fixed-step descent from the configured
/// initialization (halving the step whenever it would increase the loss);
/// LeastSquares solves the normal equations; ClosedFormDCT requires n == K
/// and applies the orthogonal DCT-II analysis formula (one code path for
/// both bases, whose design matrices coincide on these grids).
std::pair<CoeffTensor, FitReport> fit(const Tensor4& kernels, BasisKind kind,
                                      std::size_t n, const FitConfig& config = {});

}  // namespace fkc
