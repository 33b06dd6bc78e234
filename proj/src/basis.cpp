#include "fkc/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fkc/errors.hpp"

namespace fkc {

namespace {

// phi_0..phi_{n-1} at one coordinate. The Chebyshev column uses the running
// recurrence rather than n independent evaluations.
void axis_values(BasisKind kind, std::size_t n, double x, double* out) {
  if (kind == BasisKind::Cosine) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(static_cast<double>(i) * x);
    return;
  }
  out[0] = 1.0;
  if (n > 1) out[1] = x;
  for (std::size_t i = 2; i < n; ++i) out[i] = 2.0 * x * out[i - 1] - out[i - 2];
}

}  // namespace

double chebyshev_t(std::size_t n, double x) {
  if (n == 0) return 1.0;
  if (n == 1) return x;
  double prev = 1.0;
  double cur = x;
  for (std::size_t i = 2; i <= n; ++i) {
    double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

SampleGrid make_grid(BasisKind kind, std::size_t k) {
  if (k == 0) throw ArgumentError("make_grid: kernel side length must be positive");
  SampleGrid grid{kind, k, std::vector<double>(k)};
  for (std::size_t a = 0; a < k; ++a) {
    const double theta =
        (static_cast<double>(a) + 0.5) * std::numbers::pi / static_cast<double>(k);
    grid.axis[a] = kind == BasisKind::Cosine ? theta : std::cos(theta);
  }
  return grid;
}

DesignMatrix design_matrix(BasisKind kind, std::size_t k, std::size_t n) {
  if (n == 0) throw ArgumentError("design_matrix: harmonic count must be positive");
  if (n > k)
    throw ArgumentError("design_matrix: harmonic count " + std::to_string(n) +
                        " exceeds kernel side " + std::to_string(k));
  const SampleGrid grid = make_grid(kind, k);

  // Separable: tabulate phi_i(axis[a]) once per axis coordinate.
  std::vector<double> phi(k * n);
  for (std::size_t a = 0; a < k; ++a) axis_values(kind, n, grid.axis[a], &phi[a * n]);

  DesignMatrix dm{k, n, std::vector<double>(k * k * n * n)};
  std::size_t idx = 0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double* pa = &phi[a * n];
      const double* pb = &phi[b * n];
      for (std::size_t i0 = 0; i0 < n; ++i0)
        for (std::size_t i1 = 0; i1 < n; ++i1) dm.values[idx++] = pa[i0] * pb[i1];
    }
  }
  return dm;
}

double eval_series(BasisKind kind, std::span<const double> coeffs, std::size_t n,
                   double x, double y) {
  if (coeffs.size() != n * n)
    throw ArgumentError("eval_series: coefficient slice has " +
                        std::to_string(coeffs.size()) + " entries, expected n^2 = " +
                        std::to_string(n * n));
  double acc = 0.0;
  if (kind == BasisKind::Cosine) {
    for (std::size_t i0 = 0; i0 < n; ++i0) {
      const double px = std::cos(static_cast<double>(i0) * x);
      for (std::size_t i1 = 0; i1 < n; ++i1)
        acc += coeffs[i0 * n + i1] * px * std::cos(static_cast<double>(i1) * y);
    }
    return acc;
  }
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    const double px = chebyshev_t(i0, x);
    for (std::size_t i1 = 0; i1 < n; ++i1)
      acc += coeffs[i0 * n + i1] * px * chebyshev_t(i1, y);
  }
  return acc;
}

std::vector<double> eval_series_on_grid(BasisKind kind,
                                        std::span<const double> coeffs,
                                        std::size_t n, const SampleGrid& grid) {
  std::vector<double> out(grid.k * grid.k);
  std::size_t idx = 0;
  for (std::size_t a = 0; a < grid.k; ++a)
    for (std::size_t b = 0; b < grid.k; ++b)
      out[idx++] = eval_series(kind, coeffs, n, grid.axis[a], grid.axis[b]);
  return out;
}

}  // namespace fkc
