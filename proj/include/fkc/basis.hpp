#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fkc {

/// The two series families a kernel function can be expanded in.
enum class BasisKind { Cosine, Chebyshev };

/// Fixed 2D sample coordinates for a K x K kernel. The grid is separable:
/// kernel entry (a, b) is sampled at (axis[a], axis[b]).
///
/// Cosine:    axis[a] = (a + 0.5) * pi / K, the DCT-II half-sample points
///            on (0, pi).
/// Chebyshev: axis[a] = cos((2a + 1) * pi / (2K)), the Chebyshev-Gauss
///            points on (-1, 1), strictly decreasing in a. These are the
///            images of the cosine points under x = cos(theta), which makes
///            the two bases agree entrywise on-grid.
struct SampleGrid {
  BasisKind kind = BasisKind::Cosine;
  std::size_t k = 0;
  std::vector<double> axis;

  struct Point {
    double x;
    double y;
  };
  Point point(std::size_t a, std::size_t b) const { return {axis[a], axis[b]}; }
};

/// Chebyshev polynomial of the first kind, T_n(x), by the recurrence
/// T_0 = 1, T_1 = x, T_n = 2x T_{n-1} - T_{n-2}. Valid for any finite x.
double chebyshev_t(std::size_t n, double x);

SampleGrid make_grid(BasisKind kind, std::size_t k);

/// K^2 x N^2 matrix of basis-function values at the grid points.
/// Row index a*K + b, column index i0*N + i1; the entry is
/// phi_{i0}(axis[a]) * phi_{i1}(axis[b]) with phi_i = cos(i * .) for the
/// cosine basis and phi_i = T_i for Chebyshev.
struct DesignMatrix {
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<double> values;  // row-major

  std::size_t rows() const { return k * k; }
  std::size_t cols() const { return n * n; }
  double at(std::size_t row, std::size_t col) const {
    return values[row * cols() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
};

/// Requires 1 <= n <= k. At n = k the matrix is square with mutually
/// orthogonal columns (the DCT-II basis on the half-sample grid).
DesignMatrix design_matrix(BasisKind kind, std::size_t k, std::size_t n);

/// Evaluates the truncated series sum_{i0,i1} a_{i0 i1} phi_{i0}(x) phi_{i1}(y)
/// for one filter's n x n coefficient slice (row-major, a_{i0 i1} at i0*n + i1).
double eval_series(BasisKind kind, std::span<const double> coeffs, std::size_t n,
                   double x, double y);

/// eval_series at every grid point, row-major over (a, b).
std::vector<double> eval_series_on_grid(BasisKind kind,
                                        std::span<const double> coeffs,
                                        std::size_t n, const SampleGrid& grid);

}  // namespace fkc
