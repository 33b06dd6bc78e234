#include "fkc/fitter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "fkc/errors.hpp"

namespace fkc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent per-filter stream so results do not depend on the order
// filters are processed in.
std::uint64_t filter_seed(std::uint64_t seed, std::size_t o, std::size_t i) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(o) + 0x517CC1B727220A95ULL));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(i) + 0x2545F4914F6CDD1DULL));
  return h;
}

std::size_t isqrt_exact(std::size_t m, const char* what) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  if (r * r != m)
    throw ArgumentError(std::string(what) + " slice length " + std::to_string(m) +
                        " is not a perfect square");
  return r;
}

Eigen::MatrixXd to_eigen(const DesignMatrix& dm) {
  Eigen::MatrixXd phi(dm.rows(), dm.cols());
  for (std::size_t r = 0; r < dm.rows(); ++r)
    for (std::size_t c = 0; c < dm.cols(); ++c)
      phi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = dm.at(r, c);
  return phi;
}

// Interleaved static partition; each index is handled by exactly one worker.
void parallel_filters(std::size_t count, std::size_t threads,
                      const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t f = 0; f < count; ++f) body(f);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t f = t; f < count; f += threads) body(f);
    });
  }
  for (auto& th : pool) th.join();
}

struct DescentResult {
  double mse = 0.0;
  std::size_t iters = 0;
  double max_abs_residual = 0.0;
};

// Fixed-step descent on the quadratic (1/K^2)|Phi a - w|^2. A step that
// would increase the loss is rejected and the step size halved, so the
// accepted loss sequence is non-increasing.
DescentResult descend(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w,
                      Eigen::VectorXd& a, const FitConfig& config) {
  const double kk = static_cast<double>(phi.rows());
  double lr = config.learning_rate;
  Eigen::VectorXd r = phi * a - w;
  double loss = r.squaredNorm() / kk;
  std::size_t it = 0;
  while (it < config.max_iters) {
    Eigen::VectorXd g = (2.0 / kk) * (phi.transpose() * r);
    if (g.lpNorm<Eigen::Infinity>() < config.grad_tol) break;
    ++it;
    Eigen::VectorXd candidate = a - lr * g;
    Eigen::VectorXd r2 = phi * candidate - w;
    const double loss2 = r2.squaredNorm() / kk;
    if (loss2 > loss) {
      lr *= 0.5;
      continue;
    }
    a.swap(candidate);
    r.swap(r2);
    loss = loss2;
  }
  return {loss, it, r.lpNorm<Eigen::Infinity>()};
}

}  // namespace

CoeffTensor::CoeffTensor(std::size_t o, std::size_t i, std::size_t n_)
    : c_out(o), c_in(i), n(n_), data(o * i * n_ * n_, 0.0) {
  if (o == 0 || i == 0 || n_ == 0)
    throw ArgumentError("CoeffTensor extents must be positive");
}

double FitReport::mse_mean() const {
  if (filters.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& f : filters) acc += f.mse;
  return acc / static_cast<double>(filters.size());
}

double FitReport::mse_max() const {
  double m = 0.0;
  for (const auto& f : filters) m = std::max(m, f.mse);
  return m;
}

double FitReport::residual_max() const {
  double m = 0.0;
  for (const auto& f : filters) m = std::max(m, f.max_abs_residual);
  return m;
}

std::size_t FitReport::iters_max() const {
  std::size_t m = 0;
  for (const auto& f : filters) m = std::max(m, f.iters);
  return m;
}

CoeffTensor init_chebyshev(const Tensor4& kernels, std::size_t n) {
  if (n == 0) throw ArgumentError("init_chebyshev: harmonic count must be positive");
  CoeffTensor coeffs(kernels.c_out, kernels.c_in, n);
  const double inv = 1.0 / static_cast<double>(kernels.filter_size());
  for (std::size_t o = 0; o < kernels.c_out; ++o) {
    for (std::size_t i = 0; i < kernels.c_in; ++i) {
      double sum = 0.0;
      for (double v : kernels.filter(o, i)) sum += v;
      coeffs.filter(o, i)[0] = sum * inv;  // DC term; higher harmonics stay zero
    }
  }
  return coeffs;
}

CoeffTensor init_gaussian(std::size_t c_out, std::size_t c_in, std::size_t k,
                          std::size_t n, std::uint64_t seed) {
  if (n == 0 || k == 0) throw ArgumentError("init_gaussian: extents must be positive");
  CoeffTensor coeffs(c_out, c_in, n);
  const double sigma = std::sqrt(1.0 / (static_cast<double>(c_in) *
                                        static_cast<double>(k) * static_cast<double>(k)));
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t i = 0; i < c_in; ++i) {
      std::mt19937_64 rng(filter_seed(seed, o, i));
      std::normal_distribution<double> dist(0.0, sigma);
      for (double& v : coeffs.filter(o, i)) v = dist(rng);
    }
  }
  return coeffs;
}

double mse_loss(std::span<const double> filter, std::span<const double> coeffs,
                const SampleGrid& grid, BasisKind kind) {
  const std::size_t k = grid.k;
  if (filter.size() != k * k)
    throw ArgumentError("mse_loss: filter slice does not match the grid");
  const std::size_t n = isqrt_exact(coeffs.size(), "mse_loss: coefficient");
  if (n > k) throw ArgumentError("mse_loss: harmonic count exceeds kernel side");

  const DesignMatrix dm = design_matrix(kind, k, n);
  double acc = 0.0;
  for (std::size_t row = 0; row < dm.rows(); ++row) {
    double what = 0.0;
    const auto phi_row = dm.row(row);
    for (std::size_t col = 0; col < dm.cols(); ++col) what += phi_row[col] * coeffs[col];
    const double r = filter[row] - what;
    acc += r * r;
  }
  return acc / static_cast<double>(k * k);
}

std::vector<double> mse_gradient(std::span<const double> filter,
                                 std::span<const double> coeffs,
                                 const SampleGrid& grid, BasisKind kind) {
  const std::size_t k = grid.k;
  if (filter.size() != k * k)
    throw ArgumentError("mse_gradient: filter slice does not match the grid");
  const std::size_t n = isqrt_exact(coeffs.size(), "mse_gradient: coefficient");
  if (n > k) throw ArgumentError("mse_gradient: harmonic count exceeds kernel side");

  const DesignMatrix dm = design_matrix(kind, k, n);
  std::vector<double> residual(dm.rows());
  for (std::size_t row = 0; row < dm.rows(); ++row) {
    double what = 0.0;
    const auto phi_row = dm.row(row);
    for (std::size_t col = 0; col < dm.cols(); ++col) what += phi_row[col] * coeffs[col];
    residual[row] = what - filter[row];
  }
  std::vector<double> grad(dm.cols(), 0.0);
  const double scale = 2.0 / static_cast<double>(k * k);
  for (std::size_t row = 0; row < dm.rows(); ++row) {
    const auto phi_row = dm.row(row);
    for (std::size_t col = 0; col < dm.cols(); ++col)
      grad[col] += scale * phi_row[col] * residual[row];
  }
  return grad;
}

std::pair<CoeffTensor, FitReport> fit(const Tensor4& kernels, BasisKind kind,
                                      std::size_t n, const FitConfig& config) {
  if (kernels.k_h != kernels.k_w)
    throw ArgumentError("fit: kernels must be square, got " + std::to_string(kernels.k_h) +
                        "x" + std::to_string(kernels.k_w));
  const std::size_t k = kernels.k_h;
  if (n == 0 || n > k)
    throw ArgumentError("fit: harmonic count must satisfy 1 <= n <= K, got n = " +
                        std::to_string(n) + " with K = " + std::to_string(k));
  if (config.learning_rate <= 0.0) throw ArgumentError("fit: learning rate must be positive");
  if (config.max_iters == 0) throw ArgumentError("fit: max_iters must be at least 1");
  if (config.grad_tol <= 0.0) throw ArgumentError("fit: grad_tol must be positive");
  if (config.method == FitMethod::ClosedFormDCT && n != k)
    throw ArgumentError("fit: the closed-form DCT needs as many harmonics as kernel "
                        "samples (n == K)");

  const Eigen::MatrixXd phi = to_eigen(design_matrix(kind, k, n));
  const auto kk = static_cast<double>(k * k);
  const std::size_t filters = kernels.filter_count();

  CoeffTensor coeffs(kernels.c_out, kernels.c_in, n);
  FitReport report;
  report.filters.resize(filters);

  // Normal equations share one factorization across filters. Phi^T Phi is
  // well-conditioned for these bases (diagonal, in fact), so LLT is enough;
  // if it ever fails we fall back to descent and flag it in the report.
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool llt_ok = false;
  if (config.method == FitMethod::LeastSquares) {
    llt.compute(phi.transpose() * phi);
    llt_ok = llt.info() == Eigen::Success;
  }

  // Column normalizers of the orthogonal basis: c_0 = K, c_i = K/2.
  std::vector<double> inv_col_norm;
  if (config.method == FitMethod::ClosedFormDCT) {
    inv_col_norm.resize(n * n);
    const double kd = static_cast<double>(k);
    for (std::size_t i0 = 0; i0 < n; ++i0)
      for (std::size_t i1 = 0; i1 < n; ++i1)
        inv_col_norm[i0 * n + i1] =
            1.0 / ((i0 == 0 ? kd : kd / 2.0) * (i1 == 0 ? kd : kd / 2.0));
  }

  const InitScheme scheme = config.init.value_or(kind == BasisKind::Chebyshev
                                                     ? InitScheme::ChebyshevMeanDC
                                                     : InitScheme::GaussianRandom);
  CoeffTensor initial;
  if (config.method == FitMethod::GradientDescent ||
      (config.method == FitMethod::LeastSquares && !llt_ok)) {
    initial = scheme == InitScheme::ChebyshevMeanDC
                  ? init_chebyshev(kernels, n)
                  : init_gaussian(kernels.c_out, kernels.c_in, k, n, config.seed);
  }

  parallel_filters(filters, config.threads, [&](std::size_t f) {
    const std::size_t o = f / kernels.c_in;
    const std::size_t i = f % kernels.c_in;
    const auto w_slice = kernels.filter(o, i);
    Eigen::Map<const Eigen::VectorXd> w(w_slice.data(),
                                        static_cast<Eigen::Index>(w_slice.size()));
    auto out = coeffs.filter(o, i);
    FilterFit& ff = report.filters[f];

    switch (config.method) {
      case FitMethod::ClosedFormDCT: {
        Eigen::VectorXd a = phi.transpose() * w;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = a(c) * inv_col_norm[c];
        Eigen::Map<const Eigen::VectorXd> av(out.data(),
                                             static_cast<Eigen::Index>(out.size()));
        Eigen::VectorXd r = phi * av - w;
        ff.mse = r.squaredNorm() / kk;
        ff.max_abs_residual = r.lpNorm<Eigen::Infinity>();
        break;
      }
      case FitMethod::LeastSquares: {
        if (llt_ok) {
          Eigen::VectorXd a = llt.solve(phi.transpose() * w);
          Eigen::VectorXd r = phi * a - w;
          for (std::size_t c = 0; c < out.size(); ++c) out[c] = a(c);
          ff.mse = r.squaredNorm() / kk;
          ff.max_abs_residual = r.lpNorm<Eigen::Infinity>();
          break;
        }
        [[fallthrough]];
      }
      case FitMethod::GradientDescent: {
        const auto init_slice = initial.filter(o, i);
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
            init_slice.data(), static_cast<Eigen::Index>(init_slice.size()));
        const DescentResult res = descend(phi, w, a, config);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = a(c);
        ff.mse = res.mse;
        ff.iters = res.iters;
        ff.max_abs_residual = res.max_abs_residual;
        ff.fell_back_to_gd = config.method == FitMethod::LeastSquares;
        break;
      }
    }
  });

  return {std::move(coeffs), std::move(report)};
}

}  // namespace fkc
