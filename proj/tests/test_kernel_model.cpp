#include "fkc/kernel_model.hpp"

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fkc/errors.hpp"
#include "test_util.hpp"

using namespace fkc;
using fkc::test::TempDir;

namespace {

CompressedLayer dc_only_layer(std::size_t c_out, std::size_t c_in, std::size_t k,
                              std::size_t n, double dc) {
  CompressedLayer layer;
  layer.kind = BasisKind::Cosine;
  layer.c_out = c_out;
  layer.c_in = c_in;
  layer.k = k;
  layer.n = n;
  layer.coeffs = CoeffTensor(c_out, c_in, n);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t i = 0; i < c_in; ++i) layer.coeffs.filter(o, i)[0] = dc;
  layer.fit.filters.resize(c_out * c_in);
  return layer;
}

}  // namespace

TEST_CASE("parameter accounting follows the n^2 rule") {
  SUBCASE("k=3 n=2 without bias") {
    const auto layer = dc_only_layer(1, 1, 3, 2, 0.0);
    const ParamCounts counts = layer_param_counts(layer);
    CHECK(counts.original == 9);
    CHECK(counts.compressed == 4);
    CHECK(counts.reduction_pct == doctest::Approx(100.0 * 5.0 / 9.0).epsilon(1e-12));
  }
  SUBCASE("k=n gives zero reduction") {
    const auto layer = dc_only_layer(2, 3, 5, 5, 0.0);
    CHECK(layer_param_counts(layer).reduction_pct == 0.0);
  }
  SUBCASE("k=7 n=6") {
    const auto layer = dc_only_layer(1, 1, 7, 6, 0.0);
    CHECK(layer_param_counts(layer).reduction_pct ==
          doctest::Approx(100.0 * (1.0 - 36.0 / 49.0)).epsilon(1e-12));
  }
  SUBCASE("k=7 n=4") {
    const auto layer = dc_only_layer(4, 4, 7, 4, 0.0);
    const ParamCounts counts = layer_param_counts(layer);
    CHECK(counts.original == 4ull * 4 * 49);
    CHECK(counts.compressed == 4ull * 4 * 16);
    CHECK(counts.reduction_pct ==
          doctest::Approx(100.0 * (1.0 - 16.0 / 49.0)).epsilon(1e-12));
  }
  SUBCASE("bias counts on both sides") {
    auto layer = dc_only_layer(4, 1, 3, 2, 0.0);
    layer.bias = std::vector<double>(4, 0.1);
    const ParamCounts counts = layer_param_counts(layer);
    CHECK(counts.original == 4ull * 9 + 4);
    CHECK(counts.compressed == 4ull * 4 + 4);
  }
  SUBCASE("reduction beats 50% whenever n/k < 1/sqrt(2)") {
    for (std::size_t k = 2; k <= 11; ++k) {
      for (std::size_t n = 1; n <= k; ++n) {
        const auto layer = dc_only_layer(1, 1, k, n, 0.0);
        if (static_cast<double>(n) / static_cast<double>(k) < 1.0 / std::sqrt(2.0))
          CHECK(layer_param_counts(layer).reduction_pct > 50.0);
      }
    }
  }
}

TEST_CASE("reconstruct handles degenerate coefficient patterns") {
  SUBCASE("all-zero coefficients give the zero tensor") {
    const auto layer = dc_only_layer(2, 2, 3, 2, 0.0);
    const Tensor4 out = reconstruct(layer);
    for (double v : out.data) CHECK(v == 0.0);
  }
  SUBCASE("DC-only coefficients give constant kernels") {
    const auto layer = dc_only_layer(2, 1, 5, 3, 1.75);
    const Tensor4 out = reconstruct(layer);
    for (double v : out.data) CHECK(v == doctest::Approx(1.75).epsilon(1e-15));
  }
}

TEST_CASE("compress at n = K then reconstruct recovers the kernels") {
  for (BasisKind kind : {BasisKind::Cosine, BasisKind::Chebyshev}) {
    const Tensor4 original = test::random_kernels(3, 2, 5, 2718);
    FitConfig cfg;
    cfg.method = FitMethod::ClosedFormDCT;
    const CompressedLayer layer = compress_layer(original, kind, 5, cfg);
    const Tensor4 back = reconstruct(layer);
    for (std::size_t idx = 0; idx < original.data.size(); ++idx)
      CHECK(std::abs(back.data[idx] - original.data[idx]) <= 1e-9);
    CHECK(layer_param_counts(layer).reduction_pct == 0.0);
  }
}

TEST_CASE("compress_layer propagates fit diagnostics") {
  const Tensor4 original = test::random_kernels(2, 2, 3, 11);
  FitConfig cfg;
  cfg.method = FitMethod::LeastSquares;
  const CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 2, cfg);
  REQUIRE(layer.fit.filters.size() == 4);
  CHECK(layer.n == 2);
  CHECK(layer.k == 3);
  CHECK(layer_param_counts(layer).reduction_pct == doctest::Approx(100.0 * 5 / 9));
}

TEST_CASE("reconstruction_error metrics") {
  SUBCASE("identical tensors give zeros") {
    const Tensor4 original = test::random_kernels(2, 1, 3, 5);
    FitConfig cfg;
    cfg.method = FitMethod::ClosedFormDCT;
    const CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 3, cfg);
    for (const auto& s : reconstruction_error(original, layer)) {
      CHECK(s.mse <= 1e-18);
      CHECK(s.l2 <= 1e-9);
      CHECK(s.max_abs <= 1e-9);
    }
  }
  SUBCASE("ones vs zero layer") {
    Tensor4 original(1, 1, 3, 3);
    for (auto& v : original.data) v = 1.0;
    const auto layer = dc_only_layer(1, 1, 3, 2, 0.0);
    const auto stats = reconstruction_error(original, layer);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].mse == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(stats[0].l2 == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(stats[0].max_abs == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("mse agrees with the fitter-reported loss") {
    const Tensor4 original = test::random_kernels(1, 1, 3, 99);
    FitConfig cfg;
    cfg.method = FitMethod::LeastSquares;
    const CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 2, cfg);
    const auto stats = reconstruction_error(original, layer);
    CHECK(std::abs(stats[0].mse - layer.fit.filters[0].mse) <= 1e-12);
  }
  SUBCASE("shape mismatch is an ArgumentError") {
    const Tensor4 original = test::random_kernels(2, 1, 3, 5);
    const auto layer = dc_only_layer(1, 1, 3, 2, 0.0);
    CHECK_THROWS_AS(reconstruction_error(original, layer), ArgumentError);
  }
}

TEST_CASE("FKC1 files round-trip bit-exactly") {
  TempDir dir;
  const Tensor4 original = test::random_kernels(3, 2, 5, 1234);
  FitConfig cfg;
  cfg.method = FitMethod::LeastSquares;
  CompressedLayer layer = compress_layer(original, BasisKind::Chebyshev, 3, cfg,
                                         std::vector<double>{0.5, -0.25, 0.125});
  save_layer(layer, dir.file("layer.fkc"));
  const CompressedLayer back = load_layer(dir.file("layer.fkc"));

  CHECK(back.kind == layer.kind);
  CHECK(back.c_out == layer.c_out);
  CHECK(back.c_in == layer.c_in);
  CHECK(back.k == layer.k);
  CHECK(back.n == layer.n);
  CHECK(back.coeffs.data == layer.coeffs.data);  // bit-exact
  REQUIRE(back.bias.has_value());
  CHECK(*back.bias == *layer.bias);
  REQUIRE(back.fit.filters.size() == layer.fit.filters.size());
  for (std::size_t f = 0; f < back.fit.filters.size(); ++f)
    CHECK(back.fit.filters[f].mse == layer.fit.filters[f].mse);

  // writing the loaded layer reproduces the same bytes
  save_layer(back, dir.file("layer2.fkc"));
  std::ifstream a(dir.file("layer.fkc"), std::ios::binary);
  std::ifstream b(dir.file("layer2.fkc"), std::ios::binary);
  const std::vector<char> ba((std::istreambuf_iterator<char>(a)), {});
  const std::vector<char> bb((std::istreambuf_iterator<char>(b)), {});
  CHECK(ba == bb);
}

TEST_CASE("FKC1 loader rejects malformed files") {
  TempDir dir;
  const Tensor4 original = test::random_kernels(1, 1, 3, 4);
  const CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 2, {});
  save_layer(layer, dir.file("layer.fkc"));

  std::ifstream in(dir.file("layer.fkc"), std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  in.close();

  SUBCASE("truncation") {
    bytes.resize(bytes.size() - 4);
    std::ofstream out(dir.file("bad.fkc"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_layer(dir.file("bad.fkc")), FormatError);
  }
  SUBCASE("wrong magic") {
    bytes[1] = 'X';
    std::ofstream out(dir.file("bad.fkc"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_layer(dir.file("bad.fkc")), FormatError);
  }
  SUBCASE("n > k") {
    bytes[29] = 9;  // n extent low byte
    std::ofstream out(dir.file("bad.fkc"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_layer(dir.file("bad.fkc")), FormatError);
  }
}
