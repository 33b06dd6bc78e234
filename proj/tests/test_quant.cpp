#include "fkc/quant.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fkc/errors.hpp"
#include "test_util.hpp"

using namespace fkc;
using fkc::test::TempDir;

TEST_CASE("powers of two encode exactly") {
  const BfpConfig cfg{8};
  for (double v : {1.0, 2.0, 0.5, -4.0, 1024.0, 0x1p-40}) {
    const double deq = bfp_decode(bfp_encode(v, cfg), cfg);
    CHECK(deq == v);
  }
}

TEST_CASE("zero encodes as exact zero") {
  const BfpConfig cfg{8};
  CHECK(bfp_decode(bfp_encode(0.0, cfg), cfg) == 0.0);
  CHECK(bfp_decode(bfp_encode(-0.0, cfg), cfg) == 0.0);
  const BfpCode code = bfp_encode(0.0, cfg);
  CHECK(code.mantissa == 0);
}

TEST_CASE("relative error stays below 2^-m") {
  std::mt19937_64 rng(7);
  SUBCASE("values in [0.5, 2) at m = 8") {
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    const BfpConfig cfg{8};
    for (int i = 0; i < 20000; ++i) {
      const double v = dist(rng);
      const double deq = bfp_decode(bfp_encode(v, cfg), cfg);
      CHECK(std::abs(v - deq) / std::abs(v) <= 0x1p-8);
    }
  }
  SUBCASE("log-spaced sweep across the exponent range, several widths") {
    for (unsigned m : {1u, 4u, 8u, 16u, 23u}) {
      const BfpConfig cfg{m};
      for (int i = 0; i < 5000; ++i) {
        const double t = static_cast<double>(i) / 4999.0;
        const double v = std::exp2(-60.0 + 120.0 * t) * (i % 2 == 0 ? 1.0 : -1.0);
        const double deq = bfp_decode(bfp_encode(v, cfg), cfg);
        CHECK(std::abs(v - deq) / std::abs(v) <= std::exp2(-static_cast<double>(m)));
      }
    }
  }
}

TEST_CASE("quantization is idempotent, bit for bit") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist(0.0, 10.0);
  std::vector<double> values(5000);
  for (auto& v : values) v = dist(rng);
  values.push_back(0.0);
  values.push_back(0x1p63);      // near the top of the range
  values.push_back(-0x1p-100);   // below the exponent floor

  const BfpConfig cfg{6};
  const QuantResult once = quantize_bfp(values, cfg);
  const QuantResult twice = quantize_bfp(once.values, cfg);
  CHECK(once.values == twice.values);
  CHECK(once.encoded_bits == values.size() * (6 + 8));
}

TEST_CASE("more mantissa bits never increase the per-element error") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  std::vector<double> values(2000);
  for (auto& v : values) v = dist(rng);

  std::vector<double> prev_err(values.size(), std::numeric_limits<double>::infinity());
  for (unsigned m = 1; m <= 23; ++m) {
    const QuantResult q = quantize_bfp(values, BfpConfig{m});
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double err = std::abs(values[i] - q.values[i]);
      CHECK(err <= prev_err[i]);
      prev_err[i] = err;
    }
  }
}

TEST_CASE("quantize_bfp rejects bad input") {
  CHECK_THROWS_AS(quantize_bfp(std::vector<double>{1.0}, BfpConfig{0}), ArgumentError);
  CHECK_THROWS_AS(quantize_bfp(std::vector<double>{1.0}, BfpConfig{24}), ArgumentError);
  const std::vector<double> bad = {std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(quantize_bfp(bad, BfpConfig{8}), DataError);
}

TEST_CASE("straight-through estimator") {
  const BfpConfig cfg{8};
  SUBCASE("in-range values pass the gradient through unchanged") {
    const std::vector<double> grad = {1.0, -2.5, 0.25, 1e10};
    const std::vector<double> values = {0.5, -100.0, 0x1p60, 1e-30};
    CHECK(ste_passthrough(grad, values, cfg) == grad);
  }
  SUBCASE("saturated positions zero out") {
    const std::vector<double> grad = {3.0, 4.0, 5.0};
    const std::vector<double> values = {0x1p64, -0x1p70, 1.0};
    const auto out = ste_passthrough(grad, values, cfg);
    CHECK(out == std::vector<double>{0.0, 0.0, 5.0});
  }
  SUBCASE("zero upstream gradient stays zero") {
    const std::vector<double> grad(4, 0.0);
    const std::vector<double> values = {1.0, 2.0, 3.0, 4.0};
    CHECK(ste_passthrough(grad, values, cfg) == grad);
  }
  SUBCASE("shape mismatch") {
    const std::vector<double> grad(3, 1.0);
    const std::vector<double> values(4, 1.0);
    CHECK_THROWS_AS(ste_passthrough(grad, values, cfg), ArgumentError);
  }
}

TEST_CASE("model size arithmetic") {
  CHECK(model_size_bytes(11680000, std::nullopt) == 46720000);
  CHECK(model_size_bytes(11680000, BfpConfig{8}) == 23360000);
  CHECK(model_size_bytes(7090000, BfpConfig{8}) == 14180000);
  CHECK(model_size_bytes(11680000, BfpConfig{4}) == 17520000);
  CHECK(model_size_bytes(0, BfpConfig{8}) == 0);
  CHECK(model_size_bytes(3, BfpConfig{4}) == 5);  // 36 bits round up to 5 bytes
}

TEST_CASE("FKQ1 files round-trip the quantized coefficients bit-exactly") {
  TempDir dir;
  const Tensor4 original = test::random_kernels(3, 2, 5, 777);
  FitConfig fit_cfg;
  fit_cfg.method = FitMethod::LeastSquares;
  CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 3, fit_cfg,
                                         std::vector<double>{1.0, 2.0, 3.0});
  const BfpConfig cfg{8};
  save_quantized_layer(layer, cfg, dir.file("layer.fkq"));
  const QuantizedLayer back = load_quantized_layer(dir.file("layer.fkq"));

  CHECK(back.config.mantissa_bits == 8);
  CHECK(back.layer.kind == layer.kind);
  CHECK(back.layer.c_out == layer.c_out);
  CHECK(back.layer.n == layer.n);
  REQUIRE(back.layer.bias.has_value());
  CHECK(*back.layer.bias == *layer.bias);  // bias rides along uncompressed

  const QuantResult expect = quantize_bfp(layer.coeffs.data, cfg);
  CHECK(back.layer.coeffs.data == expect.values);

  // element payload is byte-aligned to ceil((m+8)/8) bytes
  std::ifstream in(dir.file("layer.fkq"), std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  const std::size_t coeff_bytes = layer.coeffs.data.size() * 2;  // m=8: 16 bits
  CHECK(bytes.size() == 39 + coeff_bytes + 3 * 8 + 8 + layer.fit.filters.size() * 8);
}

TEST_CASE("FKQ1 loader rejects malformed files") {
  TempDir dir;
  const Tensor4 original = test::random_kernels(1, 1, 3, 70);
  const CompressedLayer layer = compress_layer(original, BasisKind::Cosine, 2, {});
  save_quantized_layer(layer, BfpConfig{5}, dir.file("layer.fkq"));

  std::ifstream in(dir.file("layer.fkq"), std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  in.close();

  SUBCASE("bad mantissa width") {
    bytes[5] = 30;
    std::ofstream out(dir.file("bad.fkq"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_quantized_layer(dir.file("bad.fkq")), FormatError);
  }
  SUBCASE("truncation") {
    bytes.resize(bytes.size() - 1);
    std::ofstream out(dir.file("bad.fkq"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_quantized_layer(dir.file("bad.fkq")), FormatError);
  }
}
