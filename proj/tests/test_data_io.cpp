#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <zlib.h>

#include "oracles.hpp"
#include "subnewton/dataset.hpp"
#include "subnewton/error.hpp"

using namespace subnewton;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_libsvm(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

SparseDataset small_random(std::size_t n, std::size_t d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.density = 0.6;
  spec.seed = seed;
  return generate_synthetic(spec).data;
}

}  // namespace

TEST_CASE("parse_libsvm: single row with 1-based indices") {
  const SparseDataset ds = parse_libsvm("+1 1:0.5 3:2.0");
  REQUIRE(ds.n() == 1);
  CHECK(ds.d() == 3);
  CHECK(ds.nnz() == 2);
  CHECK(ds.label(0) == 1.0);
  const RowView r = ds.row(0);
  CHECK(r.idx[0] == 0);
  CHECK(r.val[0] == 0.5);
  CHECK(r.idx[1] == 2);
  CHECK(r.val[1] == 2.0);
}

TEST_CASE("parse_libsvm: empty stream gives an empty dataset") {
  const SparseDataset ds = parse_libsvm("");
  CHECK(ds.n() == 0);
  CHECK(ds.nnz() == 0);
  CHECK_THROWS_AS(ds.require_nonempty(), ConfigError);
}

TEST_CASE("parse_libsvm: errors carry line numbers") {
  CHECK(error_of("1 2:1 1:1") == "indices not increasing at line 1");
  CHECK(error_of("1 1:1\n\n-1 2:x").find("malformed token '2:x' at line 3") != std::string::npos);
  CHECK(error_of("abc 1:1").find("malformed label") != std::string::npos);
  CHECK(error_of("1 0:1").find("out of range") != std::string::npos);
  CHECK(error_of("1 3").find("malformed token") != std::string::npos);
}

TEST_CASE("parse_libsvm: blank lines skipped, dimension override") {
  const SparseDataset ds = parse_libsvm("\n1 2:1\n   \n-1 1:-3\n", 10);
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 10);
  CHECK(ds.label(1) == -1.0);
}

TEST_CASE("serialize then parse is the identity") {
  const SparseDataset ds = small_random(30, 7, 3);
  const SparseDataset back = parse_libsvm(to_libsvm(ds), ds.d());
  CHECK(back == ds);
}

TEST_CASE("load_libsvm reads plain and gzip files") {
  const SparseDataset ds = small_random(12, 5, 4);
  const std::string text = to_libsvm(ds);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string plain = (dir / "subnewton_test_data.svm").string();
  const std::string gz = (dir / "subnewton_test_data.svm.gz").string();
  {
    std::ofstream out(plain);
    out << text;
  }
  {
    gzFile f = gzopen(gz.c_str(), "wb");
    REQUIRE(f != nullptr);
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
  }
  CHECK(load_libsvm(plain, ds.d()) == ds);
  CHECK(load_libsvm(gz, ds.d()) == ds);
  CHECK_THROWS_AS(load_libsvm((dir / "subnewton_missing.svm").string()), DataError);
  std::filesystem::remove(plain);
  std::filesystem::remove(gz);
}

TEST_CASE("add_row enforces the row invariants") {
  SparseDataset ds;
  const Index bad[] = {2, 1};
  const double val[] = {1.0, 1.0};
  CHECK_THROWS_AS(ds.add_row(bad, val, 1.0), DataError);
  const Index good[] = {1, 4};
  ds.add_row(good, val, -1.0);
  CHECK(ds.d() == 5);
  ds.set_dim(3);
  CHECK(ds.d() == 5);
}

TEST_CASE("labels: binary check") {
  CHECK_NOTHROW(parse_libsvm("1 1:1\n-1 1:2").require_binary_labels());
  CHECK_THROWS_AS(parse_libsvm("1 1:1\n0.5 1:2").require_binary_labels(), DataError);
}

TEST_CASE("with_bias appends a constant feature") {
  const SparseDataset ds = parse_libsvm("1 2:3\n-1 1:1");
  const SparseDataset b = ds.with_bias();
  CHECK(b.d() == 3);
  const std::vector<double> w = {0.0, 0.0, 1.0};
  const auto u = margins(b, w);
  CHECK(u[0] == 1.0);
  CHECK(u[1] == 1.0);
}

TEST_CASE("generate_synthetic: determinism and full density") {
  SyntheticSpec spec;
  spec.n = 4;
  spec.d = 3;
  spec.density = 1.0;
  spec.seed = 7;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.data == b.data);
  CHECK(a.w_true == b.w_true);
  CHECK(a.data.nnz() == 12);
  spec.seed = 8;
  CHECK_FALSE(generate_synthetic(spec).data == a.data);
}

TEST_CASE("generate_synthetic: label noise rate") {
  SyntheticSpec spec;
  spec.n = 2000;
  spec.d = 50;
  spec.label_noise = 0.05;
  spec.seed = 1;
  const auto inst = generate_synthetic(spec);
  const auto u = margins(inst.data, inst.w_true);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < spec.n; ++i)
    if ((u[i] >= 0.0 ? 1.0 : -1.0) == inst.data.label(i)) ++agree;
  // Binomial(2000, 0.95): standard deviation about 9.7 rows.
  CHECK(agree >= 1850);
  CHECK(agree <= 1950);
}

TEST_CASE("generate_synthetic: expected density") {
  SyntheticSpec spec;
  spec.n = 500;
  spec.d = 40;
  spec.density = 0.25;
  const auto inst = generate_synthetic(spec);
  const double mean = static_cast<double>(inst.data.nnz()) / 500.0;
  CHECK(mean == doctest::Approx(10.0).epsilon(0.05));
  CHECK_THROWS_AS(([&] {
                    SyntheticSpec bad = spec;
                    bad.density = 0.0;
                    generate_synthetic(bad);
                  }()),
                  ConfigError);
}

TEST_CASE("margins: hand values and dense oracle") {
  SparseDataset ds;
  const Index idx[] = {0, 2};
  const double val[] = {1.0, 2.0};
  ds.add_row(idx, val, 1.0);
  const std::vector<double> w = {3.0, 9.0, 1.0};
  CHECK(margins(ds, w)[0] == 5.0);
  for (double u : margins(ds, std::vector<double>(3, 0.0))) CHECK(u == 0.0);
  CHECK_THROWS_AS(margins(ds, std::vector<double>(2, 0.0)), ConfigError);

  const SparseDataset dense3 = parse_libsvm("1 1:0.5 2:-1.25\n-1 1:2\n1 2:3.5");
  const std::vector<double> w2 = {0.75, -2.0};
  const oracle::Vec ref = oracle::dense(dense3) * oracle::to_vec(w2);
  const auto u = margins(dense3, w2);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(u[static_cast<std::size_t>(i)] - ref(i)) <= 1e-15);
}

TEST_CASE("margins is linear") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const SparseDataset ds = small_random(15, 6, static_cast<std::uint64_t>(trial + 10));
    std::vector<double> w1(6), w2(6), sum(6);
    for (std::size_t j = 0; j < 6; ++j) {
      w1[j] = g(rng);
      w2[j] = g(rng);
      sum[j] = w1[j] + w2[j];
    }
    const auto a = margins(ds, w1), b = margins(ds, w2), c = margins(ds, sum);
    for (std::size_t i = 0; i < ds.n(); ++i)
      CHECK(std::fabs(c[i] - (a[i] + b[i])) <= 1e-12 * (std::fabs(a[i]) + std::fabs(b[i]) + 1.0));
  }
}

TEST_CASE("accumulate_rows computes X^T coef") {
  const SparseDataset ds = small_random(9, 4, 21);
  std::vector<double> coef(9);
  for (std::size_t i = 0; i < 9; ++i) coef[i] = 0.1 * static_cast<double>(i) - 0.3;
  std::vector<double> out(4, 1.0);
  accumulate_rows(ds, coef, out);
  const oracle::Vec ref = oracle::dense(ds).transpose() * oracle::to_vec(coef);
  for (int j = 0; j < 4; ++j) CHECK(out[static_cast<std::size_t>(j)] == doctest::Approx(1.0 + ref(j)).epsilon(1e-13));
}

TEST_CASE("describe reports basic statistics") {
  const SparseDataset ds = parse_libsvm("1 1:3 2:4\n-1 2:1");
  const DatasetStats s = describe(ds);
  CHECK(s.n == 2);
  CHECK(s.d == 2);
  CHECK(s.nnz == 3);
  CHECK(s.positives == 1);
  CHECK(s.max_row_norm == doctest::Approx(5.0));
  CHECK(s.density == doctest::Approx(0.75));
}
