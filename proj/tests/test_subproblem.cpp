#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subnewton/error.hpp"
#include "subnewton/subproblem.hpp"

using namespace subnewton;

namespace {

// Rows e_1, ..., e_d so that slot weights set a diagonal model.
SparseDataset unit_rows(std::size_t d) {
  SparseDataset ds;
  for (std::size_t j = 0; j < d; ++j) {
    const Index idx[] = {static_cast<Index>(j)};
    const double val[] = {1.0};
    ds.add_row(idx, val, 1.0);
  }
  return ds;
}

SparseDataset make_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.density = 0.6;
  spec.seed = seed;
  return generate_synthetic(spec).data;
}

SubsampledQuadratic random_model(const SparseDataset& ds, std::mt19937_64& rng, double gamma) {
  std::uniform_int_distribution<std::size_t> row(0, ds.n() - 1);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Slot> slots;
  for (std::size_t k = 0; k < 12; ++k) slots.push_back({row(rng), weight(rng)});
  std::vector<double> grad(ds.d()), anchor(ds.d());
  for (std::size_t j = 0; j < ds.d(); ++j) {
    grad[j] = g(rng);
    anchor[j] = g(rng);
  }
  return make_quadratic(ds, std::move(slots), std::move(grad), gamma, anchor);
}

std::vector<double> random_vec(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("quad_matvec: ridge only and rank one") {
  const SparseDataset ds = unit_rows(2);
  const auto ridge = make_quadratic(ds, {}, {0.0, 0.0}, 0.7, std::vector<double>(2, 0.0));
  const auto out = quad_matvec(ridge, std::vector<double>{3.0, 5.0});
  CHECK(out[0] == doctest::Approx(2.1));
  CHECK(out[1] == doctest::Approx(3.5));

  const auto rank1 = make_quadratic(ds, {{0, 2.0}}, {0.0, 0.0}, 0.0, std::vector<double>(2, 0.0));
  const auto r = quad_matvec(rank1, std::vector<double>{3.0, 5.0});
  CHECK(r[0] == 6.0);
  CHECK(r[1] == 0.0);
}

TEST_CASE("quad_matvec and value match the dense model") {
  std::mt19937_64 rng(1);
  const SparseDataset ds = make_data(15, 6, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_model(ds, rng, 0.05);
    const auto v = random_vec(6, rng);
    const oracle::Mat B = oracle::dense_model(q);
    const oracle::Vec ref = B * oracle::to_vec(v);
    const auto got = quad_matvec(q, v);
    CHECK((oracle::to_vec(got) - ref).norm() <= 1e-12 * ref.norm());

    const double l1 = 0.3;
    const oracle::DenseSubproblem sp{B, oracle::to_vec(q.g), oracle::to_vec(q.anchor), l1};
    const double value = subproblem_value(q, Regularizer::lasso(l1), v);
    const double expect = sp.value(oracle::to_vec(v));
    CHECK(std::fabs(value - expect) <= 1e-12 * std::max(1.0, std::fabs(expect)));
  }
}

TEST_CASE("subproblem_value: hand values") {
  const SparseDataset ds = unit_rows(1);
  const auto q = make_quadratic(ds, {{0, 2.0}}, {-2.0}, 0.0, std::vector<double>{0.0});
  CHECK(subproblem_value(q, Regularizer::none(), std::vector<double>{1.5}) == doctest::Approx(-0.75));
  const auto q2 = make_quadratic(ds, {{0, 2.0}}, {-2.0}, 0.0, std::vector<double>{-4.0});
  CHECK(subproblem_value(q2, Regularizer::lasso(0.5), std::vector<double>{0.0}) == doctest::Approx(2.0));
}

TEST_CASE("component_gradient: identities") {
  std::mt19937_64 rng(3);
  const SparseDataset ds = make_data(15, 5, 4);
  const auto q = random_model(ds, rng, 0.1);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const auto g0 = component_gradient(q, k, std::vector<double>(5, 0.0));
    for (std::size_t j = 0; j < 5; ++j) CHECK(g0[j] == q.g[j]);
  }
  const auto v = random_vec(5, rng);
  std::vector<double> avg(5, 0.0);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const auto gk = component_gradient(q, k, v);
    for (std::size_t j = 0; j < 5; ++j) avg[j] += gk[j] / static_cast<double>(q.size());
  }
  const auto full = model_gradient(q, v);
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::fabs(avg[j] - full[j]) <= 1e-12 * (1.0 + std::fabs(full[j])));
  CHECK_THROWS_AS(component_gradient(q, q.size(), v), ConfigError);

  const auto single = make_quadratic(ds, {{2, 0.4}}, q.g, 0.1, q.anchor);
  const auto a = component_gradient(single, 0, v), b = model_gradient(single, v);
  for (std::size_t j = 0; j < 5; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-15));
}

TEST_CASE("newton_decrement: hand values") {
  const SparseDataset ds = unit_rows(2);
  const auto eye = make_quadratic(ds, {}, {0.0, 0.0}, 1.0, std::vector<double>(2, 0.0));
  CHECK(newton_decrement(eye, std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(newton_decrement(eye, std::vector<double>{0.0, 0.0}) == 0.0);
  const auto diag = make_quadratic(ds, {{0, 1.0}, {1, 4.0}}, {0.0, 0.0}, 0.0, std::vector<double>(2, 0.0));
  CHECK(newton_decrement(diag, std::vector<double>{1.0, 1.0}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("residual_certificate: scalar model makes the residual vanish") {
  const SparseDataset ds = unit_rows(3);
  const double alpha = 0.25;
  const auto q = make_quadratic(ds, {}, {1.0, -2.0, 0.5}, 1.0 / alpha, std::vector<double>{0.3, 0.0, -1.0});
  const auto cert = residual_certificate(q, Regularizer::lasso(0.2), std::vector<double>{0.1, 0.4, -0.2}, alpha);
  for (double r : cert.r) CHECK(std::fabs(r) <= 1e-15);
}

TEST_CASE("residual_certificate: one-dimensional hand evaluation") {
  const SparseDataset ds = unit_rows(1);
  const auto q = make_quadratic(ds, {{0, 2.0}}, {-2.0}, 0.0, std::vector<double>{0.0});
  const auto cert = residual_certificate(q, Regularizer::none(), std::vector<double>{0.5}, 1.0);
  CHECK(cert.v_post[0] == doctest::Approx(1.5));
  CHECK(cert.r[0] == doctest::Approx(1.0));
  CHECK(model_gradient(q, cert.v_post)[0] == doctest::Approx(cert.r[0]));
}

TEST_CASE("residual_certificate: optimal input gives zero residual") {
  // min -3 v + v^2 + 1 * |v|: soft threshold gives v* = (3 - 1) / 2 = 1.
  const SparseDataset ds = unit_rows(1);
  const auto q = make_quadratic(ds, {{0, 2.0}}, {-3.0}, 0.0, std::vector<double>{0.0});
  const auto cert = residual_certificate(q, Regularizer::lasso(1.0), std::vector<double>{1.0}, 0.3);
  CHECK(std::fabs(cert.r[0]) <= 1e-12);
  CHECK(cert.v_post[0] == doctest::Approx(1.0));

  // 2-D with a coordinate pinned at zero by the threshold: B = I, g = (-2, 0.5), l1 = 1.
  const SparseDataset two = unit_rows(2);
  const auto q2 = make_quadratic(two, {}, {-2.0, 0.5}, 1.0, std::vector<double>(2, 0.0));
  const auto c2 = residual_certificate(q2, Regularizer::lasso(1.0), std::vector<double>{1.0, 0.0}, 0.7);
  CHECK(std::fabs(c2.r[0]) <= 1e-12);
  CHECK(std::fabs(c2.r[1]) <= 1e-12);

  const auto off = residual_certificate(q2, Regularizer::lasso(1.0), std::vector<double>{0.5, 0.2}, 0.7);
  CHECK(std::fabs(off.r[0]) + std::fabs(off.r[1]) > 1e-3);
}

TEST_CASE("residual lies in the subdifferential at v_post") {
  std::mt19937_64 rng(5);
  const SparseDataset ds = make_data(15, 6, 6);
  const double l1 = 0.4;
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_model(ds, rng, 0.05);
    const auto v = random_vec(6, rng);
    const auto cert = residual_certificate(q, Regularizer::lasso(l1), v, 0.05);
    const auto grad = model_gradient(q, cert.v_post);
    for (std::size_t j = 0; j < 6; ++j) {
      const double s = cert.r[j] - grad[j];  // must be l1 * subgradient of |w_j|
      const double wj = q.anchor[j] + cert.v_post[j];
      if (wj != 0.0) CHECK(std::fabs(s - l1 * (wj > 0 ? 1.0 : -1.0)) <= 1e-9);
      else CHECK(std::fabs(s) <= l1 + 1e-9);
    }
  }
}

TEST_CASE("dual_norm_estimate: hand values") {
  const SparseDataset ds = unit_rows(2);
  const auto eye = make_quadratic(ds, {}, {0.0, 0.0}, 1.0, std::vector<double>(2, 0.0));
  CHECK(dual_norm_estimate(eye, std::vector<double>{3.0, 4.0}).value == doctest::Approx(5.0));
  CHECK(dual_norm_estimate(eye, std::vector<double>{0.0, 0.0}).value == 0.0);
  const auto diag = make_quadratic(ds, {{0, 3.0}}, {0.0, 0.0}, 1.0, std::vector<double>(2, 0.0));
  CHECK(dual_norm_estimate(diag, std::vector<double>{2.0, 0.0}).value == doctest::Approx(1.0));
  const auto stall = dual_norm_estimate(diag, std::vector<double>{2.0, 1.0}, 1e-12, 1);
  CHECK(stall.fallback);
  CHECK(stall.value == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("dual norm: upper bound and duality inequality") {
  std::mt19937_64 rng(7);
  const SparseDataset ds = make_data(15, 6, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_model(ds, rng, 0.02);
    const auto r = random_vec(6, rng), v = random_vec(6, rng);
    const double tol = 1e-2;
    const double est = dual_norm_estimate(q, r, tol).value;
    const oracle::Mat B = oracle::dense_model(q);
    const oracle::Vec rv = oracle::to_vec(r);
    const double exact = std::sqrt(rv.dot(B.ldlt().solve(rv)));
    CHECK(est >= exact * (1.0 - 1e-12));
    CHECK(est <= std::sqrt(exact * exact + tol * tol * rv.squaredNorm() / q.gamma) * (1.0 + 1e-12));
    CHECK(std::fabs(rv.dot(oracle::to_vec(v))) <= est * newton_decrement(q, v) * (1.0 + tol));
  }
}
