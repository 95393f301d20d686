#pragma once
// First-order competitors on the full problem: FISTA, Prox-SVRG, SAGA.
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "subnewton/inner.hpp"
#include "subnewton/models.hpp"
#include "subnewton/prox_newton.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

enum class BaselineKind { svrg, saga, fista };
BaselineKind parse_baseline(std::string_view name);
std::string_view to_string(BaselineKind kind);

struct BaselineConfig {
  BaselineKind algorithm = BaselineKind::fista;
  double step = 0.0;             // 0: auto (1/L for FISTA, 1/(3 L_max) for SVRG and SAGA)
  std::size_t epochs = 100;      // FISTA: iterations
  std::size_t epoch_length = 0;  // SVRG inner steps; 0: ceil(0.01 n)
  std::uint64_t seed = 1;
  double tol = 0.0;              // FISTA: stop at gradient-mapping norm <= tol
  // Stop at the first trace point with F <= target_objective.
  double target_objective = -std::numeric_limits<double>::infinity();
  bool restart = true;           // FISTA momentum restart on objective increase
  void validate() const;
};

struct BaselineResult {
  std::vector<double> w;
  std::vector<TraceRecord> trace;
  WorkCounters work;
  double objective = 0.0;
  std::size_t iterations = 0;
  double grad_mapping = std::numeric_limits<double>::quiet_NaN();  // FISTA only
  double step = 0.0;
};

// lambda_max(X^T X / n) by power iteration, inflated by a small safety factor.
double data_spectral_bound(const SparseDataset& data, std::uint64_t seed = 0x7a);
// curvature_bound * lambda_max(X^T X / n) + gamma
double smooth_lipschitz(const Problem& problem);
// curvature_bound * max_i ||x_i||^2 + gamma
double max_component_lipschitz(const Problem& problem);

BaselineResult fista_solve(const Problem& problem, const BaselineConfig& config);
BaselineResult prox_svrg_full(const Problem& problem, const BaselineConfig& config, Rng& rng);
BaselineResult saga_solve(const Problem& problem, const BaselineConfig& config, Rng& rng);
BaselineResult run_baseline(const Problem& problem, const BaselineConfig& config);

// Long FISTA run to gradient-mapping norm <= tol; the F* oracle.
BaselineResult reference_solve(const Problem& problem, double tol = 1e-12, std::size_t max_iter = 200000);

// SAGA state with the O(1)-per-sample derivative table.
class SagaState {
 public:
  SagaState(const Problem& problem, std::span<const double> w0);
  // The update direction for sample j at the current state (no mutation).
  std::vector<double> direction(std::size_t j) const;
  // One SAGA step on sample j with step eta, followed by the prox.
  void step(std::size_t j, double eta);
  std::span<const double> w() const { return w_; }
  std::span<const double> table() const { return table_; }
  std::span<const double> average() const { return avg_; }
  // (1/n) sum_i table_i x_i, recomputed from scratch.
  std::vector<double> recomputed_average() const;

 private:
  const Problem& problem_;
  double gamma_;
  std::vector<double> w_;
  std::vector<double> table_;
  std::vector<double> avg_;
};

}  // namespace subnewton
