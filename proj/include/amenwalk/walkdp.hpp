#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amenwalk/extension.hpp"
#include "amenwalk/numeric.hpp"

namespace amenwalk {

// Mass on (next symbol, vertex) pairs after `step` steps of the walk.  For
// Bernoulli bases without restrictions the symbol is irrelevant and a single
// slot is kept per vertex.
template <Scalar T>
struct DPState {
  std::size_t step = 0;
  std::size_t slots = 1;
  std::vector<VertexId> vertices;
  std::vector<T> mass;  // mass[i * slots + s]

  T total() const;
  // Mass per vertex, summed over slots.
  std::map<VertexId, T> marginal() const;
};

struct WalkOptions {
  unsigned threads = 1;
  VertexId start = 0;
  // Initial weight of each symbol slot; defaults to mu([a]).
  std::optional<std::vector<Rational>> initial;
  // Keep only states that can still reach the start by this step.
  std::optional<std::size_t> horizon;
};

template <Scalar T>
DPState<T> step_distribution(const GraphExtension& ext, std::size_t n, const WalkOptions& options = {});

// mu{x : kappa^n_x(o) = o}.
template <Scalar T>
T return_prob(const GraphExtension& ext, std::size_t n, const WalkOptions& options = {});

enum class ReturnMethod { exact_dp, float_dp, monte_carlo, oracle };
std::string to_string(ReturnMethod method);

struct ReturnEntry {
  std::size_t n = 0;
  double value = 0.0;
  std::optional<Rational> exact;
  double std_error = 0.0;
  ReturnMethod method = ReturnMethod::float_dp;
};

using ReturnTable = std::vector<ReturnEntry>;

struct TableOptions {
  Arithmetic mode = Arithmetic::floating;
  unsigned threads = 1;
  // Monte Carlo fallback when the exact DP does not fit the state budget.
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;
};

// p_1..p_{n_max} from the root.
ReturnTable return_table(const GraphExtension& ext, std::size_t n_max, const TableOptions& options = {});

// mu(Omega-start and Omega-landing with kappa^n(o) = o), for Omega a set of
// symbols given by a membership mask.
ReturnTable omega_return_table(const GraphExtension& ext, const std::vector<bool>& omega, std::size_t n_max,
                               const TableOptions& options = {});

// Return probabilities of the simple random walk on the free group of rank
// k, from its projection to the distance from the identity.  Index n holds p_n.
template <Scalar T>
std::vector<T> radial_oracle(std::size_t k, std::size_t n_max);

ReturnTable oracle_table(std::size_t k, std::size_t n_max);

enum class Estimator { root, ratio, fit };
std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);

struct RateReport {
  ReturnTable table;
  Estimator selected = Estimator::fit;
  double root = 0.0;
  double ratio = 0.0;
  double fit = 0.0;
  // Before clamping to 1.
  double fit_raw = 0.0;
  double ratio_raw = 0.0;
  double fit_exponent = 0.0;
  double fit_residual = 0.0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  std::size_t root_n = 0;
  std::size_t ratio_n = 0;

  double value() const;
};

// Estimators over a finished table; throws InvalidInput when no p_n > 0.
RateReport rate_report(ReturnTable table, Estimator selected = Estimator::fit);

RateReport decay_rate(const GraphExtension& ext, std::size_t n_max, Estimator selected = Estimator::fit,
                      const TableOptions& options = {});

// Finitely supported function on vertices.
class FiberFunction {
 public:
  FiberFunction() = default;
  explicit FiberFunction(std::map<VertexId, double> values);

  const std::map<VertexId, double>& values() const { return values_; }
  double operator()(VertexId v) const;
  double norm() const { return norm_; }
  std::size_t support_size() const { return values_.size(); }

 private:
  std::map<VertexId, double> values_;
  double norm_ = 0.0;
};

// (T_n f)(v) = sum over w in W^n of mu([w]) f(kappa_w^{-1}(v)).
FiberFunction markov_operator_apply(const GraphExtension& ext, const FiberFunction& f, std::size_t n,
                                    unsigned threads = 1);

struct SpectralStage {
  std::size_t support_radius = 0;
  std::size_t support_size = 0;
  double rho = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct SpectralReport {
  double rho = 0.0;
  // "exact-finite", "power-iteration" or "norm-growth".
  std::string method;
  std::vector<SpectralStage> stages;
  bool symmetric = true;
  std::string notes;
};

struct SpectralOptions {
  unsigned threads = 1;
  double tolerance = 1e-8;
  std::size_t max_iterations = 200000;
};

SpectralReport spectral_radius(const GraphExtension& ext, std::size_t n_max, std::size_t support_radius,
                               const SpectralOptions& options = {});

struct PressureReport {
  // Growth-rate slope of log Z_n over the top half of the window.
  double pressure = 0.0;
  // (1/n) log Z_n at the largest n.
  double root = 0.0;
  // log of the fitted decay rate.
  double log_rate = 0.0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  std::vector<std::pair<std::size_t, double>> partition;  // (n, Z_n)
};

PressureReport gurevich_pressure(const GraphExtension& ext, std::size_t n_max, const TableOptions& options = {});

// Pressure estimators for a precomputed return table (Bernoulli, where
// Z_n = p_n).
PressureReport pressure_from_table(const ReturnTable& table);

// Sum over symbols a of mu([a]) |kappa_a(A) symmetric-difference A|, over |A|.
Rational almost_invariance_defect(const GraphExtension& ext, const std::vector<VertexId>& a);

struct LemmaReport {
  std::size_t trials = 0;
  // Bound minus left-hand side, minimized over trials.
  double min_slack_normdrop = 0.0;
  double min_slack_rotundity = 0.0;
  std::size_t support_radius = 0;
  bool passed = false;
  std::string details;
};

// Random unit-norm functions supported on the ball of radius
// verified_radius - max loop length - max |w|, checked against the norm-drop
// and rotundity inequalities for loop words J.
LemmaReport lemma_inequality_checks(const GraphExtension& ext, const std::vector<SymbolString>& loops,
                                    std::size_t trials, std::uint64_t seed, std::size_t verified_radius);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t returns = 0;
  std::uint64_t samples = 0;
};

MonteCarloEstimate mc_return_prob(const GraphExtension& ext, std::size_t n, std::uint64_t samples, std::uint64_t seed,
                                  unsigned threads = 1);

// One simulation per sample, recording returns at every n <= n_max.
ReturnTable mc_return_table(const GraphExtension& ext, std::size_t n_max, std::uint64_t samples, std::uint64_t seed,
                            unsigned threads = 1);

}  // namespace amenwalk
