#pragma once

// The law-of-large-numbers laboratory: Monte-Carlo trials of
// W_n(t) = e^{A_1 t/n} ... e^{A_n t/n} against e^{E[A] t}, exact
// verification of the expectation identities behind the limit, the diagonal
// identity for E W_n^* W_n, rate estimation and the Schatten-p probe.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prechannel/semigroup.hpp"

namespace prechannel {

/// Upper bound on terms an exhaustive enumeration may visit.
inline constexpr double kEnumerationGuard = 1e6;

/// Residual thresholds for exact identities.
inline constexpr double kLinearTolerance = 1e-12;
inline constexpr double kProductTolerance = 1e-10;

struct ExperimentConfig {
  Ensemble ensemble;
  Op x;
  SchattenExponent p{2.0};
  TimeGrid grid = TimeGrid::uniform(1.0, 65);
  std::vector<std::size_t> n_schedule{};
  std::size_t trials = 200;
  double eps = 0.1;
  SeedSpec seed{};
  /// Exact-verification settings used by `verify`.
  std::vector<double> verify_times{0.25, 1.0};
  std::size_t verify_max_n = 3;
  /// Exponents for the Schatten-p probe.
  std::vector<double> probe_exponents{1.0, 1.5, 2.0};
};

/// Throws ConfigError when an invariant of the configuration is violated.
void validate(const ExperimentConfig& config);

/// Number of worker threads; 0 means the available hardware parallelism.
std::size_t resolve_workers(std::size_t requested);

struct TrialDeviation {
  /// sup_t ||(W_n(t) - e^{E[A] t}) x||_q over the grid.
  double total = 0.0;
  /// sup_t ||(W_n(t) - E W_n(t)) x||_q over the grid.
  double centered = 0.0;
};

/// Per-(ensemble, x, n, grid) cache of factor exponentials. Trials only
/// differ in the sampled atom indices, so every trial is a sequence of
/// matrix-vector products.
class LlnTrialRunner {
 public:
  LlnTrialRunner(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid);

  TrialDeviation run(SeedSpec seed, std::uint64_t trial, SchattenExponent q = SchattenExponent(2.0)) const;

  std::size_t n() const { return n_; }

 private:
  const Ensemble* ensemble_;
  int dim_;
  std::size_t n_;
  Vector x_;
  // factors_[t][k] = e^{A_k t/n}
  std::vector<std::vector<Matrix>> factors_;
  std::vector<Vector> limit_x_;
  std::vector<Vector> mean_x_;
};

/// Draws n i.i.d. factors on stream `trial` and returns
/// max_t ||(W_n(t) - e^{E[A] t}) x||_2.
double run_lln_trial(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid, SeedSpec seed,
                     std::uint64_t trial = 0);

/// E W_n(t)^* W_n(t), by the exact nested-expectation recursion.
PreChannel composition_second_moment(const Ensemble& e, std::size_t n, double t);

/// var W_n(t) = E W_n^* W_n - (E W_n)^* (E W_n).
PreChannel composition_variance(const Ensemble& e, std::size_t n, double t);

struct SweepRecord {
  std::size_t n = 0;
  double median = 0.0;
  double q90 = 0.0;
  double max = 0.0;
  /// Empirical Pr{ sup_t deviation > eps }.
  double exceedance = 0.0;
  double centered_median = 0.0;
  double centered_exceedance = 0.0;
  double chernoff_error = 0.0;
  /// max_t ||(var W_n(t)) x||_{p*} ||x||_p / eps^2.
  double chebyshev_bound = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::optional<double> slope;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  double eps = 0.0;
  std::string config_hash;
};

/// Nearest-rank quantile of an unsorted sample, q in (0, 1].
double nearest_rank_quantile(std::vector<double> values, double q);

SweepResult run_lln_sweep(const ExperimentConfig& config, std::size_t workers = 0);

/// Least-squares slope of log(median) against log(n); nullopt with fewer
/// than three points or any non-positive median.
std::optional<double> estimate_rate(const std::vector<std::size_t>& ns, const std::vector<double>& medians);
std::optional<double> estimate_rate(const SweepResult& sweep);

struct ProbeResult {
  double p = 2.0;
  std::vector<std::size_t> ns;
  std::vector<double> medians;
  static constexpr const char* kLabel = "empirical evidence only";
};

/// Same trials as run_lln_sweep, deviations measured in the Schatten-p norm.
ProbeResult conjecture_probe(const Ensemble& e, const Op& x, const std::vector<std::size_t>& n_schedule,
                             const TimeGrid& grid, SchattenExponent p, SeedSpec seed, std::size_t trials,
                             std::size_t workers = 0);

enum class LemmaMode { kAdjoint, kSuperop, kIndependence, kIntegration, kChebyshev };

const char* to_string(LemmaMode mode);
std::optional<LemmaMode> lemma_mode_from_string(const std::string& name);

struct LemmaReport {
  LemmaMode mode;
  double residual = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// Both sides of the named identity by exact enumeration. For kSuperop,
/// `a` must be centered (plays A) and `b` plays B; PreconditionError
/// otherwise. `x` is the test operator for the integration and Chebyshev
/// checks.
LemmaReport verify_lemma_suite(const Ensemble& a, const Ensemble& b, LemmaMode mode, const Op& x);

struct DiagonalReport {
  std::size_t n = 0;
  double t = 0.0;
  /// ||E W_n^* W_n - sum_a E F_a^* F_a||_(2,2)
  double residual = 0.0;
  /// max over a != b of ||E F_a^* F_b||_(2,2)
  double max_cross_term = 0.0;
  std::size_t terms = 0;
  bool passed = false;
};

/// Throws EnumerationGuardError when |support|^n 4^n exceeds kEnumerationGuard.
DiagonalReport verify_diagonal_identity(const Ensemble& e, std::size_t n, double t);

struct CenteredChebyshevReport {
  /// Pr{ ||(W_n(t) - E W_n(t)) x||_2 > eps } by enumeration.
  double exceedance = 0.0;
  /// E ||(W_n - E W_n) x||_2^2 / eps^2 by enumeration.
  double bound_enumerated = 0.0;
  /// <(var W_n) x, x> / eps^2 from the second-moment recursion.
  double bound_recursion = 0.0;
};

CenteredChebyshevReport composition_chebyshev_exact(const Ensemble& e, const Op& x, std::size_t n, double t,
                                                    double eps);

}  // namespace prechannel
