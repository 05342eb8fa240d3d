#include "prechannel/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "prechannel/error.hpp"

namespace prechannel {

namespace {

const SchattenExponent kTwo{2.0};

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
// writes only its own output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double deviation_norm(const Vector& diff, int dim, SchattenExponent q) {
  return schatten_norm(Op::unvec(diff, dim), q);
}

// Mixed-radix odometer over support^n.
bool advance(std::vector<std::size_t>& digits, std::size_t radix) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

void guard_enumeration(double terms, const std::string& what) {
  if (terms > kEnumerationGuard) {
    throw EnumerationGuardError(what + ": enumeration of " + std::to_string(static_cast<long long>(terms)) +
                                " terms exceeds the guard of " +
                                std::to_string(static_cast<long long>(kEnumerationGuard)));
  }
}

double max_entry(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double spectral(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.x.dim() != c.ensemble.dim()) throw ConfigError("test operator x has the wrong dimension");
  if (c.p.value() > 2.0) throw ConfigError("p must lie in [1, 2]");
  if (c.n_schedule.empty()) throw ConfigError("n_schedule must not be empty");
  for (std::size_t i = 0; i < c.n_schedule.size(); ++i) {
    if (c.n_schedule[i] < 1) throw ConfigError("n_schedule entries must be >= 1");
    if (i > 0 && c.n_schedule[i] <= c.n_schedule[i - 1]) throw ConfigError("n_schedule must be strictly ascending");
  }
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (!(c.eps > 0.0)) throw ConfigError("eps must be > 0");
  for (double p : c.probe_exponents) {
    if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("probe exponents must lie in [1, 2]");
  }
  for (double t : c.verify_times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("verify times must be finite and >= 0");
  }
  const double horizon = std::max(c.grid.horizon(), *std::max_element(c.verify_times.begin(), c.verify_times.end()));
  for (std::size_t k = 0; k < c.ensemble.size(); ++k) {
    if (norm22(c.ensemble[k].channel) * horizon > kMaxExponentNorm) {
      throw ConfigError("atom " + std::to_string(k) + " has ||A|| T above " + std::to_string(kMaxExponentNorm) +
                        "; rescale the generators");
    }
  }
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

LlnTrialRunner::LlnTrialRunner(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid)
    : ensemble_(&e), dim_(e.dim()), n_(n), x_(x.vec()) {
  if (n < 1) throw PreconditionError("trial: n must be >= 1");
  if (x.dim() != e.dim()) throw DimensionError("trial: test operator dimension mismatch");
  const Matrix mean_gen = expect(e).rep();
  const double steps = static_cast<double>(n);
  for (double t : grid.points()) {
    std::vector<Matrix> per_atom;
    per_atom.reserve(e.size());
    Matrix mean_step = Matrix::Zero(mean_gen.rows(), mean_gen.cols());
    for (const Atom& a : e.atoms()) {
      per_atom.push_back(expm_rep((t / steps) * a.channel.rep()));
      mean_step += a.prob * per_atom.back();
    }
    factors_.push_back(std::move(per_atom));
    limit_x_.push_back(expm_rep(t * mean_gen) * x_);
    Vector v = x_;
    for (std::size_t k = 0; k < n; ++k) v = mean_step * v;
    mean_x_.push_back(std::move(v));
  }
}

TrialDeviation LlnTrialRunner::run(SeedSpec seed, std::uint64_t trial, SchattenExponent q) const {
  const auto picks = sample_indices(*ensemble_, n_, seed, trial);
  TrialDeviation out;
  for (std::size_t g = 0; g < factors_.size(); ++g) {
    const auto& table = factors_[g];
    Vector v = x_;
    // W x = e^{A_1 s}(e^{A_2 s}(... e^{A_n s} x)): rightmost factor acts first.
    for (std::size_t i = n_; i-- > 0;) v = table[picks[i]] * v;
    out.total = std::max(out.total, deviation_norm(v - limit_x_[g], dim_, q));
    out.centered = std::max(out.centered, deviation_norm(v - mean_x_[g], dim_, q));
  }
  return out;
}

double run_lln_trial(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid, SeedSpec seed,
                     std::uint64_t trial) {
  return LlnTrialRunner(e, x, n, grid).run(seed, trial).total;
}

PreChannel composition_second_moment(const Ensemble& e, std::size_t n, double t) {
  if (n < 1) throw PreconditionError("composition_second_moment: n must be >= 1");
  std::vector<Matrix> steps;
  for (const Atom& a : e.atoms()) steps.push_back(expm_rep((t / static_cast<double>(n)) * a.channel.rep()));
  const Eigen::Index m = steps.front().rows();
  // W^* W = B_n^* ... B_1^* B_1 ... B_n; independent factors let the
  // expectation be taken from the inside out.
  Matrix q = Matrix::Identity(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix next = Matrix::Zero(m, m);
    for (std::size_t k = 0; k < steps.size(); ++k) next += e[k].prob * (steps[k].adjoint() * q * steps[k]);
    q = std::move(next);
  }
  return PreChannel(e.dim(), std::move(q));
}

PreChannel composition_variance(const Ensemble& e, std::size_t n, double t) {
  const PreChannel mean = expected_composition(e, n, t);
  return composition_second_moment(e, n, t) - compose(adjoint(mean), mean);
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw PreconditionError("quantile of an empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("quantile level must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

SweepResult run_lln_sweep(const ExperimentConfig& config, std::size_t workers) {
  validate(config);
  const Ensemble& e = config.ensemble;
  const double eps2 = config.eps * config.eps;
  const SchattenExponent p_dual = dual_exponent(config.p);
  const double x_norm_p = schatten_norm(config.x, config.p);

  SweepResult result;
  result.seed = config.seed.root;
  result.trials = config.trials;
  result.eps = config.eps;
  for (std::size_t n : config.n_schedule) {
    const LlnTrialRunner runner(e, config.x, n, config.grid);
    std::vector<TrialDeviation> devs(config.trials);
    parallel_for(config.trials, workers, [&](std::size_t i) { devs[i] = runner.run(config.seed, i); });

    std::vector<double> total(config.trials);
    std::vector<double> centered(config.trials);
    std::size_t exceed = 0;
    std::size_t exceed_centered = 0;
    for (std::size_t i = 0; i < config.trials; ++i) {
      total[i] = devs[i].total;
      centered[i] = devs[i].centered;
      exceed += devs[i].total > config.eps ? 1 : 0;
      exceed_centered += devs[i].centered > config.eps ? 1 : 0;
    }
    SweepRecord rec;
    rec.n = n;
    rec.median = nearest_rank_quantile(total, 0.5);
    rec.q90 = nearest_rank_quantile(total, 0.9);
    rec.max = nearest_rank_quantile(total, 1.0);
    rec.exceedance = static_cast<double>(exceed) / static_cast<double>(config.trials);
    rec.centered_median = nearest_rank_quantile(centered, 0.5);
    rec.centered_exceedance = static_cast<double>(exceed_centered) / static_cast<double>(config.trials);
    rec.chernoff_error = chernoff_error(e, config.x, n, config.grid);
    double bound = 0.0;
    for (double t : config.grid.points()) {
      const Op vx = apply(composition_variance(e, n, t), config.x);
      bound = std::max(bound, schatten_norm(vx, p_dual) * x_norm_p / eps2);
    }
    rec.chebyshev_bound = bound;
    result.records.push_back(rec);
  }
  result.slope = estimate_rate(result);
  return result;
}

std::optional<double> estimate_rate(const std::vector<std::size_t>& ns, const std::vector<double>& medians) {
  if (ns.size() != medians.size() || ns.size() < 3) return std::nullopt;
  if (std::any_of(medians.begin(), medians.end(), [](double m) { return !(m > 0.0); })) return std::nullopt;
  const double count = static_cast<double>(ns.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += std::log(static_cast<double>(ns[i]));
    my += std::log(medians[i]);
  }
  mx /= count;
  my /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dx = std::log(static_cast<double>(ns[i])) - mx;
    sxy += dx * (std::log(medians[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

std::optional<double> estimate_rate(const SweepResult& sweep) {
  std::vector<std::size_t> ns;
  std::vector<double> medians;
  for (const auto& r : sweep.records) {
    ns.push_back(r.n);
    medians.push_back(r.median);
  }
  return estimate_rate(ns, medians);
}

ProbeResult conjecture_probe(const Ensemble& e, const Op& x, const std::vector<std::size_t>& n_schedule,
                             const TimeGrid& grid, SchattenExponent p, SeedSpec seed, std::size_t trials,
                             std::size_t workers) {
  if (p.value() > 2.0) throw PreconditionError("conjecture_probe: p must lie in [1, 2]");
  if (trials < 1) throw PreconditionError("conjecture_probe: trials must be >= 1");
  ProbeResult out;
  out.p = p.value();
  for (std::size_t n : n_schedule) {
    const LlnTrialRunner runner(e, x, n, grid);
    std::vector<double> devs(trials);
    parallel_for(trials, workers, [&](std::size_t i) { devs[i] = runner.run(seed, i, p).total; });
    out.ns.push_back(n);
    out.medians.push_back(nearest_rank_quantile(std::move(devs), 0.5));
  }
  return out;
}

const char* to_string(LemmaMode mode) {
  switch (mode) {
    case LemmaMode::kAdjoint: return "adjoint";
    case LemmaMode::kSuperop: return "superop";
    case LemmaMode::kIndependence: return "independence";
    case LemmaMode::kIntegration: return "integration";
    case LemmaMode::kChebyshev: return "chebyshev";
  }
  return "unknown";
}

std::optional<LemmaMode> lemma_mode_from_string(const std::string& name) {
  for (LemmaMode m : {LemmaMode::kAdjoint, LemmaMode::kSuperop, LemmaMode::kIndependence, LemmaMode::kIntegration,
                      LemmaMode::kChebyshev}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace {

LemmaReport check_integration(const Ensemble& e, const Op& x) {
  const PreChannel mean = expect(e);
  std::vector<Op> probes{x};
  for (int r = 0; r < e.dim(); ++r) {
    for (int c = 0; c < e.dim(); ++c) probes.push_back(Op::unit(e.dim(), r, c));
  }
  double residual = 0.0;
  for (const Op& probe : probes) {
    Matrix acc = Matrix::Zero(e.dim(), e.dim());
    for (const Atom& a : e.atoms()) acc += a.prob * apply(a.channel, probe).matrix();
    residual = std::max(residual, (apply(mean, probe).matrix() - acc).norm());
  }
  return {LemmaMode::kIntegration, residual, kLinearTolerance, residual <= kLinearTolerance,
          std::to_string(probes.size()) + " probe operators"};
}

LemmaReport check_adjoint(const Ensemble& e) {
  const double residual = max_abs_diff(expect_map(e, [](const PreChannel& a) { return adjoint(a); }), adjoint(expect(e)));
  return {LemmaMode::kAdjoint, residual, kLinearTolerance, residual <= kLinearTolerance, ""};
}

LemmaReport check_superop(const Ensemble& a, const Ensemble& b) {
  double scale = 1.0;
  for (const Atom& atom : a.atoms()) scale = std::max(scale, max_entry(atom.channel.rep()));
  const double offset = max_entry(expect(a).rep());
  if (offset > kLinearTolerance * scale) {
    throw PreconditionError("superop mode needs a centered ensemble (|E A| = " + std::to_string(offset) + ")");
  }
  const Eigen::Index m = a[0].channel.rep().rows();
  Matrix acc = Matrix::Zero(m, m);
  for (const Atom& outer : b.atoms()) {
    for (const Atom& inner : a.atoms()) {
      acc += (outer.prob * inner.prob) * (outer.channel.rep().adjoint() * inner.channel.rep() * outer.channel.rep());
    }
  }
  const double residual = max_entry(acc);
  return {LemmaMode::kSuperop, residual, kProductTolerance, residual <= kProductTolerance,
          std::to_string(a.size() * b.size()) + " outcome pairs"};
}

LemmaReport check_independence(const Ensemble& a, const Ensemble& b) {
  const Matrix mean_a = expect(a).rep();
  const Matrix mean_b = expect(b).rep();
  double residual = 0.0;
  std::size_t outcomes = 0;
  for (std::size_t length = 2; length <= 4; ++length) {
    // Alternate the two laws: A B A B ...
    std::vector<const Ensemble*> chain;
    double terms = 1.0;
    for (std::size_t i = 0; i < length; ++i) {
      chain.push_back(i % 2 == 0 ? &a : &b);
      terms *= static_cast<double>(chain.back()->size());
    }
    guard_enumeration(terms, "independence check");
    const Eigen::Index m = mean_a.rows();
    Matrix acc = Matrix::Zero(m, m);
    std::vector<std::size_t> idx(length, 0);
    bool more = true;
    while (more) {
      Matrix prod = Matrix::Identity(m, m);
      double prob = 1.0;
      for (std::size_t i = 0; i < length; ++i) {
        const Atom& atom = (*chain[i])[idx[i]];
        prod = prod * atom.channel.rep();
        prob *= atom.prob;
      }
      acc += prob * prod;
      ++outcomes;
      // odometer with per-slot radix
      more = false;
      for (std::size_t i = 0; i < length; ++i) {
        if (++idx[i] < chain[i]->size()) {
          more = true;
          break;
        }
        idx[i] = 0;
      }
    }
    Matrix expected = Matrix::Identity(m, m);
    for (std::size_t i = 0; i < length; ++i) expected = expected * (i % 2 == 0 ? mean_a : mean_b);
    residual = std::max(residual, max_entry(acc - expected));
  }
  return {LemmaMode::kIndependence, residual, kProductTolerance, residual <= kProductTolerance,
          std::to_string(outcomes) + " joint outcomes"};
}

LemmaReport check_chebyshev(const Ensemble& e, const Op& x) {
  const PreChannel var = variance_superop(e);
  const Op mean_x = apply(expect(e), x);
  double second_moment = 0.0;
  for (const Atom& a : e.atoms()) {
    const double dev = schatten_norm(apply(a.channel, x) - mean_x, kTwo);
    second_moment += a.prob * dev * dev;
  }
  const Complex pairing_value = pairing(apply(var, x), x);
  const double residual = std::abs(pairing_value - Complex(second_moment));

  const double rms = std::sqrt(second_moment);
  const double base = rms > 0.0 ? rms : 1.0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  for (double p : {1.0, 4.0 / 3.0, 1.5, 2.0}) {
    for (int i = 0; i < 10; ++i) {
      const double eps = base * 0.1 * std::pow(30.0, i / 9.0);
      const double exact = deviation_prob_exact(e, x, eps);
      const double bound = chebyshev_bound(e, x, eps, SchattenExponent(p));
      ++checks;
      if (bound < exact - kLinearTolerance) ++violations;
    }
  }
  return {LemmaMode::kChebyshev, residual, kProductTolerance, residual <= kProductTolerance && violations == 0,
          std::to_string(violations) + " of " + std::to_string(checks) + " bound checks violated"};
}

}  // namespace

LemmaReport verify_lemma_suite(const Ensemble& a, const Ensemble& b, LemmaMode mode, const Op& x) {
  if (a.dim() != b.dim()) throw DimensionError("lemma suite: ensembles differ in dimension");
  switch (mode) {
    case LemmaMode::kAdjoint: return check_adjoint(a);
    case LemmaMode::kSuperop: return check_superop(a, b);
    case LemmaMode::kIndependence: return check_independence(a, b);
    case LemmaMode::kIntegration: return check_integration(a, x);
    case LemmaMode::kChebyshev: return check_chebyshev(a, x);
  }
  throw PreconditionError("unknown lemma mode");
}

DiagonalReport verify_diagonal_identity(const Ensemble& e, std::size_t n, double t) {
  if (n < 1) throw PreconditionError("diagonal identity: n must be >= 1");
  const std::size_t support = e.size();
  guard_enumeration(std::pow(static_cast<double>(support), static_cast<double>(n)) * std::pow(4.0, static_cast<double>(n)),
                    "diagonal identity");
  const double s = t / static_cast<double>(n);
  const Eigen::Index m = e[0].channel.rep().rows();

  std::vector<Matrix> steps;
  std::vector<PreChannel> deltas;
  for (const Atom& a : e.atoms()) {
    steps.push_back(expm_rep(s * a.channel.rep()));
    deltas.push_back(delta(e, a.channel, s));
  }
  const Matrix mean = mean_semigroup(e, s).rep();
  std::vector<Matrix> mean_pow{Matrix::Identity(m, m)};
  for (std::size_t k = 1; k <= n; ++k) mean_pow.push_back(mean_pow.back() * mean);

  // Left side and cross terms: one pass over the joint outcomes.
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<Matrix> cross(subsets * subsets, Matrix::Zero(m, m));
  Matrix lhs = Matrix::Zero(m, m);
  std::vector<std::size_t> omega(n, 0);
  std::vector<Matrix> f(subsets);
  std::size_t terms = 0;
  do {
    double prob = 1.0;
    Matrix w = Matrix::Identity(m, m);
    for (std::size_t i = 0; i < n; ++i) {
      prob *= e[omega[i]].prob;
      w = w * steps[omega[i]];
    }
    lhs += prob * (w.adjoint() * w);
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      Matrix term = Matrix::Identity(m, m);
      std::size_t previous = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1U) {
          term = term * mean_pow[i - previous] * deltas[omega[i]].rep();
          previous = i + 1;
        }
      }
      f[mask] = term * mean_pow[n - previous];
    }
    for (std::size_t a = 0; a < subsets; ++a) {
      for (std::size_t b = 0; b < subsets; ++b) {
        if (a != b) cross[a * subsets + b] += prob * (f[a].adjoint() * f[b]);
      }
    }
    ++terms;
  } while (advance(omega, support));

  // Right side: each diagonal expectation enumerates only its own Delta slots.
  Matrix diagonal = Matrix::Zero(m, m);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) positions.push_back(i + 1);
    }
    std::vector<std::size_t> slot(positions.size(), 0);
    do {
      double prob = 1.0;
      std::vector<PreChannel> chosen;
      for (std::size_t k : slot) {
        prob *= e[k].prob;
        chosen.push_back(deltas[k]);
      }
      const Matrix term = f_term(e, n, positions, chosen, s).rep();
      diagonal += prob * (term.adjoint() * term);
    } while (advance(slot, support));
  }

  DiagonalReport report;
  report.n = n;
  report.t = t;
  report.terms = terms;
  report.residual = spectral(lhs - diagonal);
  for (const Matrix& c : cross) report.max_cross_term = std::max(report.max_cross_term, c.isZero(0.0) ? 0.0 : spectral(c));
  report.passed = report.residual <= kProductTolerance && report.max_cross_term <= kProductTolerance;
  return report;
}

CenteredChebyshevReport composition_chebyshev_exact(const Ensemble& e, const Op& x, std::size_t n, double t,
                                                    double eps) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be > 0");
  if (n < 1) throw PreconditionError("n must be >= 1");
  guard_enumeration(std::pow(static_cast<double>(e.size()), static_cast<double>(n)), "centered Chebyshev check");
  const double s = t / static_cast<double>(n);
  std::vector<Matrix> steps;
  for (const Atom& a : e.atoms()) steps.push_back(expm_rep(s * a.channel.rep()));
  const Vector vx = x.vec();
  const Vector mean_x = expected_composition(e, n, t).rep() * vx;

  CenteredChebyshevReport out;
  double second_moment = 0.0;
  std::vector<std::size_t> omega(n, 0);
  do {
    double prob = 1.0;
    Vector v = vx;
    for (std::size_t i = n; i-- > 0;) {
      prob *= e[omega[i]].prob;
      v = steps[omega[i]] * v;
    }
    const double dev = (v - mean_x).norm();
    second_moment += prob * dev * dev;
    if (dev > eps) out.exceedance += prob;
  } while (advance(omega, e.size()));
  out.exceedance = std::min(out.exceedance, 1.0);
  out.bound_enumerated = second_moment / (eps * eps);
  out.bound_recursion = pairing(apply(composition_variance(e, n, t), x), x).real() / (eps * eps);
  return out;
}

}  // namespace prechannel
