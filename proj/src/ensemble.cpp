#include "prechannel/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prechannel/error.hpp"

namespace prechannel {

Ensemble::Ensemble(std::vector<Atom> atoms, std::optional<GeneratorInfo> generator)
    : dim_(0), atoms_(std::move(atoms)), generator_(std::move(generator)) {
  if (atoms_.empty()) throw ConfigError("ensemble must have at least one atom");
  dim_ = atoms_.front().channel.dim();
  double total = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const Atom& a = atoms_[k];
    if (a.channel.dim() != dim_) {
      throw ConfigError("ensemble atom " + std::to_string(k) + " has dimension " + std::to_string(a.channel.dim()) +
                        ", expected " + std::to_string(dim_));
    }
    if (!(a.prob > 0.0) || !std::isfinite(a.prob)) {
      throw ConfigError("ensemble atom " + std::to_string(k) + " has non-positive probability");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ConfigError("ensemble probabilities sum to " + std::to_string(total) + ", not 1");
  }
  // Only renormalize when the sum is off by more than rounding noise, so a
  // serialized ensemble re-ingests bit-for-bit.
  if (std::abs(total - 1.0) > 64 * std::numeric_limits<double>::epsilon()) {
    for (Atom& a : atoms_) a.prob /= total;
  }
  cumulative_.reserve(atoms_.size());
  double acc = 0.0;
  for (const Atom& a : atoms_) cumulative_.push_back(acc += a.prob);
}

std::size_t Ensemble::pick(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u * cumulative_.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
}

PreChannel expect(const Ensemble& e) {
  return expect_map(e, [](const PreChannel& a) { return a; });
}

PreChannel expect_map(const Ensemble& e, const std::function<PreChannel(const PreChannel&)>& f) {
  Matrix acc;
  for (const Atom& a : e.atoms()) {
    PreChannel image = f(a.channel);
    if (acc.size() == 0) {
      acc = a.prob * image.rep();
    } else {
      if (image.rep().rows() != acc.rows()) throw DimensionError("expect_map: transform changed dimension");
      acc += a.prob * image.rep();
    }
  }
  const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(acc.rows()))));
  return PreChannel(dim, std::move(acc));
}

Ensemble centered(const Ensemble& e) {
  const PreChannel mean = expect(e);
  std::vector<Atom> atoms;
  atoms.reserve(e.size());
  for (const Atom& a : e.atoms()) atoms.push_back({a.channel - mean, a.prob});
  return Ensemble(std::move(atoms));
}

PreChannel variance_superop(const Ensemble& e) {
  const PreChannel mean = expect(e);
  return expect_map(e, [&mean](const PreChannel& a) {
    const PreChannel c = a - mean;
    return compose(adjoint(c), c);
  });
}

std::vector<std::size_t> sample_indices(const Ensemble& e, std::size_t n, SeedSpec seed, std::uint64_t trial) {
  std::vector<std::size_t> out(n);
  for (std::size_t f = 0; f < n; ++f) out[f] = e.pick(stream_uniform(seed, trial, f));
  return out;
}

std::vector<PreChannel> sample_iid(const Ensemble& e, std::size_t n, SeedSpec seed, std::uint64_t trial) {
  if (n < 1) throw PreconditionError("sample_iid: n must be >= 1");
  std::vector<PreChannel> out;
  out.reserve(n);
  for (std::size_t k : sample_indices(e, n, seed, trial)) out.push_back(e[k].channel);
  return out;
}

double chebyshev_bound(const Ensemble& e, const Op& x, double eps, SchattenExponent p) {
  if (!(eps > 0.0)) throw PreconditionError("chebyshev_bound: eps must be > 0");
  if (p.value() > 2.0) throw PreconditionError("chebyshev_bound: p must lie in [1, 2]");
  const Op vx = apply(variance_superop(e), x);
  return schatten_norm(vx, dual_exponent(p)) * schatten_norm(x, p) / (eps * eps);
}

double deviation_prob_exact(const Ensemble& e, const Op& x, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("deviation_prob_exact: eps must be > 0");
  const Op mean_x = apply(expect(e), x);
  double prob = 0.0;
  for (const Atom& a : e.atoms()) {
    if (schatten_norm(apply(a.channel, x) - mean_x, SchattenExponent(2.0)) > eps) prob += a.prob;
  }
  return std::min(prob, 1.0);
}

double rms_deviation(const Ensemble& e, const Op& x) {
  const Op mean_x = apply(expect(e), x);
  double acc = 0.0;
  for (const Atom& a : e.atoms()) {
    const double dev = schatten_norm(apply(a.channel, x) - mean_x, SchattenExponent(2.0));
    acc += a.prob * dev * dev;
  }
  return std::sqrt(acc);
}

}  // namespace prechannel
