#pragma once

// Finite-support random pre-channels: exact expectations, the variance
// super-operator, i.i.d. sampling and the Chebyshev deviation bound.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prechannel/seed.hpp"
#include "prechannel/superop.hpp"

namespace prechannel {

/// Probabilities must sum to one within this tolerance on ingestion.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Atom {
  PreChannel channel;
  double prob;
};

/// Provenance of a generated ensemble, kept so a file can be replayed.
struct GeneratorInfo {
  std::string family;
  nlohmann::json params;
  std::uint64_t seed = 0;
};

/// A probability distribution on finitely many pre-channels of one dimension.
class Ensemble {
 public:
  /// Validates: nonempty, shared dimension, every prob > 0 and the total
  /// within kProbabilityTolerance of 1 (renormalized when it is off by more
  /// than a few ulps). Throws ConfigError otherwise.
  explicit Ensemble(std::vector<Atom> atoms, std::optional<GeneratorInfo> generator = std::nullopt);

  int dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& operator[](std::size_t k) const { return atoms_[k]; }
  const std::optional<GeneratorInfo>& generator() const { return generator_; }

  /// Index of the atom selected by a uniform draw u in [0, 1).
  std::size_t pick(double u) const;

 private:
  int dim_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  std::optional<GeneratorInfo> generator_;
};

/// E A = sum_k p_k A_k.
PreChannel expect(const Ensemble& e);

/// E f(A) = sum_k p_k f(A_k).
PreChannel expect_map(const Ensemble& e, const std::function<PreChannel(const PreChannel&)>& f);

/// The same atoms shifted by -E A; a centered ensemble.
Ensemble centered(const Ensemble& e);

/// var A = E (A - EA)^* (A - EA).
PreChannel variance_superop(const Ensemble& e);

/// Atom indices of n i.i.d. draws for one trial; draw f uses stream (trial, f).
std::vector<std::size_t> sample_indices(const Ensemble& e, std::size_t n, SeedSpec seed, std::uint64_t trial = 0);

std::vector<PreChannel> sample_iid(const Ensemble& e, std::size_t n, SeedSpec seed, std::uint64_t trial = 0);

/// ||(var A) x||_{p*} ||x||_p / eps^2, for 1 <= p <= 2 and eps > 0.
double chebyshev_bound(const Ensemble& e, const Op& x, double eps, SchattenExponent p);

/// Pr{ ||(A - EA) x||_2 > eps } by enumeration of the support.
double deviation_prob_exact(const Ensemble& e, const Op& x, double eps);

/// sqrt(E ||(A - EA) x||_2^2).
double rms_deviation(const Ensemble& e, const Op& x);

}  // namespace prechannel
