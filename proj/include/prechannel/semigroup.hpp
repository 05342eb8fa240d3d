#pragma once

// Uniformly continuous semigroups e^{At} of pre-channels and the objects built
// from them: the mean semigroup E e^{At}, the random composition
// W_n(t) = e^{A_1 t/n} ... e^{A_n t/n}, the centered factors Delta and the
// F-term expansion of W_n.

#include <cstddef>
#include <vector>

#include "prechannel/ensemble.hpp"

namespace prechannel {

/// Generators are only exponentiated while ||A t||_(2,2) stays below this.
inline constexpr double kMaxExponentNorm = 32.0;

/// Finite ascending sample of [0, T] containing both endpoints. T = 0 with
/// the single point {0} is allowed.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::vector<double> points);

  /// `count` evenly spaced points; the last one is exactly T.
  static TimeGrid uniform(double horizon, std::size_t count);

  double horizon() const { return horizon_; }
  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  double horizon_;
  std::vector<double> points_;
};

/// e^{A} by scaling and squaring with a diagonal Pade approximant. Throws
/// NumericalError when ||A||_(2,2) > kMaxExponentNorm or the result is not
/// finite.
Matrix expm_rep(const Matrix& a);

PreChannel expm(const PreChannel& u, double t);

/// E e^{At} = sum_k p_k e^{A_k t}.
PreChannel mean_semigroup(const Ensemble& e, double t);

/// e^{A_1 t/n} ... e^{A_n t/n}, index 1 leftmost.
PreChannel composition_W(const std::vector<PreChannel>& factors, double t);

/// U^k by binary powering; U^0 is the identity.
PreChannel power(const PreChannel& u, std::size_t k);

/// E W_n(t) = (E e^{At/n})^n, which holds by independence of the factors.
PreChannel expected_composition(const Ensemble& e, std::size_t n, double t);

/// e^{A t} - E e^{At}.
PreChannel delta(const Ensemble& e, const PreChannel& sample, double t);

/// M^{a_1-1} D_1 M^{a_2-a_1-1} ... D_k M^{n-a_k} with M = E e^{At}.
/// `positions` are 1-based and strictly ascending in [1, n].
PreChannel f_term(const Ensemble& e, std::size_t n, const std::vector<std::size_t>& positions,
                  const std::vector<PreChannel>& deltas, double t);

/// ||(e^{E[A] t} - E W_n(t)) x||_2 at every grid point.
std::vector<double> chernoff_trajectory(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid);

/// Max over the grid of chernoff_trajectory.
double chernoff_error(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid);

}  // namespace prechannel
