#include "prechannel/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "prechannel/error.hpp"

namespace prechannel {

namespace {

// Higham (2005) backward-error thresholds for Pade degrees 3, 5, 7, 9, 13.
constexpr std::array<double, 5> kTheta{1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                       2.097847961257068e0, 5.371920351148152e0};

constexpr std::array<double, 4> kB3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kB7{17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
constexpr std::array<double, 10> kB9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                     2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 14> kB13{64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                      670442572800.0,      33522128640.0,       1323241920.0,
                                      40840800.0,          960960.0,            16380.0,
                                      182.0,               1.0};

double spectral_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

// Odd/even split of the degree-m Pade numerator for m in {3, 5, 7, 9}:
// returns (U, V) with U odd in A and V even.
template <std::size_t N>
std::pair<Matrix, Matrix> pade_low(const Matrix& a, const std::array<double, N>& b) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  Matrix power = id;
  Matrix u_even = b[1] * id;
  Matrix v = b[0] * id;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 < N) u_even += b[k + 1] * power;
  }
  return {a * u_even, v};
}

std::pair<Matrix, Matrix> pade13(const Matrix& a) {
  const auto& b = kB13;
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return {a * u_inner, v};
}

Matrix pade_solve(const std::pair<Matrix, Matrix>& uv) {
  const auto& [u, v] = uv;
  Eigen::PartialPivLU<Matrix> lu(v - u);
  return lu.solve(v + u);
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::vector<double> points) : horizon_(horizon), points_(std::move(points)) {
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) throw PreconditionError("time horizon must be finite and >= 0");
  if (points_.empty()) throw PreconditionError("time grid must contain at least one point");
  if (points_.front() != 0.0 || points_.back() != horizon_) {
    throw PreconditionError("time grid must start at 0 and end at the horizon");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) throw PreconditionError("time grid points must be strictly ascending");
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t count) {
  if (count == 0) throw PreconditionError("time grid needs at least one point");
  if (count == 1) return TimeGrid(horizon, {0.0});
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i) pts[i] = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
  pts.back() = horizon;
  return TimeGrid(horizon, std::move(pts));
}

Matrix expm_rep(const Matrix& a) {
  const double norm = spectral_norm(a);
  if (!std::isfinite(norm) || norm > kMaxExponentNorm) {
    throw NumericalError("expm: generator norm " + std::to_string(norm) + " exceeds the supported bound " +
                         std::to_string(kMaxExponentNorm));
  }
  Matrix result;
  if (norm <= kTheta[0]) {
    result = pade_solve(pade_low(a, kB3));
  } else if (norm <= kTheta[1]) {
    result = pade_solve(pade_low(a, kB5));
  } else if (norm <= kTheta[2]) {
    result = pade_solve(pade_low(a, kB7));
  } else if (norm <= kTheta[3]) {
    result = pade_solve(pade_low(a, kB9));
  } else {
    int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta[4]))));
    const Matrix scaled = a * std::ldexp(1.0, -squarings);
    result = pade_solve(pade13(scaled));
    for (int s = 0; s < squarings; ++s) result = result * result;
  }
  if (!result.allFinite()) throw NumericalError("expm: result is not finite");
  return result;
}

PreChannel expm(const PreChannel& u, double t) {
  if (!std::isfinite(t)) throw PreconditionError("expm: time must be finite");
  return PreChannel(u.dim(), expm_rep(t * u.rep()));
}

PreChannel mean_semigroup(const Ensemble& e, double t) {
  return expect_map(e, [t](const PreChannel& a) { return expm(a, t); });
}

PreChannel composition_W(const std::vector<PreChannel>& factors, double t) {
  if (factors.empty()) throw PreconditionError("composition_W: need at least one factor");
  const double step = t / static_cast<double>(factors.size());
  PreChannel w = expm(factors.front(), step);
  for (std::size_t i = 1; i < factors.size(); ++i) w = compose(w, expm(factors[i], step));
  return w;
}

PreChannel power(const PreChannel& u, std::size_t k) {
  Matrix result = Matrix::Identity(u.rep().rows(), u.rep().cols());
  Matrix base = u.rep();
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return PreChannel(u.dim(), std::move(result));
}

PreChannel expected_composition(const Ensemble& e, std::size_t n, double t) {
  if (n < 1) throw PreconditionError("expected_composition: n must be >= 1");
  return power(mean_semigroup(e, t / static_cast<double>(n)), n);
}

PreChannel delta(const Ensemble& e, const PreChannel& sample, double t) { return expm(sample, t) - mean_semigroup(e, t); }

PreChannel f_term(const Ensemble& e, std::size_t n, const std::vector<std::size_t>& positions,
                  const std::vector<PreChannel>& deltas, double t) {
  if (positions.size() != deltas.size()) throw PreconditionError("f_term: one delta per position required");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < 1 || positions[i] > n || (i > 0 && positions[i] <= positions[i - 1])) {
      throw PreconditionError("f_term: positions must be strictly ascending within [1, n]");
    }
  }
  const PreChannel mean = mean_semigroup(e, t);
  PreChannel result = PreChannel::identity(e.dim());
  std::size_t previous = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    result = compose(compose(result, power(mean, positions[i] - previous - 1)), deltas[i]);
    previous = positions[i];
  }
  return compose(result, power(mean, n - previous));
}

std::vector<double> chernoff_trajectory(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid) {
  if (n < 1) throw PreconditionError("chernoff_error: n must be >= 1");
  if (x.dim() != e.dim()) throw DimensionError("chernoff_error: test operator dimension mismatch");
  const Matrix mean_gen = expect(e).rep();
  const Vector vx = x.vec();
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid.points()) {
    const Vector target = expm_rep(t * mean_gen) * vx;
    const Matrix step = mean_semigroup(e, t / static_cast<double>(n)).rep();
    Vector v = vx;
    for (std::size_t k = 0; k < n; ++k) v = step * v;
    out.push_back((target - v).norm());
  }
  return out;
}

double chernoff_error(const Ensemble& e, const Op& x, std::size_t n, const TimeGrid& grid) {
  const auto traj = chernoff_trajectory(e, x, n, grid);
  return *std::max_element(traj.begin(), traj.end());
}

}  // namespace prechannel
