#include "prechannel/superop.hpp"

#include <random>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "prechannel/error.hpp"

namespace prechannel {

namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

Op random_op(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(normal(rng), normal(rng));
  return Op(std::move(m));
}

// Rank-one starts reach the extreme points of the trace-norm ball.
Op random_rank_one(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector a(dim), b(dim);
  for (int i = 0; i < dim; ++i) {
    a(i) = Complex(normal(rng), normal(rng));
    b(i) = Complex(normal(rng), normal(rng));
  }
  return Op(a * b.adjoint());
}

Op normalized(const Op& x, SchattenExponent p) { return Complex(1.0 / schatten_norm(x, p)) * x; }

double ascend_from(const PreChannel& u, const PreChannel& u_adj, Op x, SchattenExponent p, SchattenExponent q,
                   const AscentOptions& options) {
  x = normalized(x, p);
  double best = schatten_norm(apply(u, x), q);
  double step = 1.0;
  for (int it = 0; it < options.max_iterations && step >= options.min_step; ++it) {
    // Gradient of ||U X||_q / ||X||_p at ||X||_p = 1; the second term removes
    // the radial component that normalization would undo.
    const Op grad = apply(u_adj, dual_element(apply(u, x), q)) - Complex(best) * dual_element(x, p);
    const Op trial = x + Complex(step) * grad;
    const double trial_norm = schatten_norm(trial, p);
    if (trial_norm == 0.0) {
      step *= 0.5;
      continue;
    }
    const Op candidate = Complex(1.0 / trial_norm) * trial;
    const double value = schatten_norm(apply(u, candidate), q);
    if (value > best) {
      best = value;
      x = candidate;
      step = std::min(2.0 * step, 1e6);
    } else {
      step *= 0.5;
    }
  }
  return best;
}

}  // namespace

PreChannel::PreChannel(int dim, Matrix rep) : dim_(dim), rep_(std::move(rep)) {
  if (dim < 1) throw DimensionError("pre-channel dimension must be >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  if (rep_.rows() != n || rep_.cols() != n) {
    throw DimensionError("pre-channel representation must be dim^2 x dim^2 (dim = " + std::to_string(dim) + ")");
  }
  if (!rep_.allFinite()) throw PreconditionError("pre-channel entries must be finite");
}

PreChannel PreChannel::identity(int dim) { return PreChannel(dim, Matrix::Identity(dim * dim, dim * dim)); }

PreChannel PreChannel::zero(int dim) { return PreChannel(dim, Matrix::Zero(dim * dim, dim * dim)); }

PreChannel operator+(const PreChannel& a, const PreChannel& b) {
  require_same_dim(a.dim_, b.dim_, "pre-channel +");
  return PreChannel(a.dim_, a.rep_ + b.rep_);
}

PreChannel operator-(const PreChannel& a, const PreChannel& b) {
  require_same_dim(a.dim_, b.dim_, "pre-channel -");
  return PreChannel(a.dim_, a.rep_ - b.rep_);
}

double max_abs_diff(const PreChannel& a, const PreChannel& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  return (a.rep() - b.rep()).cwiseAbs().maxCoeff();
}

Op apply(const PreChannel& u, const Op& x) {
  require_same_dim(u.dim(), x.dim(), "apply");
  return Op::unvec(u.rep() * x.vec(), x.dim());
}

PreChannel compose(const PreChannel& u, const PreChannel& v) {
  require_same_dim(u.dim(), v.dim(), "compose");
  return PreChannel(u.dim(), u.rep() * v.rep());
}

PreChannel adjoint(const PreChannel& u) { return PreChannel(u.dim(), u.rep().adjoint()); }

PreChannel from_left_right(const Op& left, const Op& right) {
  require_same_dim(left.dim(), right.dim(), "from_left_right");
  return PreChannel(left.dim(), Eigen::kroneckerProduct(right.matrix().transpose(), left.matrix()).eval());
}

double norm22(const PreChannel& u) {
  Eigen::JacobiSVD<Matrix> svd(u.rep());
  if (!svd.singularValues().allFinite()) throw NumericalError("norm22: decomposition failed");
  return svd.singularValues()(0);
}

double induced_norm_ascent(const PreChannel& u, SchattenExponent p, SchattenExponent q,
                           const AscentOptions& options) {
  const PreChannel u_adj = adjoint(u);
  std::mt19937_64 rng(options.seed);
  double best = 0.0;
  for (int r = 0; r < options.restarts; ++r) {
    Op start = r % 2 == 0 ? random_op(u.dim(), rng) : random_rank_one(u.dim(), rng);
    if (schatten_norm(start, p) == 0.0) continue;
    best = std::max(best, ascend_from(u, u_adj, std::move(start), p, q, options));
  }
  return best;
}

NormEstimate induced_norm(const PreChannel& u, SchattenExponent p, SchattenExponent q) {
  if (p.value() == 2.0 && q.value() == 2.0) return {norm22(u), true};
  return {induced_norm_ascent(u, p, q), false};
}

double sot_distance(const PreChannel& u, const PreChannel& v, const Op& x, SchattenExponent q) {
  require_same_dim(u.dim(), v.dim(), "sot_distance");
  return schatten_norm(apply(u, x) - apply(v, x), q);
}

}  // namespace prechannel
