#include "prechannel/op.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prechannel/error.hpp"

namespace prechannel {

namespace {

void require_same_dim(const Op& a, const Op& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()) + ")");
  }
}

Eigen::JacobiSVD<Matrix> svd_of(const Matrix& m, int options) {
  Eigen::JacobiSVD<Matrix> svd(m, options);
  if (!svd.singularValues().allFinite()) {
    throw NumericalError("singular value decomposition produced non-finite values");
  }
  return svd;
}

}  // namespace

SchattenExponent::SchattenExponent(double p) : p_(p) {
  if (!(p >= 1.0)) {
    throw PreconditionError("Schatten exponent must satisfy p >= 1, got " + std::to_string(p));
  }
}

Op::Op(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols()) {
    throw DimensionError("operator must be square with dim >= 1");
  }
  if (!m_.allFinite()) {
    throw PreconditionError("operator entries must be finite");
  }
}

Op Op::zero(int dim) { return Op(Matrix::Zero(dim, dim)); }

Op Op::identity(int dim) { return Op(Matrix::Identity(dim, dim)); }

Op Op::unit(int dim, int row, int col) {
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return Op(std::move(m));
}

Op Op::unvec(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw DimensionError("unvec: vector length is not dim^2");
  }
  return Op(Eigen::Map<const Matrix>(v.data(), dim, dim));
}

Vector Op::vec() const { return Eigen::Map<const Vector>(m_.data(), m_.size()); }

Op operator+(const Op& a, const Op& b) {
  require_same_dim(a, b, "operator +");
  return Op(a.m_ + b.m_);
}

Op operator-(const Op& a, const Op& b) {
  require_same_dim(a, b, "operator -");
  return Op(a.m_ - b.m_);
}

Op operator*(const Op& a, const Op& b) {
  require_same_dim(a, b, "operator *");
  return Op(a.m_ * b.m_);
}

double max_abs_diff(const Op& a, const Op& b) {
  require_same_dim(a, b, "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

std::vector<double> singular_values(const Op& x) {
  auto svd = svd_of(x.matrix(), 0);
  const auto& s = svd.singularValues();
  // JacobiSVD already sorts in decreasing order.
  return {s.data(), s.data() + s.size()};
}

int numerical_rank(const Op& x) {
  auto s = singular_values(x);
  if (s.front() == 0.0) return 0;
  const double cut = kRankCutoff * s.front();
  return static_cast<int>(std::count_if(s.begin(), s.end(), [cut](double v) { return v > cut; }));
}

double schatten_norm(const Op& x, SchattenExponent p) {
  if (p.value() == 2.0) {
    // Frobenius identity; avoids the decomposition on the hot path.
    return x.matrix().norm();
  }
  auto s = singular_values(x);
  const double top = s.front();
  if (p.is_infinite() || top == 0.0) return top;
  if (p.value() == 1.0) {
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum;
  }
  double acc = 0.0;
  for (double v : s) acc += std::pow(v / top, p.value());
  return top * std::pow(acc, 1.0 / p.value());
}

Complex pairing(const Op& y, const Op& x) {
  require_same_dim(y, x, "pairing");
  // tr(Y^dagger X) = sum_ij conj(Y_ij) X_ij
  return y.matrix().conjugate().cwiseProduct(x.matrix()).sum();
}

SchattenExponent dual_exponent(SchattenExponent p) {
  if (p.value() == 1.0) return SchattenExponent::infinity();
  if (p.is_infinite()) return SchattenExponent(1.0);
  return SchattenExponent(p.value() / (p.value() - 1.0));
}

Op dual_element(const Op& x, SchattenExponent p) {
  const int d = x.dim();
  auto svd = svd_of(x.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  const double top = s(0);
  if (top == 0.0) return Op::zero(d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  if (p.is_infinite()) {
    w(0) = 1.0;
  } else if (p.value() == 1.0) {
    for (int i = 0; i < d; ++i) w(i) = s(i) > kRankCutoff * top ? 1.0 : 0.0;
  } else {
    const double norm = schatten_norm(x, p);
    for (int i = 0; i < d; ++i) w(i) = std::pow(s(i) / norm, p.value() - 1.0);
  }
  return Op(svd.matrixU() * w.cast<Complex>().asDiagonal() * svd.matrixV().adjoint());
}

}  // namespace prechannel
