#pragma once

// Dense operators on a d-dimensional Hilbert space, Schatten norms and the
// Hilbert-Schmidt trace pairing.

#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace prechannel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Singular values below this fraction of the largest one count as zero
/// wherever the numerical rank matters.
inline constexpr double kRankCutoff = 1e-14;

/// A Schatten exponent p in [1, inf]. Infinity is a first-class value so that
/// the dual exponent map is total.
class SchattenExponent {
 public:
  /// Throws PreconditionError unless p >= 1 (p may be +inf).
  explicit SchattenExponent(double p);

  static SchattenExponent infinity() { return SchattenExponent(std::numeric_limits<double>::infinity()); }

  double value() const { return p_; }
  bool is_infinite() const { return p_ == std::numeric_limits<double>::infinity(); }

  friend bool operator==(const SchattenExponent&, const SchattenExponent&) = default;

 private:
  double p_;
};

/// A d x d complex operator; an element of the truncated Schatten class T_p.
/// Entries are always finite and the dimension is at least one.
class Op {
 public:
  explicit Op(Matrix entries);

  static Op zero(int dim);
  static Op identity(int dim);
  /// The matrix unit |row><col|.
  static Op unit(int dim, int row, int col);
  /// Inverse of vec(): column-stacked vector of length dim*dim.
  static Op unvec(const Vector& v, int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  /// Column-stacking vectorization.
  Vector vec() const;
  Op adjoint() const { return Op(m_.adjoint()); }

  friend Op operator+(const Op& a, const Op& b);
  friend Op operator-(const Op& a, const Op& b);
  friend Op operator*(const Op& a, const Op& b);
  friend Op operator*(Complex s, const Op& a) { return Op(s * a.m_); }
  friend Op operator-(const Op& a) { return Op(-a.m_); }

 private:
  Matrix m_;
};

/// Largest absolute entry of a - b.
double max_abs_diff(const Op& a, const Op& b);

/// All d singular values, descending.
std::vector<double> singular_values(const Op& x);

/// Number of singular values above kRankCutoff * sigma_max.
int numerical_rank(const Op& x);

/// (sum sigma_i^p)^(1/p), or sigma_max for p = inf.
double schatten_norm(const Op& x, SchattenExponent p);

/// Hilbert-Schmidt pairing tr(Y^dagger X), conjugate-linear in Y.
Complex pairing(const Op& y, const Op& x);

/// p* with 1/p + 1/p* = 1.
SchattenExponent dual_exponent(SchattenExponent p);

/// The norming functional of x in the dual class: G with ||G||_{p*} = 1 and
/// pairing(G, x) = ||x||_p. Returns zero for x = 0.
Op dual_element(const Op& x, SchattenExponent p);

}  // namespace prechannel
