#pragma once

// Pre-channels: linear maps on operators, represented as d^2 x d^2 arrays
// acting on column-stacked vec(X).

#include <cstdint>

#include "prechannel/op.hpp"

namespace prechannel {

class PreChannel {
 public:
  /// `rep` must be dim^2 x dim^2 with finite entries.
  PreChannel(int dim, Matrix rep);

  static PreChannel identity(int dim);
  static PreChannel zero(int dim);

  int dim() const { return dim_; }
  const Matrix& rep() const { return rep_; }

  friend PreChannel operator+(const PreChannel& a, const PreChannel& b);
  friend PreChannel operator-(const PreChannel& a, const PreChannel& b);
  friend PreChannel operator*(Complex s, const PreChannel& a) { return PreChannel(a.dim_, s * a.rep_); }
  friend PreChannel operator-(const PreChannel& a) { return PreChannel(a.dim_, -a.rep_); }

 private:
  int dim_;
  Matrix rep_;
};

/// Largest absolute entry of rep(a) - rep(b).
double max_abs_diff(const PreChannel& a, const PreChannel& b);

Op apply(const PreChannel& u, const Op& x);

/// U o V: apply(compose(U, V), X) == apply(U, apply(V, X)).
PreChannel compose(const PreChannel& u, const PreChannel& v);

/// Adjoint with respect to the trace pairing; the conjugate transpose of rep.
PreChannel adjoint(const PreChannel& u);

/// X -> L X R, with rep = transpose(R) kron L.
PreChannel from_left_right(const Op& left, const Op& right);

/// sigma_max(rep): the exact induced (2,2) norm.
double norm22(const PreChannel& u);

struct NormEstimate {
  double value = 0.0;
  bool exact = false;
};

struct AscentOptions {
  int restarts = 32;
  double min_step = 1e-9;
  int max_iterations = 5000;
  std::uint64_t seed = 0x5eedf00dULL;
};

/// Lower bound on sup ||U X||_q over ||X||_p = 1 by multi-start projected
/// gradient ascent with step halving.
double induced_norm_ascent(const PreChannel& u, SchattenExponent p, SchattenExponent q,
                           const AscentOptions& options = {});

/// Exact for (2,2); a flagged lower-bound estimate otherwise.
NormEstimate induced_norm(const PreChannel& u, SchattenExponent p, SchattenExponent q);

/// || apply(U, x) - apply(V, x) ||_q
double sot_distance(const PreChannel& u, const PreChannel& v, const Op& x, SchattenExponent q);

}  // namespace prechannel
