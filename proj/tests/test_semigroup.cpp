#include "prechannel/semigroup.hpp"

#include <cmath>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "prechannel/error.hpp"
#include "prechannel/generators.hpp"
#include "test_util.hpp"

using namespace prechannel;
using prechannel::testing::random_channel;
using prechannel::testing::random_ensemble;
using prechannel::testing::random_op;
using prechannel::testing::uniform;

namespace {

// Every subset of {1..n} as an ascending position list.
std::vector<std::vector<std::size_t>> all_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) pos.push_back(i + 1);
    }
    out.push_back(pos);
  }
  return out;
}

double rel_diff(const PreChannel& a, const PreChannel& b) {
  return (a.rep() - b.rep()).norm() / std::max(1.0, b.rep().norm());
}

}  // namespace

TEST(Expm, Examples) {
  EXPECT_EQ(max_abs_diff(expm(PreChannel::zero(2), 3.0), PreChannel::identity(2)), 0.0);
  Matrix n = Matrix::Zero(4, 4);
  n(0, 3) = Complex(1.5, -0.5);
  n(1, 2) = Complex(-2.0, 0.0);
  const PreChannel nil(2, n);
  const double t = 0.7;
  EXPECT_LE(max_abs_diff(expm(nil, t), PreChannel(2, Matrix::Identity(4, 4) + t * n)), 1e-15);
}

TEST(Expm, ScalarCase) {
  const PreChannel a(1, Matrix::Constant(1, 1, Complex(-0.3, 2.0)));
  EXPECT_NEAR(std::abs(expm(a, 1.5).rep()(0, 0) - std::exp(Complex(-0.45, 3.0))), 0.0, 1e-14);
}

TEST(Expm, AgreesWithReferenceImplementation) {
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    // ||U t|| spans 1e-3 .. 16, inside the supported range.
    const PreChannel raw = random_channel(d);
    const PreChannel u = Complex(std::pow(10.0, uniform(-3.0, 0.9)) / norm22(raw)) * raw;
    const double t = uniform(0.0, 2.0);
    const Matrix reference = (u.rep() * Complex(t)).exp();
    EXPECT_LE((expm(u, t).rep() - reference).norm(), 1e-12 * std::max(1.0, reference.norm()));
  }
}

TEST(Expm, SemigroupLaw) {
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    const PreChannel u = random_channel(d, 0.5);
    const double s = uniform(0.0, 2.0), t = uniform(0.0, 2.0);
    EXPECT_LE(rel_diff(compose(expm(u, s), expm(u, t)), expm(u, s + t)), 1e-10);
  }
}

TEST(Expm, CommutesWithAdjoint) {
  for (int trial = 0; trial < 200; ++trial) {
    const PreChannel u = random_channel(1 + trial % 3, 0.5);
    const double t = uniform(0.0, 2.0);
    EXPECT_LE(max_abs_diff(expm(adjoint(u), t), adjoint(expm(u, t))), 1e-12);
  }
}

TEST(Expm, RejectsHugeGenerators) {
  const PreChannel big(1, Matrix::Constant(1, 1, Complex(40.0)));
  EXPECT_THROW(expm(big, 1.0), NumericalError);
  EXPECT_NO_THROW(expm(big, 0.5));
}

TEST(MeanSemigroup, Examples) {
  const PreChannel a = random_channel(2, 0.5);
  const Ensemble single({{a, 1.0}});
  EXPECT_LE(max_abs_diff(mean_semigroup(single, 0.8), expm(a, 0.8)), 1e-15);
  const Ensemble e = random_ensemble(2, 3, 21);
  EXPECT_EQ(max_abs_diff(mean_semigroup(e, 0.0), PreChannel::identity(2)), 0.0);
}

TEST(MeanSemigroup, TwoPointCommutatorMatchesDirectSum) {
  const Ensemble e = generate_ensemble("two-point", 2, {{"a", 1.0}}, 4);
  const PreChannel a = e[0].channel;
  const double t = 0.6;
  const PreChannel direct = Complex(0.5) * expm(a, t) + Complex(0.5) * expm(-a, t);
  EXPECT_LE(max_abs_diff(mean_semigroup(e, t), direct), 1e-12);
  // Hermitian-preserving: Hermitian inputs map to Hermitian outputs.
  const Op h = random_op(2);
  const Op image = apply(mean_semigroup(e, t), h + h.adjoint());
  EXPECT_LE(max_abs_diff(image, image.adjoint()), 1e-12);
}

TEST(CompositionW, Examples) {
  const PreChannel a = random_channel(2, 0.5);
  const double t = 1.3;
  EXPECT_LE(rel_diff(composition_W({a, a, a, a}, t), expm(a, t)), 1e-12);
  EXPECT_EQ(max_abs_diff(composition_W({a}, t), expm(a, t)), 0.0);
}

TEST(CompositionW, OrderMatters) {
  const PreChannel a = random_channel(2, 0.5);
  const PreChannel b = random_channel(2, 0.5);
  ASSERT_GT(max_abs_diff(compose(a, b), compose(b, a)), 1e-3);
  const double t = 1.0;
  const PreChannel ab = composition_W({a, b}, t);
  EXPECT_LE(max_abs_diff(ab, compose(expm(a, t / 2), expm(b, t / 2))), 1e-14);
  EXPECT_GT(max_abs_diff(ab, composition_W({b, a}, t)), 1e-6);
}

TEST(CompositionW, RejectsBadInput) {
  EXPECT_THROW(composition_W({}, 1.0), PreconditionError);
  EXPECT_THROW(composition_W({random_channel(2), random_channel(3)}, 1.0), DimensionError);
}

TEST(Power, MatchesRepeatedComposition) {
  const PreChannel u = random_channel(2, 0.5);
  PreChannel acc = PreChannel::identity(2);
  for (std::size_t k = 0; k <= 9; ++k) {
    EXPECT_LE(rel_diff(power(u, k), acc), 1e-13) << "k = " << k;
    acc = compose(acc, u);
  }
}

TEST(Delta, Examples) {
  const PreChannel a = random_channel(2, 0.5);
  const Ensemble single({{a, 1.0}});
  EXPECT_EQ(max_abs_diff(delta(single, a, 0.7), PreChannel::zero(2)), 0.0);
  const Ensemble e = random_ensemble(2, 3, 22);
  Matrix acc = Matrix::Zero(4, 4);
  for (const Atom& atom : e.atoms()) acc += atom.prob * delta(e, atom.channel, 0.9).rep();
  EXPECT_LE(acc.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(max_abs_diff(delta(e, e[0].channel, 0.0), PreChannel::zero(2)), 0.0);
}

TEST(FTerm, Examples) {
  const Ensemble e = random_ensemble(2, 3, 23);
  const double t = 0.4;
  EXPECT_LE(max_abs_diff(f_term(e, 3, {}, {}, t), power(mean_semigroup(e, t), 3)), 1e-15);
  std::vector<PreChannel> ds;
  for (std::size_t k = 0; k < 3; ++k) ds.push_back(delta(e, e[k].channel, t));
  EXPECT_LE(max_abs_diff(f_term(e, 3, {1, 2, 3}, ds, t), compose(compose(ds[0], ds[1]), ds[2])), 1e-15);
  // a = (2) in n = 3: M^1 D M^1.
  const PreChannel m = mean_semigroup(e, t);
  EXPECT_LE(max_abs_diff(f_term(e, 3, {2}, {ds[0]}, t), compose(compose(m, ds[0]), m)), 1e-15);
}

TEST(FTerm, IsLinearInEachSlot) {
  const Ensemble e = random_ensemble(2, 3, 24);
  const double t = 0.5;
  const PreChannel d1 = random_channel(2), d2 = random_channel(2), d3 = random_channel(2);
  const Complex a(0.3, 1.1), b(-2.0, 0.2);
  const PreChannel lhs = f_term(e, 4, {1, 3}, {a * d1 + b * d2, d3}, t);
  const PreChannel rhs = a * f_term(e, 4, {1, 3}, {d1, d3}, t) + b * f_term(e, 4, {1, 3}, {d2, d3}, t);
  EXPECT_LE(rel_diff(lhs, rhs), 1e-12);
}

TEST(FTerm, BinomialDecompositionEqualsComposition) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const Ensemble e = random_ensemble(2, 3, 1000 + 10 * n + trial);
      const double t = uniform(0.1, 2.0);
      const double s = t / static_cast<double>(n);
      const auto idx = sample_indices(e, n, SeedSpec{n}, static_cast<std::uint64_t>(trial));
      std::vector<PreChannel> factors, deltas;
      for (std::size_t k : idx) {
        factors.push_back(e[k].channel);
        deltas.push_back(delta(e, e[k].channel, s));
      }
      Matrix acc = Matrix::Zero(4, 4);
      for (const auto& pos : all_subsets(n)) {
        std::vector<PreChannel> chosen;
        for (std::size_t a : pos) chosen.push_back(deltas[a - 1]);
        acc += f_term(e, n, pos, chosen, s).rep();
      }
      EXPECT_LE((acc - composition_W(factors, t).rep()).cwiseAbs().maxCoeff(), 1e-10) << "n = " << n;
    }
  }
}

TEST(FTerm, RejectsMalformedPositions) {
  const Ensemble e = random_ensemble(2, 2, 25);
  const PreChannel d = random_channel(2);
  EXPECT_THROW(f_term(e, 3, {0}, {d}, 0.1), PreconditionError);
  EXPECT_THROW(f_term(e, 3, {4}, {d}, 0.1), PreconditionError);
  EXPECT_THROW(f_term(e, 3, {2, 2}, {d, d}, 0.1), PreconditionError);
  EXPECT_THROW(f_term(e, 3, {3, 1}, {d, d}, 0.1), PreconditionError);
  EXPECT_THROW(f_term(e, 3, {1, 2}, {d}, 0.1), PreconditionError);
}

TEST(ExpectedComposition, EnumerationMatchesPower) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const Ensemble e = random_ensemble(2, 3, 1100 + n);
    const double t = 0.9;
    const double s = t / static_cast<double>(n);
    std::vector<std::size_t> idx(n, 0);
    Matrix acc = Matrix::Zero(4, 4);
    while (true) {
      std::vector<PreChannel> factors;
      double w = 1.0;
      for (std::size_t k : idx) {
        factors.push_back(e[k].channel);
        w *= e[k].prob;
      }
      acc += w * composition_W(factors, t).rep();
      std::size_t i = 0;
      while (i < n && ++idx[i] == e.size()) idx[i++] = 0;
      if (i == n) break;
    }
    EXPECT_LE((acc - power(mean_semigroup(e, s), n).rep()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((acc - expected_composition(e, n, t).rep()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Chernoff, Examples) {
  const PreChannel a = random_channel(2, 0.5);
  const TimeGrid grid = TimeGrid::uniform(1.0, 17);
  const Op x = random_op(2);
  for (std::size_t n : {1, 4, 16}) {
    EXPECT_LE(chernoff_error(Ensemble({{a, 1.0}}), x, n, grid), 1e-13);
    EXPECT_LE(chernoff_error(Ensemble({{a, 0.3}, {a, 0.7}}), x, n, grid), 1e-13);
  }
  const auto traj = chernoff_trajectory(random_ensemble(2, 3, 26), x, 4, grid);
  ASSERT_EQ(traj.size(), 17u);
  EXPECT_EQ(traj[0], 0.0);
}

TEST(Chernoff, ErrorHalvesWhenNDoubles) {
  const TimeGrid grid = TimeGrid::uniform(1.0, 65);
  for (int trial = 0; trial < 10; ++trial) {
    const Ensemble e = random_ensemble(2, 3, 1200 + trial);
    const Op x = random_op(2);
    for (std::size_t n : {8, 16, 32, 64}) {
      const double ratio = chernoff_error(e, x, 2 * n, grid) / chernoff_error(e, x, n, grid);
      EXPECT_GE(ratio, 0.3) << "n = " << n;
      EXPECT_LE(ratio, 0.7) << "n = " << n;
    }
  }
}

TEST(Chernoff, DecaysForShippedFamilies) {
  const TimeGrid grid = TimeGrid::uniform(1.0, 65);
  const Op x = Op::unit(2, 0, 0);
  for (const char* family : {"two-point", "ginibre", "lindblad-like"}) {
    const Ensemble e = generate_ensemble(family, 2, {}, 31);
    double prev = chernoff_error(e, x, 1, grid);
    for (std::size_t n = 2; n <= 256; n *= 2) {
      const double cur = chernoff_error(e, x, n, grid);
      EXPECT_LE(cur, 1.05 * prev) << family << " n = " << n;
      prev = cur;
    }
  }
}

TEST(TimeGridTest, Validation) {
  const TimeGrid g = TimeGrid::uniform(2.0, 5);
  EXPECT_EQ(g.points(), (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  EXPECT_NO_THROW(TimeGrid(0.0, {0.0}));
  EXPECT_THROW(TimeGrid(1.0, {}), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, {0.1, 1.0}), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, {0.0, 0.9}), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, {0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
  EXPECT_THROW(TimeGrid(-1.0, {0.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(TimeGrid::uniform(1.0, 1), std::invalid_argument);
}
