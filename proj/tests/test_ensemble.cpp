#include "prechannel/ensemble.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "prechannel/error.hpp"
#include "prechannel/generators.hpp"
#include "test_util.hpp"

using namespace prechannel;
using prechannel::testing::random_channel;
using prechannel::testing::random_ensemble;
using prechannel::testing::random_op;

namespace {

Ensemble single(const PreChannel& a) { return Ensemble({{a, 1.0}}); }

Ensemble two_point(const PreChannel& a) { return Ensemble({{a, 0.5}, {-a, 0.5}}); }

PreChannel scalar(double v) { return PreChannel(1, Matrix::Constant(1, 1, Complex(v))); }

}  // namespace

TEST(Expect, Examples) {
  const PreChannel a = random_channel(2);
  EXPECT_EQ(max_abs_diff(expect(single(a)), a), 0.0);
  EXPECT_EQ(max_abs_diff(expect(two_point(a)), PreChannel::zero(2)), 0.0);
}

TEST(Expect, IntegrationLemma) {
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    const Ensemble e = random_ensemble(d, 1 + trial % 4, 100 + trial);
    const Op x = random_op(d);
    Op rhs = Op::zero(d);
    for (const Atom& atom : e.atoms()) rhs = rhs + Complex(atom.prob) * apply(atom.channel, x);
    EXPECT_LE(schatten_norm(apply(expect(e), x) - rhs, SchattenExponent(2.0)), 1e-12);
  }
}

TEST(ExpectMap, Examples) {
  const Ensemble e = random_ensemble(2, 3, 7);
  EXPECT_LE(max_abs_diff(expect_map(e, [](const PreChannel& u) { return u; }), expect(e)), 1e-15);
  const PreChannel c = random_channel(2);
  EXPECT_LE(max_abs_diff(expect_map(e, [&](const PreChannel&) { return c; }), c), 1e-14);
}

TEST(ExpectMap, AdjointLemma) {
  for (int trial = 0; trial < 50; ++trial) {
    const Ensemble e = random_ensemble(1 + trial % 3, 3, 200 + trial);
    const PreChannel lhs = expect_map(e, [](const PreChannel& u) { return adjoint(u); });
    EXPECT_LE(max_abs_diff(lhs, adjoint(expect(e))), 1e-12);
  }
}

TEST(Centered, HasZeroMean) {
  const Ensemble e = random_ensemble(2, 3, 11);
  const Ensemble c = centered(e);
  EXPECT_LE(max_abs_diff(expect(c), PreChannel::zero(2)), 1e-15);
  ASSERT_EQ(c.size(), e.size());
  for (std::size_t k = 0; k < e.size(); ++k) EXPECT_EQ(c[k].prob, e[k].prob);
}

TEST(Variance, Examples) {
  const PreChannel a = random_channel(2);
  EXPECT_EQ(max_abs_diff(variance_superop(single(a)), PreChannel::zero(2)), 0.0);
  EXPECT_LE(max_abs_diff(variance_superop(two_point(a)), compose(adjoint(a), a)), 1e-12);
}

TEST(Variance, KeyIdentityAgainstEnumeration) {
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const Ensemble e = random_ensemble(d, 1 + trial % 4, 300 + trial);
    const Op x = random_op(d);
    const PreChannel mean = expect(e);
    double rhs = 0.0;
    for (const Atom& atom : e.atoms()) {
      const double n = schatten_norm(apply(atom.channel - mean, x), SchattenExponent(2.0));
      rhs += atom.prob * n * n;
    }
    const Complex lhs = pairing(apply(variance_superop(e), x), x);
    EXPECT_NEAR(lhs.real(), rhs, 1e-10);
    EXPECT_NEAR(lhs.imag(), 0.0, 1e-10);
    const double rms = rms_deviation(e, x);
    EXPECT_NEAR(rms * rms, rhs, 1e-10);
  }
}

TEST(Variance, IsPositiveSemidefinite) {
  for (int trial = 0; trial < 100; ++trial) {
    const Ensemble e = random_ensemble(1 + trial % 3, 1 + trial % 4, 400 + trial);
    const Matrix rep = variance_superop(e).rep();
    const Matrix herm = 0.5 * (rep + rep.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(SampleIid, SingleAtomGivesCopies) {
  const PreChannel a = random_channel(2);
  const auto draws = sample_iid(single(a), 5, SeedSpec{1});
  ASSERT_EQ(draws.size(), 5u);
  for (const PreChannel& u : draws) EXPECT_EQ(max_abs_diff(u, a), 0.0);
}

TEST(SampleIid, IsDeterministic) {
  const Ensemble e = random_ensemble(2, 3, 12);
  EXPECT_EQ(sample_indices(e, 100, SeedSpec{42}, 3), sample_indices(e, 100, SeedSpec{42}, 3));
  EXPECT_NE(sample_indices(e, 100, SeedSpec{42}, 3), sample_indices(e, 100, SeedSpec{43}, 3));
  EXPECT_NE(sample_indices(e, 100, SeedSpec{42}, 3), sample_indices(e, 100, SeedSpec{42}, 4));
}

TEST(SampleIid, PrefixIsSharedAcrossLengths) {
  const Ensemble e = random_ensemble(2, 3, 13);
  const auto longer = sample_indices(e, 64, SeedSpec{5}, 9);
  const auto shorter = sample_indices(e, 16, SeedSpec{5}, 9);
  EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), longer.begin()));
}

TEST(SampleIid, FrequenciesMatchProbabilities) {
  const Ensemble e({{scalar(1.0), 0.2}, {scalar(2.0), 0.3}, {scalar(3.0), 0.5}});
  const std::size_t n = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t k : sample_indices(e, n, SeedSpec{2024})) ++counts[k];
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = e[k].prob;
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    EXPECT_NEAR(static_cast<double>(counts[k]) / static_cast<double>(n), p, 3 * se) << "atom " << k;
  }
}

TEST(SampleIid, RejectsZeroLength) { EXPECT_THROW(sample_iid(single(scalar(1.0)), 0, SeedSpec{}), PreconditionError); }

TEST(ChebyshevBound, Examples) {
  const Op x = random_op(2);
  EXPECT_EQ(chebyshev_bound(single(random_channel(2)), x, 0.1, SchattenExponent(2.0)), 0.0);
  const double a = 0.7, eps = 0.3;
  const Op one = Op::identity(1);
  EXPECT_NEAR(chebyshev_bound(two_point(scalar(a)), one, eps, SchattenExponent(2.0)), a * a / (eps * eps), 1e-14);
}

TEST(ChebyshevBound, DominatesExactProbability) {
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const Ensemble e = random_ensemble(d, 2 + trial % 3, 500 + trial);
    const Op x = random_op(d);
    const double rms = rms_deviation(e, x);
    for (double p : {1.0, 1.5, 2.0}) {
      for (double scale : {0.2, 0.7, 1.0, 2.0}) {
        const double eps = scale * rms;
        EXPECT_GE(chebyshev_bound(e, x, eps, SchattenExponent(p)), deviation_prob_exact(e, x, eps) - 1e-12);
      }
    }
  }
}

TEST(ChebyshevBound, RejectsInvalidArguments) {
  const Ensemble e = random_ensemble(2, 2, 14);
  const Op x = random_op(2);
  EXPECT_THROW(chebyshev_bound(e, x, 0.0, SchattenExponent(2.0)), PreconditionError);
  EXPECT_THROW(chebyshev_bound(e, x, -1.0, SchattenExponent(2.0)), PreconditionError);
  EXPECT_THROW(chebyshev_bound(e, x, 0.1, SchattenExponent(3.0)), PreconditionError);
}

TEST(DeviationProbExact, Examples) {
  const Op x = random_op(2);
  EXPECT_EQ(deviation_prob_exact(single(random_channel(2)), x, 1e-6), 0.0);
  const PreChannel a = random_channel(2);
  const double r = schatten_norm(apply(a, x), SchattenExponent(2.0));
  EXPECT_EQ(deviation_prob_exact(two_point(a), x, 0.9 * r), 1.0);
  EXPECT_EQ(deviation_prob_exact(two_point(a), x, 1.1 * r), 0.0);
  // Strict inequality at the threshold.
  EXPECT_EQ(deviation_prob_exact(two_point(scalar(1.0)), Op::identity(1), 1.0), 0.0);
}

TEST(DeviationProbExact, MatchesMonteCarlo) {
  const Ensemble e = random_ensemble(2, 3, 15);
  const Op x = random_op(2);
  const double eps = rms_deviation(e, x);
  const double exact = deviation_prob_exact(e, x, eps);
  const PreChannel mean = expect(e);
  const std::size_t n = 100000;
  std::size_t hits = 0;
  for (std::size_t k : sample_indices(e, n, SeedSpec{77})) {
    if (schatten_norm(apply(e[k].channel - mean, x), SchattenExponent(2.0)) > eps) ++hits;
  }
  const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(n));
  EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(n), exact, std::max(3 * se, 1e-12));
}

TEST(SuperopLemma, CenteredMiddleFactorVanishes) {
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 3;
    const Ensemble a = centered(random_ensemble(d, 3, 600 + trial));
    const Ensemble b = random_ensemble(d, 2, 700 + trial);
    Matrix acc = Matrix::Zero(d * d, d * d);
    for (const Atom& bj : b.atoms()) {
      for (const Atom& ak : a.atoms()) {
        acc += bj.prob * ak.prob * compose(compose(adjoint(bj.channel), ak.channel), bj.channel).rep();
      }
    }
    EXPECT_LE(acc.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(IndependenceLemma, ProductSupportSumFactorizes) {
  for (int m = 1; m <= 4; ++m) {
    std::vector<Ensemble> es;
    for (int i = 0; i < m; ++i) es.push_back(random_ensemble(2, 2 + i % 2, 800 + 10 * m + i));
    std::vector<std::size_t> idx(m, 0);
    Matrix acc = Matrix::Zero(4, 4);
    while (true) {
      Matrix prod = Matrix::Identity(4, 4);
      double w = 1.0;
      for (int i = 0; i < m; ++i) {
        prod = prod * es[i][idx[i]].channel.rep();
        w *= es[i][idx[i]].prob;
      }
      acc += w * prod;
      int i = 0;
      while (i < m && ++idx[i] == es[i].size()) idx[i++] = 0;
      if (i == m) break;
    }
    PreChannel expected = PreChannel::identity(2);
    for (const Ensemble& e : es) expected = compose(expected, expect(e));
    EXPECT_LE((acc - expected.rep()).cwiseAbs().maxCoeff(), 1e-10) << "m = " << m;
  }
}

TEST(EnsembleInvariants, RejectsInvalidInput) {
  EXPECT_THROW(Ensemble({}), ConfigError);
  EXPECT_THROW(Ensemble({{scalar(1.0), 0.5}, {PreChannel::identity(2), 0.5}}), ConfigError);
  EXPECT_THROW(Ensemble({{scalar(1.0), 0.0}, {scalar(2.0), 1.0}}), ConfigError);
  EXPECT_THROW(Ensemble({{scalar(1.0), -0.1}, {scalar(2.0), 1.1}}), ConfigError);
  EXPECT_THROW(Ensemble({{scalar(1.0), 0.45}, {scalar(2.0), 0.45}}), ConfigError);
  EXPECT_THROW(Ensemble({{scalar(1.0), std::nan("")}}), ConfigError);
}

TEST(EnsembleInvariants, RenormalizesWithinTolerance) {
  const Ensemble e({{scalar(1.0), 0.5 + 5e-13}, {scalar(2.0), 0.5}});
  EXPECT_NEAR(e[0].prob + e[1].prob, 1.0, 1e-16);
  const Ensemble exact({{scalar(1.0), 0.25}, {scalar(2.0), 0.75}});
  EXPECT_EQ(exact[0].prob, 0.25);
  EXPECT_EQ(exact[1].prob, 0.75);
}

TEST(EnsembleInvariants, PickCoversSupport) {
  const Ensemble e({{scalar(1.0), 0.25}, {scalar(2.0), 0.75}});
  EXPECT_EQ(e.pick(0.0), 0u);
  EXPECT_EQ(e.pick(0.2499), 0u);
  EXPECT_EQ(e.pick(0.25), 1u);
  EXPECT_EQ(e.pick(std::nextafter(1.0, 0.0)), 1u);
}

TEST(Generators, TwoPointScalar) {
  const Ensemble e = generate_ensemble("two-point", 1, {{"a", 1.0}}, 0);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].channel.rep()(0, 0), Complex(1.0));
  EXPECT_EQ(e[1].channel.rep()(0, 0), Complex(-1.0));
  EXPECT_EQ(e[0].prob, 0.5);
  EXPECT_EQ(e[1].prob, 0.5);
}

TEST(Generators, TwoPointIsCenteredWithNormA) {
  for (const char* dir : {"commutator", "ginibre"}) {
    const Ensemble e = generate_ensemble("two-point", 2, {{"a", 0.5}, {"direction", dir}}, 3);
    EXPECT_LE(max_abs_diff(expect(e), PreChannel::zero(2)), 1e-15);
    EXPECT_NEAR(norm22(e[0].channel), 0.5, 1e-12);
  }
}

TEST(Generators, CommutatorDirectionIsHermitianPreserving) {
  const Ensemble e = generate_ensemble("two-point", 2, {{"a", 1.0}}, 9);
  const Op h = random_op(2);
  const Op herm = h + h.adjoint();
  const Op image = apply(e[0].channel, herm);
  EXPECT_LE(max_abs_diff(image, image.adjoint()), 1e-14);
}

TEST(Generators, NormBudgetIsRespected) {
  for (const char* family : {"ginibre", "lindblad-like"}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Ensemble e = generate_ensemble(family, 2, {{"norm_budget", 1.0}, {"probs", "random"}}, seed);
      EXPECT_EQ(e.size(), 3u);
      for (const Atom& a : e.atoms()) EXPECT_LE(norm22(a.channel), 1.0 + 1e-9) << family;
    }
  }
}

TEST(Generators, LindbladGeneratorMatchesDefinition) {
  const Op h = random_hermitian(2, 5);
  const Op l = random_op(2);
  const Op x = random_op(2);
  const Op ld = l.adjoint();
  const Op expected = Complex(0.0, -1.0) * (h * x - x * h) + l * x * ld - Complex(0.5) * (ld * l * x + x * ld * l);
  EXPECT_LE(max_abs_diff(apply(lindblad_generator(h, {l}), x), expected), 1e-12);
  EXPECT_LE(max_abs_diff(apply(commutator_generator(h), x), Complex(0.0, -1.0) * (h * x - x * h)), 1e-12);
}

TEST(Generators, UniformAtoms) {
  nlohmann::json first = nlohmann::json::array(), second = nlohmann::json::array();
  first.push_back({2.0, 0.0});
  second.push_back({-1.0, 0.5});
  const nlohmann::json reps = {first, second};
  const Ensemble e = generate_ensemble("uniform-atoms", 1, {{"reps", reps}}, 0);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].channel.rep()(0, 0), Complex(2.0));
  EXPECT_EQ(e[1].channel.rep()(0, 0), Complex(-1.0, 0.5));
  EXPECT_EQ(e[0].prob, 0.5);
}

TEST(Generators, SameSeedSameEnsemble) {
  for (const std::string& family : {std::string("two-point"), std::string("ginibre"), std::string("lindblad-like")}) {
    const Ensemble a = generate_ensemble(family, 2, {}, 17);
    const Ensemble b = generate_ensemble(family, 2, {}, 17);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(max_abs_diff(a[k].channel, b[k].channel), 0.0);
      EXPECT_EQ(a[k].prob, b[k].prob);
    }
  }
}

TEST(Generators, RejectsInvalidParameters) {
  EXPECT_THROW(generate_ensemble("no-such-family", 2, {}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("ginibre", 0, {}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("ginibre", kMaxDim + 1, {}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("ginibre", 2, {{"atoms", kMaxAtoms + 1}}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("ginibre", 2, {{"norm_budget", -1.0}}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("ginibre", 2, {{"probs", "skewed"}}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("two-point", 2, {{"a", "big"}}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("uniform-atoms", 2, {}, 0), ConfigError);
  EXPECT_THROW(generate_ensemble("lindblad-like", 1, {}, 0), ConfigError);
}
