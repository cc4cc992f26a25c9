#include "oracles.hpp"

#include "qqsp/builtins.hpp"
#include "qqsp/ergodic.hpp"
#include "qqsp/marginal.hpp"
#include "qqsp/random.hpp"

#include <gtest/gtest.h>

using namespace qqsp;

namespace {

struct Run {
  ProcessLattice lattice;
  MarginalFamily Q, pair, lifted;
};

Run run(const QQSPSeed& seed, int T) {
  ProcessLattice L = propagate(seed, T);
  MarginalFamily Q = build_Q(L);
  MarginalFamily pair = seed.type == ProcessType::A ? build_H(L) : build_h(L);
  MarginalFamily lifted = seed.type == ProcessType::A ? build_Z(pair) : build_z(pair);
  return {std::move(L), std::move(Q), std::move(pair), std::move(lifted)};
}

/// Predual of a diagonal-algebra map as a row-stochastic matrix, read off
/// the images of vertices by direct evaluation of the map on indicators.
Eigen::MatrixXd stochastic_matrix(const SuperMapd& map) {
  const Index d = map.in_dim();
  const Index out = map.out_dim();
  Eigen::MatrixXd m(out, d);
  for (Index k = 0; k < d; ++k) {
    const Matrixd image = map(oracle::unit_matrix(d, k, k));
    for (Index i = 0; i < out; ++i) m(i, k) = image(i, i).real();
  }
  return m;
}

}  // namespace

TEST(DecayTrace, ConstantLatticeCollapsesEveryPair) {
  const auto r = run(builtins::constant_seed(2, ProcessType::A), 4);
  const Ensemble e = random_ensemble(2, AlgebraKind::full, 5, 7);
  for (const DecayTrace& trace : {decay_trace(r.lattice, e.on_mm, 0, 4), decay_trace(r.Q, e.on_m, 0, 4),
                                  decay_trace(r.pair, e.on_mm, 1, 4), decay_trace(r.lifted, e.on_mm, 0, 4)})
    for (const auto& row : trace.distances)
      for (double d : row) EXPECT_LE(d, 1e-13);
}

TEST(DecayTrace, IdentityChannelKeepsInitialDistance) {
  const auto r = run(lift_to_quantum(builtins::identity_like(ProcessType::A)), 5);
  const Ensemble e = random_ensemble(2, AlgebraKind::diagonal, 5, 8);
  const DecayTrace trace = decay_trace(r.Q, e.on_m, 0, 5);
  for (std::size_t p = 0; p < e.on_m.size(); ++p) {
    const double initial = trace_norm_distance(e.on_m[p].first, e.on_m[p].second);
    for (double d : trace.distances[p]) EXPECT_NEAR(d, initial, 1e-12);
  }
}

TEST(DecayTrace, VolterraQFamilyMatchesClassicalRecursion) {
  const auto r = run(lift_to_quantum(builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), ProcessType::A)), 5);
  const DecayTrace trace = decay_trace(r.Q, {{Stated::basis(2, 0), Stated::basis(2, 1)}}, 0, 5);
  const auto L = oracle::classical_brute_force(volterra_tensor(1.0).data(), 2, {0.5, 0.5}, 5, ProcessType::A);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const int t = trace.times[k];
    // Q^{0,t}_* δ_i has weights Σ_m x_m p^{[0,t]}_{i m, ·}.
    double l1 = 0.0;
    for (int c = 0; c < 2; ++c) {
      double a = 0.0, b = 0.0;
      for (int m = 0; m < 2; ++m) {
        a += L.x[0][static_cast<std::size_t>(m)] * L.at(0, t, 0, m, c);
        b += L.x[0][static_cast<std::size_t>(m)] * L.at(0, t, 1, m, c);
      }
      l1 += std::abs(a - b);
    }
    EXPECT_NEAR(trace.distances[0][k], l1, 1e-12);
  }
}

TEST(DecayTrace, DistancesStayInUnitRange) {
  const auto r = run(builtins::entangling_seed(ProcessType::B), 4);
  const Ensemble e = random_ensemble(2, AlgebraKind::full, 10, 9);
  for (const auto& row : decay_trace(r.lattice, e.on_mm, 0, 4).distances)
    for (double d : row) {
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 2.0 + 1e-12);
    }
}

TEST(DecayTrace, RejectsPairsOnWrongAlgebra) {
  const auto r = run(builtins::mixed_seed(ProcessType::A), 3);
  const Ensemble e = random_ensemble(2, AlgebraKind::full, 1, 10);
  EXPECT_THROW(decay_trace(r.Q, e.on_mm, 0, 3), DimensionError);
}

TEST(DecayTrace, HDistancesEqualPDistances) {
  const auto r = run(builtins::entangling_seed(ProcessType::A), 4);
  const Ensemble e = random_ensemble(2, AlgebraKind::full, 10, 11);
  const DecayTrace p = decay_trace(r.lattice, e.on_mm, 0, 4);
  const DecayTrace h = decay_trace(r.pair, e.on_mm, 0, 4);
  for (std::size_t i = 0; i < p.distances.size(); ++i)
    for (std::size_t k = 0; k < p.times.size(); ++k) EXPECT_NEAR(p.distances[i][k], h.distances[i][k], 1e-10);
}

TEST(Contraction, ConstantFamilyHasZeroCoefficient) {
  const auto r = run(builtins::constant_seed(2, ProcessType::A), 2);
  EXPECT_LE(contraction_coefficient(r.Q, 0, 1).lambda, 1e-13);
}

TEST(Contraction, IdentityOnDiagonalAlgebraHasUnitCoefficient) {
  const auto r = run(lift_to_quantum(builtins::identity_like(ProcessType::A)), 2);
  const ContractionEstimate est = contraction_coefficient(r.Q, 0, 2);
  EXPECT_NEAR(est.lambda, 1.0, 1e-14);
  EXPECT_EQ(est.method, ContractionMethod::exact_classical);
}

TEST(Contraction, DiagonalCoefficientMatchesVertexEnumeration) {
  QQSPSeed seed;
  seed.n = 2;
  seed.kind = AlgebraKind::diagonal;
  seed.omega0 = Stated::maximally_mixed(2);
  seed.step_maps = {0.5 * builtins::constant_step(seed.omega0) + 0.5 * lift_tensor(mendel_tensor())};
  const auto r = run(seed, 3);
  for (int t = 1; t <= 3; ++t) {
    const Eigen::MatrixXd S = stochastic_matrix(r.Q.map(0, t)).transpose();
    double brute = 0.0;
    for (Index i = 0; i < S.rows(); ++i)
      for (Index j = 0; j < S.rows(); ++j) brute = std::max(brute, 0.5 * (S.row(i) - S.row(j)).cwiseAbs().sum());
    EXPECT_NEAR(contraction_coefficient(r.Q, 0, t).lambda, brute, 1e-14);
  }
  // Q^{0,1}_* δ_i = ¾ ω + ¼ δ_i.
  EXPECT_NEAR(contraction_coefficient(r.Q, 0, 1).lambda, 0.25, 1e-14);
}

TEST(Contraction, SampledEstimateIsLowerBoundAndDeterministic) {
  const auto r = run(builtins::mixed_seed(ProcessType::A), 2);
  const ContractionEstimate a = contraction_coefficient(r.Q, 0, 1, 200, 5);
  const ContractionEstimate b = contraction_coefficient(r.Q, 0, 1, 200, 5);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.method, ContractionMethod::pure_pair_sampling);
  EXPECT_EQ(a.sample_count, 200);
  EXPECT_LE(a.lambda, 1.0 + 1e-12);
  EXPECT_GT(a.lambda, 0.0);
}

TEST(Contraction, BoundsEveryPairInEnsemble) {
  for (const auto& seed : {builtins::mixed_seed(ProcessType::A), builtins::entangling_seed(ProcessType::B)}) {
    const auto r = run(seed, 3);
    const Ensemble e = random_ensemble(2, AlgebraKind::full, 200, 12);
    for (int t = 1; t <= 3; ++t) {
      const double lambda = contraction_coefficient(r.Q, 0, t).lambda;
      const SuperMapd pre = predual(r.Q.map(0, t));
      for (const auto& pair : e.on_m) {
        const Matrixd diff = pair.first.density() - pair.second.density();
        EXPECT_LE(trace_norm(pre(diff)), (lambda + 1e-9) * trace_norm(diff));
      }
    }
  }
}

TEST(Verdict, ConstantLatticeIsErgodicEverywhere) {
  const auto r = run(builtins::constant_seed(2, ProcessType::A), 4);
  const ErgodicReport rep = ergodic_verdict(r.lattice, r.Q, r.pair, r.lifted, random_ensemble(2, AlgebraKind::full, 5, 1), {});
  EXPECT_TRUE(rep.joint);
  EXPECT_TRUE(rep.coherent);
  ASSERT_EQ(rep.families.size(), 4U);
}

TEST(Verdict, IdentityLikeLatticeIsNotErgodicAnywhere) {
  const auto r = run(lift_to_quantum(builtins::identity_like(ProcessType::A)), 6);
  const ErgodicReport rep =
      ergodic_verdict(r.lattice, r.Q, r.pair, r.lifted, random_ensemble(2, AlgebraKind::diagonal, 10, 2), {});
  EXPECT_FALSE(rep.joint);
  EXPECT_TRUE(rep.coherent);
  for (const auto& f : rep.families) EXPECT_FALSE(f.ergodic) << f.family;
}

TEST(Verdict, MixedSeedIsErgodicAtHorizon) {
  const auto r = run(builtins::mixed_seed(ProcessType::A), 8);
  const ErgodicReport rep =
      ergodic_verdict(r.lattice, r.Q, r.pair, r.lifted, random_ensemble(2, AlgebraKind::full, 20, 3), {});
  EXPECT_TRUE(rep.joint);
  EXPECT_TRUE(rep.coherent);
  EXPECT_LT(rep.family("Q").first_step.lambda, 1.0);
  EXPECT_EQ(rep.family("Z").family, "Z");
}

TEST(Verdict, DecayMatchesRepeatedPredualApplication) {
  const auto r = run(builtins::mixed_seed(ProcessType::A), 5);
  const Ensemble e = random_ensemble(2, AlgebraKind::full, 4, 4);
  const DecayTrace trace = decay_trace(r.Q, e.on_m, 0, 5);
  for (std::size_t p = 0; p < e.on_m.size(); ++p) {
    // Q is Markov, so Q^{0,t}_* = Q^{t-1,t}_* ∘ ... ∘ Q^{0,1}_*.
    Matrixd a = e.on_m[p].first.density(), b = e.on_m[p].second.density();
    for (int t = 1; t <= 5; ++t) {
      const SuperMapd pre = predual(r.Q.map(t - 1, t));
      a = pre(a);
      b = pre(b);
      EXPECT_NEAR(trace.distances[p][static_cast<std::size_t>(t - 1)], trace_norm(Matrixd(a - b)), 1e-12);
    }
  }
}
