#include "oracles.hpp"

#include "qqsp/builtins.hpp"
#include "qqsp/classical.hpp"

#include <gtest/gtest.h>

using namespace qqsp;

TEST(ClassicalValidate, NamedTensorsAreValid) {
  EXPECT_TRUE(classical_validate(builtins::mendel(Eigen::Vector2d(0.3, 0.7), ProcessType::A)).ok());
  EXPECT_TRUE(classical_validate(builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), ProcessType::A)).ok());
  const CubicTensor m = mendel_tensor();
  EXPECT_EQ(m(0, 0, 0), 1.0);
  EXPECT_EQ(m(0, 1, 0), 0.5);
  EXPECT_EQ(m(1, 0, 0), 0.5);
  EXPECT_EQ(m(1, 1, 0), 0.0);
}

TEST(ClassicalValidate, AsymmetricTensorIsRejected) {
  auto q = builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), ProcessType::A);
  q.step_tensors[0](1, 0, 0) = 0.0;
  q.step_tensors[0](1, 0, 1) = 1.0;
  const auto diag = classical_validate(q);
  EXPECT_FALSE(diag.ok());
  EXPECT_EQ(diag.steps.at(0).symmetry_residual, 1.0);
  EXPECT_THROW(classical_propagate(q, 2), SeedValidationError);
  EXPECT_THROW(lift_to_quantum(q), SeedValidationError);
}

TEST(ClassicalValidate, NonStochasticRowIsRejected) {
  auto q = builtins::mendel(Eigen::Vector2d(0.3, 0.7), ProcessType::A);
  q.step_tensors[0](0, 0, 1) = 0.2;
  EXPECT_FALSE(classical_validate(q).ok());
}

TEST(Distribution, RejectsOffSimplexWeights) {
  EXPECT_THROW(Distribution(Eigen::Vector2d(0.6, 0.6)), std::invalid_argument);
  EXPECT_THROW(Distribution(Eigen::Vector2d(1.1, -0.1)), std::invalid_argument);
  EXPECT_NO_THROW(Distribution(Eigen::Vector2d(1.0, 0.0)));
}

TEST(ClassicalPropagate, MendelKeepsTrajectoryFixed) {
  for (ProcessType type : {ProcessType::A, ProcessType::B}) {
    const auto q = classical_propagate(builtins::mendel(Eigen::Vector2d(0.3, 0.7), type), 6);
    for (const auto& x : q.trajectory) {
      EXPECT_NEAR(x(0), 0.3, 1e-14);
      EXPECT_NEAR(x(1), 0.7, 1e-14);
    }
  }
}

TEST(ClassicalPropagate, VolterraTrajectoryPrefix) {
  const auto q = classical_propagate(builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), ProcessType::A), 3);
  EXPECT_NEAR(q.trajectory[0](0), 0.5, 1e-12);
  EXPECT_NEAR(q.trajectory[1](0), 0.75, 1e-12);
  EXPECT_NEAR(q.trajectory[1](1), 0.25, 1e-12);
  EXPECT_NEAR(q.trajectory[2](0), 15.0 / 16.0, 1e-12);
  EXPECT_NEAR(q.trajectory[2](1), 1.0 / 16.0, 1e-12);
}

TEST(ClassicalPropagate, MatchesBruteForceSums) {
  for (ProcessType type : {ProcessType::A, ProcessType::B})
    for (int N = 2; N <= 4; ++N) {
      const std::vector<double> step = oracle::random_symmetric_stochastic(N, 100 + static_cast<std::uint64_t>(N));
      Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(N, 1.0, static_cast<double>(N));
      x0 /= x0.sum();
      ClassicalQSP q;
      q.N = N;
      q.type = type;
      q.x0 = x0;
      q.step_tensors = {CubicTensor::from_row_major(N, step)};
      const auto filled = classical_propagate(q, 5);
      const auto ref = oracle::classical_brute_force(step, N, std::vector<double>(x0.data(), x0.data() + N), 5, type);
      for (int s = 0; s < 5; ++s)
        for (int t = s + 1; t <= 5; ++t)
          for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
              for (int k = 0; k < N; ++k) EXPECT_NEAR(filled.tensor(s, t)(i, j, k), ref.at(s, t, i, j, k), 1e-13);
    }
}

TEST(ClassicalPropagate, MendelTwoStepMatchesBruteForce) {
  const auto q = classical_propagate(builtins::mendel(Eigen::Vector2d(0.2, 0.8), ProcessType::A), 2);
  const auto ref = oracle::classical_brute_force(mendel_tensor().data(), 2, {0.2, 0.8}, 2, ProcessType::A);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(q.tensor(0, 2)(i, j, k), ref.at(0, 2, i, j, k), 1e-13);
}

TEST(ClassicalPropagate, FilledTensorsStaySymmetricAndStochastic) {
  for (ProcessType type : {ProcessType::A, ProcessType::B}) {
    ClassicalQSP q;
    q.N = 3;
    q.type = type;
    q.x0 = Eigen::Vector3d(0.2, 0.3, 0.5);
    q.step_tensors = {CubicTensor::from_row_major(3, oracle::random_symmetric_stochastic(3, 7))};
    const auto filled = classical_propagate(q, 6);
    for (int s = 0; s < 6; ++s)
      for (int t = s + 1; t <= 6; ++t) {
        ClassicalQSP one = q;
        one.step_tensors = {filled.tensor(s, t)};
        const auto diag = classical_validate(one, 1e-11);
        EXPECT_TRUE(diag.ok());
      }
  }
}

TEST(Lift, UnitMapsToUnit) {
  const SuperMapd p = lift_tensor(volterra_tensor(0.3));
  EXPECT_LE((p(Matrixd::Identity(2, 2)) - Matrixd::Identity(4, 4)).norm(), 1e-15);
}

TEST(Lift, VolterraIndicatorOfFirstType) {
  const Matrixd out = lift_tensor(volterra_tensor(1.0))(oracle::unit_matrix(2, 0, 0));
  EXPECT_EQ(out(0, 0).real(), 1.0);
  EXPECT_EQ(out(1, 1).real(), 1.0);
  EXPECT_EQ(out(2, 2).real(), 1.0);
  EXPECT_EQ(out(3, 3).real(), 0.0);
}

TEST(Lift, StepMapsAreValidSeeds) {
  const auto seed = lift_to_quantum(builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), ProcessType::A));
  EXPECT_TRUE(validate_seed(seed).ok());
  EXPECT_TRUE(certify_unital_cp(seed.step_maps[0]).is_cp);
  EXPECT_EQ(seed.kind, AlgebraKind::diagonal);
}

TEST(Lift, RoundTripIsBitExact) {
  const auto q = builtins::mendel(Eigen::Vector2d(0.3, 0.7), ProcessType::A);
  const ProcessLattice L = propagate(lift_to_quantum(q), 1);
  const ClassicalQSP back = project_to_classical(L);
  EXPECT_EQ(back.step_tensors[0], q.step_tensors[0]);
  EXPECT_EQ(back.tensor(0, 1), mendel_tensor());
}

TEST(Project, ConstantDiagonalLatticeIsUniform) {
  QQSPSeed seed;
  seed.n = 3;
  seed.kind = AlgebraKind::diagonal;
  seed.omega0 = Stated::maximally_mixed(3);
  seed.step_maps = {builtins::constant_step(seed.omega0)};
  const ClassicalQSP q = project_to_classical(propagate(seed, 3));
  for (int s = 0; s < 3; ++s)
    for (int t = s + 1; t <= 3; ++t)
      for (double v : q.tensor(s, t).data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Project, RejectsNonDiagonalLattice) {
  const ProcessLattice L = propagate(builtins::entangling_seed(ProcessType::A), 2);
  EXPECT_THROW(project_to_classical(L), NotDiagonalError);
}

TEST(Bridge, LiftPropagateProjectCommutes) {
  for (ProcessType type : {ProcessType::A, ProcessType::B}) {
    const auto q = builtins::volterra(1.0, Eigen::Vector2d(0.5, 0.5), type);
    const ClassicalQSP direct = classical_propagate(q, 4);
    const ClassicalQSP bridged = project_to_classical(propagate(lift_to_quantum(q), 4));
    for (int s = 0; s < 4; ++s)
      for (int t = s + 1; t <= 4; ++t)
        for (std::size_t e = 0; e < direct.tensor(s, t).data().size(); ++e)
          EXPECT_NEAR(direct.tensor(s, t).data()[e], bridged.tensor(s, t).data()[e], 1e-12);
    for (int t = 0; t <= 4; ++t)
      EXPECT_LE((direct.trajectory[static_cast<std::size_t>(t)] - bridged.trajectory[static_cast<std::size_t>(t)])
                    .cwiseAbs()
                    .maxCoeff(),
                1e-11);
  }
}

TEST(CubicTensor, RowMajorLayoutHasLastIndexFastest) {
  const std::vector<double> v = {0, 1, 2, 3, 4, 5, 6, 7};
  const CubicTensor p = CubicTensor::from_row_major(2, v);
  EXPECT_EQ(p(0, 0, 1), 1.0);
  EXPECT_EQ(p(0, 1, 0), 2.0);
  EXPECT_EQ(p(1, 0, 0), 4.0);
  EXPECT_EQ(CubicTensor::from_matrix(p.as_matrix()), p);
  EXPECT_THROW(CubicTensor::from_row_major(2, std::vector<double>(7, 0.0)), DimensionError);
}
