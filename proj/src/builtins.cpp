#include "qqsp/builtins.hpp"

#include <cmath>

namespace qqsp::builtins {

using C = std::complex<double>;

SuperMapd constant_step(const Stated& omega) { return constant_map(omega, omega.dim() * omega.dim()); }

SuperMapd symmetrized_embedding(int n) {
  return 0.5 * (embedding_map<double>(n, Leg::first) + embedding_map<double>(n, Leg::second));
}

SuperMapd left_embedding(int n) { return embedding_map<double>(n, Leg::first); }

SuperMapd transpose_embedding(int n) {
  const Matrixd one = unit<double>(n);
  return SuperMapd::from_action(n, n * n, [&](const Matrixd& x) -> Matrixd { return kron(Matrixd(x.transpose()), one); });
}

SuperMapd entangling_step() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrixd hadamard(2, 2);
  hadamard << C(r), C(r), C(r), C(-r);
  Matrixd cnot = Matrixd::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = C(1);
  const Matrixd gate = cnot * kron(hadamard, unit<double>(2));
  const Matrixd one = unit<double>(2);
  const SuperMapd conj = SuperMapd::from_action(2, 4, [&](const Matrixd& x) -> Matrixd {
    return gate * kron(x, one) * gate.adjoint();
  });
  return 0.5 * (conj + flip_map<double>(2) * conj);
}

QQSPSeed constant_seed(int n, ProcessType type) {
  QQSPSeed seed;
  seed.n = n;
  seed.omega0 = Stated::maximally_mixed(n);
  seed.step_maps = {constant_step(seed.omega0)};
  seed.type = type;
  return seed;
}

QQSPSeed mixed_seed(ProcessType type) {
  QQSPSeed seed;
  seed.n = 2;
  seed.omega0 = Stated::maximally_mixed(2);
  seed.step_maps = {0.5 * constant_step(seed.omega0) + 0.5 * symmetrized_embedding(2)};
  seed.type = type;
  return seed;
}

Stated entangling_initial_state() {
  Matrixd rho(2, 2);
  rho << C(0.8), C(0.15, -0.1), C(0.15, 0.1), C(0.2);
  return Stated::from_density(rho);
}

QQSPSeed entangling_seed(ProcessType type) {
  QQSPSeed seed;
  seed.n = 2;
  seed.omega0 = entangling_initial_state();
  seed.step_maps = {0.5 * constant_step(Stated::maximally_mixed(2)) + 0.5 * entangling_step()};
  seed.type = type;
  return seed;
}

ClassicalQSP volterra(double a, const Eigen::VectorXd& x0, ProcessType type) {
  ClassicalQSP q;
  q.N = 2;
  q.step_tensors = {volterra_tensor(a)};
  q.x0 = x0;
  q.type = type;
  return q;
}

ClassicalQSP mendel(const Eigen::VectorXd& x0, ProcessType type) {
  ClassicalQSP q;
  q.N = 2;
  q.step_tensors = {mendel_tensor()};
  q.x0 = x0;
  q.type = type;
  return q;
}

ClassicalQSP identity_like(ProcessType type) { return volterra(0.0, Eigen::Vector2d(1.0, 0.0), type); }

}  // namespace qqsp::builtins
