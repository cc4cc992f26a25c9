// Named maps and seeds used by the built-in scenarios and the test suites.

#pragma once

#include "qqsp/classical.hpp"
#include "qqsp/process.hpp"

namespace qqsp::builtins {

/// x ↦ ω(x) 1 ⊗ 1.
SuperMapd constant_step(const Stated& omega);
/// x ↦ ½(x ⊗ 1 + 1 ⊗ x).
SuperMapd symmetrized_embedding(int n);
/// x ↦ x ⊗ 1 (not flip-symmetric).
SuperMapd left_embedding(int n);
/// x ↦ xᵀ ⊗ 1 (unital, positive, not completely positive).
SuperMapd transpose_embedding(int n);
/// x ↦ ½(V(x ⊗ 1)V† + U(V(x ⊗ 1)V†)) for the two-qubit gate V = CNOT·(Hadamard ⊗ 1).
SuperMapd entangling_step();

/// Constant process on M_n with the given state (maximally mixed by default).
QQSPSeed constant_seed(int n, ProcessType type);
/// n = 2, P = ½ constant(tr/2) + ½ symmetrized embedding, ω_0 = tr/2.
QQSPSeed mixed_seed(ProcessType type);
/// n = 2, P = ½ constant(tr/2) + ½ entangling_step, ω_0 a full-rank
/// non-diagonal state.
QQSPSeed entangling_seed(ProcessType type);

ClassicalQSP volterra(double a, const Eigen::VectorXd& x0, ProcessType type);
ClassicalQSP mendel(const Eigen::VectorXd& x0, ProcessType type);
/// Volterra a = 0 started at the vertex (1, 0): every Q^{s,t} is the identity.
ClassicalQSP identity_like(ProcessType type);

/// Initial state of the entangling seed.
Stated entangling_initial_state();

}  // namespace qqsp::builtins
