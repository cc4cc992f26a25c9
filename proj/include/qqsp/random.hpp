// Seeded random states for ensembles and property tests.

#pragma once

#include "qqsp/algebra.hpp"

#include <cstdint>
#include <random>

namespace qqsp {

using Rng = std::mt19937_64;

template <typename Scalar>
Vector<Scalar> random_vector(Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = Complex<Scalar>(Scalar(re), Scalar(im));
  }
  return v.normalized();
}

template <typename Scalar>
Matrix<Scalar> random_matrix(Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix<Scalar> m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      m(i, j) = Complex<Scalar>(Scalar(re), Scalar(im));
    }
  return m;
}

template <typename Scalar>
Matrix<Scalar> random_hermitian(Index n, Rng& rng) {
  const Matrix<Scalar> g = random_matrix<Scalar>(n, rng);
  return (g + g.adjoint()) / Scalar(2);
}

/// Ginibre-induced density matrix of the given rank (full rank when rank <= 0).
template <typename Scalar>
State<Scalar> random_state(Index n, Rng& rng, Index rank = 0) {
  const Index k = rank <= 0 ? n : std::min(rank, n);
  Matrix<Scalar> g(n, k);
  for (Index j = 0; j < k; ++j) g.col(j) = random_vector<Scalar>(n, rng);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  for (Index j = 0; j < k; ++j) g.col(j) *= Scalar(uni(rng));
  Matrix<Scalar> rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()) / Scalar(2);
  return State<Scalar>::from_density(rho);
}

/// Random point of the probability simplex, returned as a diagonal state.
template <typename Scalar>
State<Scalar> random_diagonal_state(Index n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  RealVector<Scalar> w(n);
  for (Index i = 0; i < n; ++i) w(i) = Scalar(expo(rng));
  w /= w.sum();
  return State<Scalar>::diagonal(w);
}

}  // namespace qqsp
