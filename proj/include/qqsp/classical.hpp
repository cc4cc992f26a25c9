// Classical quadratic stochastic processes on the finite simplex and their
// exact correspondence with q.q.s.p. on the diagonal algebra:
//
//   (P^{s,t} f)(i,j) = Σ_k f_k p^{[s,t]}_{ij,k},   p^{[s,t]}_{ij,k} = P^{s,t}(χ_k)(i,j).

#pragma once

#include "qqsp/process.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qqsp {

/// Dense cubic tensor p_{ij,k}, row-major with k fastest.
class CubicTensor {
 public:
  CubicTensor() = default;
  explicit CubicTensor(int N);
  static CubicTensor from_row_major(int N, std::span<const double> values);

  int size() const { return N_; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  const std::vector<double>& data() const { return data_; }

  /// The N² × N matrix with row i*N + j holding p_{ij,·}.
  Eigen::MatrixXd as_matrix() const;
  static CubicTensor from_matrix(const Eigen::MatrixXd& m);

  friend bool operator==(const CubicTensor&, const CubicTensor&) = default;

 private:
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>((i * N_ + j) * N_ + k);
  }

  int N_ = 0;
  std::vector<double> data_;
};

/// Point of the simplex; weights ≥ −1e-14, Σ = 1 within 1e-12.
class Distribution {
 public:
  explicit Distribution(Eigen::VectorXd weights);

  int size() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::VectorXd weights_;
};

struct ClassicalStepCheck {
  int k = 0;
  double symmetry_residual = 0.0;       // max |p_{ij,k} − p_{ji,k}|
  double stochasticity_residual = 0.0;  // max |Σ_k p_{ij,k} − 1|
  double min_entry = 0.0;
};

struct ClassicalDiagnostics {
  std::vector<ClassicalStepCheck> steps;
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

struct ClassicalQSP {
  int N = 0;
  std::vector<CubicTensor> step_tensors;
  bool homogeneous = true;
  Eigen::VectorXd x0;
  ProcessType type = ProcessType::A;

  // Filled by classical_propagate.
  int horizon = 0;
  std::vector<std::optional<CubicTensor>> lattice;  // slot s*(horizon+1)+t
  std::vector<Eigen::VectorXd> trajectory;          // x^{(t)}, t = 0..horizon

  const CubicTensor& step(int k) const;
  const CubicTensor& tensor(int s, int t) const;
};

ClassicalDiagnostics classical_validate(const ClassicalQSP& q, double tol = 1e-12);

/// Fills p^{[s,t]} with the split r = t−1 and the trajectory
/// x^{(t)}_k = Σ_ij p^{[0,t]}_{ij,k} x^{(0)}_i x^{(0)}_j.
ClassicalQSP classical_propagate(const ClassicalQSP& q, int horizon, Mode mode = Mode::strict, double tol = 1e-12);

/// One quadratic step x'_k = Σ_ij p_{ij,k} x_i x_j.
Eigen::VectorXd quadratic_step(const CubicTensor& p, const Eigen::VectorXd& x);

/// Diagonal-algebra seed. Each step map pinches its input to the diagonal and
/// sends diag(f) to Σ_ij (Σ_k f_k p_{ij,k}) E_ii ⊗ E_jj.
QQSPSeed lift_to_quantum(const ClassicalQSP& q, double tol = 1e-12);

SuperMapd lift_tensor(const CubicTensor& p);

class NotDiagonalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reads p^{[s,t]}_{ij,k} = P^{s,t}(E_kk)((i,j),(i,j)) from every lattice map.
ClassicalQSP project_to_classical(const ProcessLattice& lattice, double tol = 1e-12);

CubicTensor project_map(const SuperMapd& map, double tol = 1e-12);

/// p_{11,1} = 1, p_{12,1} = p_{21,1} = a, p_{22,1} = 0, complements for k = 2.
CubicTensor volterra_tensor(double a);
/// Mendelian inheritance on two types: p_{ij,k} = ½(δ_ik + δ_jk).
CubicTensor mendel_tensor();
/// Constant tensor p_{ij,k} = w_k.
CubicTensor constant_tensor(const Eigen::VectorXd& w);

}  // namespace qqsp
