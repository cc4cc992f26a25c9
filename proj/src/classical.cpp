#include "qqsp/classical.hpp"

#include <algorithm>
#include <cmath>

namespace qqsp {

CubicTensor::CubicTensor(int N) : N_(N), data_(static_cast<std::size_t>(N * N * N), 0.0) {
  if (N < 1) throw std::invalid_argument("CubicTensor: N must be positive");
}

CubicTensor CubicTensor::from_row_major(int N, std::span<const double> values) {
  CubicTensor p(N);
  if (values.size() != p.data_.size())
    throw DimensionError("CubicTensor: expected " + std::to_string(p.data_.size()) + " entries, got " +
                         std::to_string(values.size()));
  std::copy(values.begin(), values.end(), p.data_.begin());
  return p;
}

Eigen::MatrixXd CubicTensor::as_matrix() const {
  Eigen::MatrixXd m(N_ * N_, N_);
  for (int i = 0; i < N_; ++i)
    for (int j = 0; j < N_; ++j)
      for (int k = 0; k < N_; ++k) m(i * N_ + j, k) = (*this)(i, j, k);
  return m;
}

CubicTensor CubicTensor::from_matrix(const Eigen::MatrixXd& m) {
  const int N = static_cast<int>(m.cols());
  if (m.rows() != static_cast<Index>(N) * N) throw DimensionError("CubicTensor::from_matrix: shape is not N^2 x N");
  CubicTensor p(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) p(i, j, k) = m(i * N + j, k);
  return p;
}

Distribution::Distribution(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw DimensionError("Distribution: empty weight vector");
  if (weights_.minCoeff() < -1e-14) throw std::invalid_argument("Distribution: negative weight");
  if (std::abs(weights_.sum() - 1.0) > 1e-12) throw std::invalid_argument("Distribution: weights do not sum to one");
}

const CubicTensor& ClassicalQSP::step(int k) const {
  if (step_tensors.empty()) throw std::invalid_argument("ClassicalQSP: no step tensors");
  if (homogeneous) return step_tensors.front();
  if (k < 0 || k >= static_cast<int>(step_tensors.size())) throw std::out_of_range("ClassicalQSP: step out of range");
  return step_tensors[static_cast<std::size_t>(k)];
}

const CubicTensor& ClassicalQSP::tensor(int s, int t) const {
  if (s < 0 || t > horizon || t - s < 1) throw std::out_of_range("ClassicalQSP: (s, t) outside the lattice");
  const auto& p = lattice.at(static_cast<std::size_t>(s * (horizon + 1) + t));
  if (!p) throw std::out_of_range("ClassicalQSP: lattice not filled");
  return *p;
}

ClassicalDiagnostics classical_validate(const ClassicalQSP& q, double tol) {
  ClassicalDiagnostics diag;
  if (q.step_tensors.empty()) diag.issues.emplace_back("no step tensors");
  if (q.x0.size() != q.N) {
    diag.issues.emplace_back("initial distribution has the wrong length");
  } else {
    try {
      Distribution d(q.x0);
    } catch (const std::invalid_argument& e) {
      diag.issues.emplace_back(std::string("initial distribution: ") + e.what());
    }
  }
  for (std::size_t idx = 0; idx < q.step_tensors.size(); ++idx) {
    const CubicTensor& p = q.step_tensors[idx];
    if (p.size() != q.N) {
      diag.issues.push_back("step " + std::to_string(idx) + ": tensor size differs from N");
      continue;
    }
    ClassicalStepCheck c;
    c.k = static_cast<int>(idx);
    c.min_entry = *std::min_element(p.data().begin(), p.data().end());
    for (int i = 0; i < q.N; ++i)
      for (int j = 0; j < q.N; ++j) {
        double row = 0.0;
        for (int k = 0; k < q.N; ++k) {
          c.symmetry_residual = std::max(c.symmetry_residual, std::abs(p(i, j, k) - p(j, i, k)));
          row += p(i, j, k);
        }
        c.stochasticity_residual = std::max(c.stochasticity_residual, std::abs(row - 1.0));
      }
    const std::string tag = "step " + std::to_string(idx) + ": ";
    if (c.symmetry_residual > tol) diag.issues.push_back(tag + "p_{ij,k} != p_{ji,k}");
    if (c.min_entry < -1e-14) diag.issues.push_back(tag + "negative entry");
    if (c.stochasticity_residual > tol) diag.issues.push_back(tag + "rows do not sum to one");
    diag.steps.push_back(c);
  }
  return diag;
}

Eigen::VectorXd quadratic_step(const CubicTensor& p, const Eigen::VectorXd& x) {
  const Eigen::VectorXd pair = kron(x, x);
  return p.as_matrix().transpose() * pair;
}

ClassicalQSP classical_propagate(const ClassicalQSP& q, int horizon, Mode mode, double tol) {
  if (horizon < 1) throw std::invalid_argument("classical_propagate: horizon must be at least 1");
  if (!q.homogeneous && horizon > static_cast<int>(q.step_tensors.size()))
    throw std::invalid_argument("classical_propagate: horizon exceeds the number of step tensors");
  if (mode == Mode::strict) {
    const ClassicalDiagnostics diag = classical_validate(q, tol);
    if (!diag.ok()) throw SeedValidationError("classical seed invalid: " + diag.issues.front());
  }

  ClassicalQSP out = q;
  out.horizon = horizon;
  out.lattice.assign(static_cast<std::size_t>((horizon + 1) * (horizon + 1)), std::nullopt);
  auto slot = [&](int s, int t) -> std::optional<CubicTensor>& {
    return out.lattice[static_cast<std::size_t>(s * (horizon + 1) + t)];
  };
  const Eigen::VectorXd pair0 = kron(q.x0, q.x0);
  out.trajectory.assign(1, q.x0);

  // Matrix form: row (i,j) of P^{s,t} is p^{[s,t]}_{ij,·}.
  std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>((horizon + 1) * (horizon + 1)));
  auto mat = [&](int s, int t) -> Eigen::MatrixXd& { return mats[static_cast<std::size_t>(s * (horizon + 1) + t)]; };
  const int N = q.N;

  for (int t = 1; t <= horizon; ++t) {
    const Eigen::MatrixXd step = q.step(t - 1).as_matrix();
    mat(t - 1, t) = step;
    if (q.type == ProcessType::A) {
      // p^{[s,t]}_{ij,k} = Σ_m p^{[s,t-1]}_{ij,m} Σ_l p^{[t-1,t]}_{ml,k} x^{(t-1)}_l
      const Eigen::VectorXd& xr = out.trajectory[static_cast<std::size_t>(t - 1)];
      Eigen::MatrixXd averaged = Eigen::MatrixXd::Zero(N, N);
      for (int m = 0; m < N; ++m) averaged.row(m) = xr.transpose() * step.middleRows(m * N, N);
      for (int s = t - 2; s >= 0; --s) mat(s, t) = mat(s, t - 1) * averaged;
    } else {
      // p^{[s,t]}_{ij,k} = Σ_{lh} q_{il} q_{jh} p^{[t-1,t]}_{lh,k}, q_{il} = Σ_m x^{(s)}_m p^{[s,t-1]}_{im,l}
      for (int s = t - 2; s >= 0; --s) {
        const Eigen::VectorXd& xs = out.trajectory[static_cast<std::size_t>(s)];
        const Eigen::MatrixXd& prev = mat(s, t - 1);
        Eigen::MatrixXd marginal(N, N);
        for (int i = 0; i < N; ++i) marginal.row(i) = xs.transpose() * prev.middleRows(i * N, N);
        mat(s, t) = kron(marginal, marginal) * step;
      }
    }
    out.trajectory.push_back(mat(0, t).transpose() * pair0);
  }
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 1; t <= horizon; ++t) slot(s, t) = CubicTensor::from_matrix(mat(s, t));
  return out;
}

SuperMapd lift_tensor(const CubicTensor& p) {
  const int N = p.size();
  const Index out = static_cast<Index>(N) * N;
  Matrixd m = Matrixd::Zero(out * out, static_cast<Index>(N) * N);
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const Index d = i * N + j;
        m(d + d * out, k + k * N) = p(i, j, k);
      }
  return SuperMapd(N, out, std::move(m));
}

QQSPSeed lift_to_quantum(const ClassicalQSP& q, double tol) {
  const ClassicalDiagnostics diag = classical_validate(q, tol);
  if (!diag.ok()) throw SeedValidationError("lift_to_quantum: " + diag.issues.front());
  QQSPSeed seed;
  seed.n = q.N;
  seed.kind = AlgebraKind::diagonal;
  seed.homogeneous = q.homogeneous;
  seed.type = q.type;
  for (const auto& p : q.step_tensors) seed.step_maps.push_back(lift_tensor(p));
  seed.omega0 = Stated::diagonal(q.x0);
  return seed;
}

CubicTensor project_map(const SuperMapd& map, double tol) {
  const int N = static_cast<int>(map.in_dim());
  if (map.out_dim() != static_cast<Index>(N) * N) throw DimensionError("project_map: map is not M_N -> M_N (x) M_N");
  CubicTensor p(N);
  for (int k = 0; k < N; ++k) {
    const Matrixd y = map(matrix_unit<double>(N, k, k));
    const Matrixd off = y - Matrixd(y.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > tol) throw NotDiagonalError("project_map: map does not preserve the diagonal algebra");
    if (y.diagonal().imag().cwiseAbs().maxCoeff() > tol) throw NotDiagonalError("project_map: complex diagonal output");
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) p(i, j, k) = y(i * N + j, i * N + j).real();
  }
  return p;
}

ClassicalQSP project_to_classical(const ProcessLattice& lattice, double tol) {
  const int horizon = lattice.horizon();
  ClassicalQSP q;
  q.N = lattice.n();
  q.type = lattice.type();
  q.homogeneous = false;
  const Matrixd& rho0 = lattice.omega(0).density();
  if ((rho0 - Matrixd(rho0.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > tol)
    throw NotDiagonalError("project_to_classical: initial state is not diagonal");
  q.x0 = rho0.diagonal().real();
  for (int k = 0; k < horizon; ++k) q.step_tensors.push_back(project_map(lattice.map(k, k + 1), tol));
  q.horizon = horizon;
  q.lattice.assign(static_cast<std::size_t>((horizon + 1) * (horizon + 1)), std::nullopt);
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 1; t <= horizon; ++t)
      q.lattice[static_cast<std::size_t>(s * (horizon + 1) + t)] = project_map(lattice.map(s, t), tol);
  for (int t = 0; t <= horizon; ++t) q.trajectory.push_back(lattice.omega(t).density().diagonal().real());
  return q;
}

CubicTensor volterra_tensor(double a) {
  if (a < 0.0 || a > 1.0) throw std::invalid_argument("volterra_tensor: a must lie in [0, 1]");
  CubicTensor p(2);
  p(0, 0, 0) = 1.0;
  p(0, 1, 0) = p(1, 0, 0) = a;
  p(1, 1, 0) = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) p(i, j, 1) = 1.0 - p(i, j, 0);
  return p;
}

CubicTensor mendel_tensor() {
  CubicTensor p(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) p(i, j, k) = 0.5 * ((i == k ? 1.0 : 0.0) + (j == k ? 1.0 : 0.0));
  return p;
}

CubicTensor constant_tensor(const Eigen::VectorXd& w) {
  const int N = static_cast<int>(w.size());
  CubicTensor p(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) p(i, j, k) = w(k);
  return p;
}

}  // namespace qqsp
