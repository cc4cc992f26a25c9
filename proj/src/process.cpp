#include "qqsp/process.hpp"

#include <algorithm>
#include <sstream>

namespace qqsp {

MapTable::MapTable(int horizon) : horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("MapTable: horizon must be at least 1");
  maps_.resize(static_cast<std::size_t>((horizon + 1) * (horizon + 1)));
}

std::size_t MapTable::slot(int s, int t) const {
  if (s < 0 || t > horizon_ || t - s < 1) {
    std::ostringstream msg;
    msg << "MapTable: (" << s << ", " << t << ") outside 0 <= s < t <= " << horizon_;
    throw std::out_of_range(msg.str());
  }
  return static_cast<std::size_t>(s * (horizon_ + 1) + t);
}

bool MapTable::contains(int s, int t) const {
  if (s < 0 || t > horizon_ || t - s < 1) return false;
  return maps_[slot(s, t)].has_value();
}

const SuperMapd& MapTable::at(int s, int t) const {
  const auto& m = maps_[slot(s, t)];
  if (!m) throw std::out_of_range("MapTable: entry not filled");
  return *m;
}

void MapTable::set(int s, int t, SuperMapd map) { maps_[slot(s, t)] = std::move(map); }

const SuperMapd& QQSPSeed::step(int k) const {
  if (step_maps.empty()) throw std::invalid_argument("QQSPSeed: no step maps");
  if (homogeneous) return step_maps.front();
  if (k < 0 || k >= static_cast<int>(step_maps.size())) throw std::out_of_range("QQSPSeed: step index out of range");
  return step_maps[static_cast<std::size_t>(k)];
}

std::optional<int> QQSPSeed::max_horizon() const {
  if (homogeneous) return std::nullopt;
  return static_cast<int>(step_maps.size());
}

SeedDiagnostics validate_seed(const QQSPSeed& seed, const Tolerances& tol) {
  SeedDiagnostics diag;
  if (seed.step_maps.empty()) {
    diag.issues.emplace_back("seed has no step maps");
    return diag;
  }
  if (seed.omega0.dim() != seed.n) diag.issues.emplace_back("initial state dimension differs from n");
  for (std::size_t k = 0; k < seed.step_maps.size(); ++k) {
    const SuperMapd& p = seed.step_maps[k];
    if (p.in_dim() != seed.n || p.out_dim() != seed.n * seed.n) {
      diag.issues.push_back("step " + std::to_string(k) + ": map is not M_n -> M_n (x) M_n");
      continue;
    }
    StepCheck check;
    check.k = static_cast<int>(k);
    check.choi = certify_unital_cp(p, tol.cp, tol.unital);
    check.flip_residual = flip_residual(p);
    if (!check.choi.is_cp)
      diag.issues.push_back("step " + std::to_string(k) + ": not completely positive (min Choi eigenvalue " +
                            std::to_string(check.choi.min_choi_eigenvalue) + ")");
    if (!check.choi.is_unital)
      diag.issues.push_back("step " + std::to_string(k) + ": not unital (residual " +
                            std::to_string(check.choi.unitality_residual) + ")");
    if (check.flip_residual > tol.identity)
      diag.issues.push_back("step " + std::to_string(k) + ": not flip-symmetric (residual " +
                            std::to_string(check.flip_residual) + ")");
    diag.steps.push_back(check);
  }
  return diag;
}

ProcessLattice::ProcessLattice(int n, ProcessType type, AlgebraKind kind, MapTable maps, std::vector<Stated> omegas)
    : n_(n), type_(type), kind_(kind), maps_(std::move(maps)), omegas_(std::move(omegas)) {}

Stated evolve_state(const SuperMapd& p0t, const Stated& omega0) {
  return pull_back(p0t, tensor(omega0, omega0));
}

ProcessLattice ProcessLattice::from_maps(ProcessType type, AlgebraKind kind, MapTable maps, const Stated& omega0) {
  const int horizon = maps.horizon();
  const int n = static_cast<int>(omega0.dim());
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 1; t <= horizon; ++t) {
      const SuperMapd& m = maps.at(s, t);
      if (m.in_dim() != n || m.out_dim() != n * n)
        throw DimensionError("ProcessLattice: map dimensions do not match the initial state");
    }
  std::vector<Stated> omegas{omega0};
  for (int t = 1; t <= horizon; ++t) omegas.push_back(evolve_state(maps.at(0, t), omega0));
  return ProcessLattice(n, type, kind, std::move(maps), std::move(omegas));
}

namespace {

void check_propagation_input(const QQSPSeed& seed, int horizon, Mode mode, const Tolerances& tol) {
  if (horizon < 1) throw std::invalid_argument("propagate: horizon must be at least 1");
  if (auto cap = seed.max_horizon(); cap && horizon > *cap)
    throw std::invalid_argument("propagate: horizon exceeds the number of step maps");
  if (mode == Mode::strict) {
    const SeedDiagnostics diag = validate_seed(seed, tol);
    if (!diag.ok()) throw SeedValidationError("seed validation failed: " + diag.issues.front());
  }
}

}  // namespace

ProcessLattice propagate_type_A(const QQSPSeed& seed, int horizon, Mode mode, const Tolerances& tol) {
  check_propagation_input(seed, horizon, mode, tol);
  MapTable maps(horizon);
  std::vector<Stated> omegas{seed.omega0};
  for (int t = 1; t <= horizon; ++t) {
    const SuperMapd& step = seed.step(t - 1);
    maps.set(t - 1, t, step);
    if (t >= 2) {
      const SuperMapd averaged = conditional_expectation_map(omegas[static_cast<std::size_t>(t - 1)]) * step;
      for (int s = t - 2; s >= 0; --s) maps.set(s, t, maps.at(s, t - 1) * averaged);
    }
    omegas.push_back(evolve_state(maps.at(0, t), seed.omega0));
  }
  return ProcessLattice(seed.n, ProcessType::A, seed.kind, std::move(maps), std::move(omegas));
}

ProcessLattice propagate_type_B(const QQSPSeed& seed, int horizon, Mode mode, const Tolerances& tol) {
  check_propagation_input(seed, horizon, mode, tol);
  MapTable maps(horizon);
  std::vector<Stated> omegas{seed.omega0};
  std::vector<SuperMapd> slices;  // E_{ω_s} for s < t
  for (int t = 1; t <= horizon; ++t) {
    slices.push_back(conditional_expectation_map(omegas[static_cast<std::size_t>(t - 1)]));
    const SuperMapd& step = seed.step(t - 1);
    maps.set(t - 1, t, step);
    for (int s = t - 2; s >= 0; --s) {
      const SuperMapd q = slices[static_cast<std::size_t>(s)] * maps.at(s, t - 1);
      maps.set(s, t, tensor(q, q) * step);
    }
    omegas.push_back(evolve_state(maps.at(0, t), seed.omega0));
  }
  return ProcessLattice(seed.n, ProcessType::B, seed.kind, std::move(maps), std::move(omegas));
}

ProcessLattice propagate(const QQSPSeed& seed, int horizon, Mode mode, const Tolerances& tol) {
  return seed.type == ProcessType::A ? propagate_type_A(seed, horizon, mode, tol)
                                     : propagate_type_B(seed, horizon, mode, tol);
}

double ResidualTable::max() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.residual);
  return m;
}

double ResidualTable::at(int s, int tau, int t) const {
  for (const auto& r : rows)
    if (r.s == s && r.tau == tau && r.t == t) return r.residual;
  throw std::out_of_range("ResidualTable: triple not present");
}

ResidualTable kc_consistency(const ProcessLattice& lattice) {
  ResidualTable table;
  const int horizon = lattice.horizon();
  std::vector<SuperMapd> slices;
  for (int t = 0; t <= horizon; ++t) slices.push_back(conditional_expectation_map(lattice.omega(t)));
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 2; t <= horizon; ++t)
      for (int tau = s + 1; tau < t; ++tau) {
        SuperMapd rhs = lattice.type() == ProcessType::A
                            ? lattice.map(s, tau) * slices[static_cast<std::size_t>(tau)] * lattice.map(tau, t)
                            : [&] {
                                const SuperMapd q = slices[static_cast<std::size_t>(s)] * lattice.map(s, tau);
                                return tensor(q, q) * lattice.map(tau, t);
                              }();
        table.rows.push_back({s, tau, t, distance(lattice.map(s, t), rhs)});
      }
  return table;
}

Stated interact_states(const ProcessLattice& lattice, const Stated& phi, const Stated& psi, int s, int t) {
  if (s < 0 || t > lattice.horizon() || t - s < 1)
    throw std::out_of_range("interact_states: times outside the lattice");
  if (phi.dim() != lattice.n() || psi.dim() != lattice.n())
    throw DimensionError("interact_states: states must live on M_n");
  return pull_back(lattice.map(s, t), tensor(phi, psi));
}

}  // namespace qqsp
