// Quadratic process lattices on M_n: seeds, propagation under the type-A and
// type-B fundamental equations, the ω-trajectory, Kolmogorov–Chapman
// diagnostics and the interaction of states.
//
// Time is the integer lattice 0..T with minimal gap 1. Propagation fills
// P^{s,t} with the split fixed at τ = t−1; other splits are measured by
// kc_consistency, never assumed.

#pragma once

#include "qqsp/algebra.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qqsp {

using Matrixd = Matrix<double>;
using Vectord = Vector<double>;
using Stated = State<double>;
using SuperMapd = SuperMap<double>;
using ChoiReportd = ChoiReport<double>;

enum class ProcessType { A, B };
enum class Mode { strict, permissive };

inline const char* to_string(ProcessType type) { return type == ProcessType::A ? "A" : "B"; }

class SeedValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Table of maps F^{s,t} for integer 0 <= s < t <= T.
class MapTable {
 public:
  MapTable() = default;
  explicit MapTable(int horizon);

  int horizon() const { return horizon_; }
  bool contains(int s, int t) const;
  const SuperMapd& at(int s, int t) const;
  void set(int s, int t, SuperMapd map);

 private:
  std::size_t slot(int s, int t) const;

  int horizon_ = 0;
  std::vector<std::optional<SuperMapd>> maps_;
};

struct QQSPSeed {
  int n = 0;
  AlgebraKind kind = AlgebraKind::full;
  /// P^{k,k+1}: M_n → M_n ⊗ M_n. A homogeneous seed holds a single map.
  std::vector<SuperMapd> step_maps;
  Stated omega0 = Stated::maximally_mixed(1);
  ProcessType type = ProcessType::A;
  bool homogeneous = true;

  const SuperMapd& step(int k) const;
  /// Largest horizon the seed can drive (unbounded for homogeneous seeds).
  std::optional<int> max_horizon() const;
};

struct StepCheck {
  int k = 0;
  ChoiReportd choi;
  double flip_residual = 0.0;
};

struct SeedDiagnostics {
  std::vector<StepCheck> steps;
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

SeedDiagnostics validate_seed(const QQSPSeed& seed, const Tolerances& tol = {});

class ProcessLattice {
 public:
  /// Wraps an explicit family; ω_t is recomputed from P^{0,t} and ω_0.
  static ProcessLattice from_maps(ProcessType type, AlgebraKind kind, MapTable maps, const Stated& omega0);

  int n() const { return n_; }
  int horizon() const { return maps_.horizon(); }
  ProcessType type() const { return type_; }
  AlgebraKind kind() const { return kind_; }
  const MapTable& maps() const { return maps_; }
  const SuperMapd& map(int s, int t) const { return maps_.at(s, t); }
  const std::vector<Stated>& omegas() const { return omegas_; }
  const Stated& omega(int t) const { return omegas_.at(static_cast<std::size_t>(t)); }

 private:
  friend ProcessLattice propagate_type_A(const QQSPSeed&, int, Mode, const Tolerances&);
  friend ProcessLattice propagate_type_B(const QQSPSeed&, int, Mode, const Tolerances&);

  ProcessLattice(int n, ProcessType type, AlgebraKind kind, MapTable maps, std::vector<Stated> omegas);

  int n_;
  ProcessType type_;
  AlgebraKind kind_;
  MapTable maps_;
  std::vector<Stated> omegas_;
};

/// ω_t(x) = (ω_0 ⊗ ω_0)(P^{0,t} x).
Stated evolve_state(const SuperMapd& p0t, const Stated& omega0);

/// P^{s,t} = P^{s,t−1} ∘ E_{ω_{t−1}} ∘ P^{t−1,t}.
ProcessLattice propagate_type_A(const QQSPSeed& seed, int horizon, Mode mode = Mode::strict,
                                const Tolerances& tol = {});

/// P^{s,t} = (E_{ω_s} P^{s,t−1}) ⊗ (E_{ω_s} P^{s,t−1}) ∘ P^{t−1,t}.
ProcessLattice propagate_type_B(const QQSPSeed& seed, int horizon, Mode mode = Mode::strict,
                                const Tolerances& tol = {});

ProcessLattice propagate(const QQSPSeed& seed, int horizon, Mode mode = Mode::strict, const Tolerances& tol = {});

struct TripleResidual {
  int s = 0;
  int tau = 0;
  int t = 0;
  double residual = 0.0;
};

struct ResidualTable {
  std::vector<TripleResidual> rows;

  double max() const;
  /// Residual of one triple; throws std::out_of_range if absent.
  double at(int s, int tau, int t) const;
};

/// Residual of the lattice's fundamental equation at every split s < τ < t.
ResidualTable kc_consistency(const ProcessLattice& lattice);

/// V^{s,t}(φ, ψ)(x) = (φ ⊗ ψ)(P^{s,t} x).
Stated interact_states(const ProcessLattice& lattice, const Stated& phi, const Stated& psi, int s, int t);

}  // namespace qqsp
