// Marginal processes of a quadratic process lattice.
//
//   Q^{s,t} = E_{ω_s} P^{s,t}                       on M_n
//   H^{s,t} = P^{s,t} E_{ω_t}   (type A)            on M_n ⊗ M_n
//   h^{s,t} = P^{s,t} E_{ω_t}   (type B)            on M_n ⊗ M_n
//   Z^{s,t} = E_{ω_s} H^{s,t}(·) ⊗ 1, z likewise
//
// Slice convention: a slice applied to the outputs of P, H or h (the left
// factor in Q, Z, z) is the usual E_ω(a ⊗ b) = ω(a) b. Those outputs are
// flip-symmetric, so the averaged leg does not matter there. A slice applied
// to an arbitrary input of M_n ⊗ M_n (the right factor of H and h, and the
// φ_t / ψ_t slices of the marginal axioms) averages the SECOND factor,
// E_ω(a ⊗ b) = ω(b) a. Only with that choice do H(x ⊗ 1) = P x,
// H(1 ⊗ x) = ω_t(x) 1 ⊗ 1 and H x = H(E_{ω_t}(x) ⊗ 1) hold together, and
// the process is recovered from H through P x = H(x ⊗ 1).

#pragma once

#include "qqsp/process.hpp"

#include <string>
#include <vector>

namespace qqsp {

enum class FamilyKind { Q, H, h, Z, z };

const char* to_string(FamilyKind kind);

/// The leg averaged by slices acting on arbitrary inputs of M_n ⊗ M_n.
inline constexpr Leg kMarginalSlice = Leg::second;

struct MarginalFamily {
  FamilyKind kind = FamilyKind::Q;
  int n = 0;
  AlgebraKind algebra = AlgebraKind::full;
  MapTable maps;
  std::vector<Stated> omegas;

  int horizon() const { return maps.horizon(); }
  const SuperMapd& map(int s, int t) const { return maps.at(s, t); }
};

MarginalFamily build_Q(const ProcessLattice& lattice);
MarginalFamily build_H(const ProcessLattice& lattice);
MarginalFamily build_h(const ProcessLattice& lattice);
MarginalFamily build_Z(const MarginalFamily& H);
MarginalFamily build_z(const MarginalFamily& h);

/// Plain Markov law F^{s,t} = F^{s,τ} F^{τ,t} at every admissible triple.
ResidualTable check_markov(const MarginalFamily& family);

/// h^{s,t} = (Q^{s,τ} ⊗ Q^{s,τ}) ∘ h^{τ,t} at every admissible triple.
ResidualTable check_hh_law(const MarginalFamily& h, const MarginalFamily& Q);

/// Composition law appropriate to the family: h^{s,t} = (Q^{s,τ} ⊗ Q^{s,τ}) h^{τ,t} for h, Markov otherwise.
ResidualTable check_composition(const MarginalFamily& family, const MarginalFamily& Q);

/// Maxima of the slice identities tying a lattice to its marginals.
struct SliceReport {
  double h_left_embedding = 0.0;   // H(x ⊗ 1) = P x
  double h_right_embedding = 0.0;  // H(1 ⊗ x) = ω_t(x) 1 ⊗ 1
  double z_left_embedding = 0.0;   // Z(x ⊗ 1) = Q x ⊗ 1
  double z_right_embedding = 0.0;  // Z(1 ⊗ x) = ω_t(x) 1 ⊗ 1
  double intertwining = 0.0;       // E_{ω_s} H = Q E_{ω_t}
  double q_from_p = 0.0;           // Q = E_{ω_s} P

  double max() const;
};

SliceReport slice_identities(const ProcessLattice& lattice, const MarginalFamily& Q, const MarginalFamily& H,
                             const MarginalFamily& Z);

struct AxiomReport {
  double flip = 0.0;          // (i)   U H = H
  double intertwining = 0.0;  // (ii)  E_{ψ_s} H^{s,t} = Q^{s,t} E_{φ_t}
  double absorption = 0.0;    // (iii) H^{s,t} x = H^{s,t}(E_{ψ_t}(x) ⊗ 1)
  double phi_psi = 0.0;       // max_t ‖φ_t − ψ_t‖₁

  double max() const;
  bool passes(double tol) const { return max() <= tol; }
};

/// φ_t(x) = ω_0(Q^{0,t} x); φ_0 = ω_0.
std::vector<Stated> phi_trajectory(const MarginalFamily& Q, const Stated& omega0);
/// ψ_t(x) = (ω_0 ⊗ ω_0)(H^{0,t}(x ⊗ 1)); ψ_0 = ω_0.
std::vector<Stated> psi_trajectory(const MarginalFamily& H, const Stated& omega0);

/// Checks conditions (i)–(iii) on an abstract pair (Q, H) or (Q, h).
AxiomReport verify_marginal_axioms(const MarginalFamily& Q, const MarginalFamily& H, const Stated& omega0);

class AxiomFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P^{s,t} x = H^{s,t}(x ⊗ 1). Strict mode requires the axiom suite to pass
/// at `tol` and throws AxiomFailure otherwise.
ProcessLattice reconstruct_qqsp(const MarginalFamily& Q, const MarginalFamily& H, const Stated& omega0,
                                ProcessType target, Mode mode = Mode::strict, double tol = 1e-10);

/// Max over s < t of ‖E_{ω_s} ∘ (Q^{s,t} ⊗ id) − E_{ω_t}‖, i.e. ω_s ∘ Q^{s,t} = ω_t.
double state_transport_residual(const MarginalFamily& Q);

/// Max over stored (s,t) of ‖A^{s,t} − B^{s,t}‖.
double max_map_deviation(const MapTable& a, const MapTable& b);

}  // namespace qqsp
