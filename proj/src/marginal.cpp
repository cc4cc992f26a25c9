#include "qqsp/marginal.hpp"

#include <algorithm>

namespace qqsp {

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Q: return "Q";
    case FamilyKind::H: return "H";
    case FamilyKind::h: return "h";
    case FamilyKind::Z: return "Z";
    case FamilyKind::z: return "z";
  }
  return "?";
}

namespace {

std::vector<SuperMapd> slices_for(const std::vector<Stated>& omegas, Leg leg) {
  std::vector<SuperMapd> out;
  out.reserve(omegas.size());
  for (const auto& w : omegas) out.push_back(conditional_expectation_map(w, leg));
  return out;
}

MarginalFamily make_family(FamilyKind kind, const ProcessLattice& lattice) {
  MarginalFamily f;
  f.kind = kind;
  f.n = lattice.n();
  f.algebra = lattice.kind();
  f.maps = MapTable(lattice.horizon());
  f.omegas = lattice.omegas();
  return f;
}

MarginalFamily build_pair_process(FamilyKind kind, const ProcessLattice& lattice) {
  MarginalFamily f = make_family(kind, lattice);
  const auto slices = slices_for(lattice.omegas(), kMarginalSlice);
  for (int s = 0; s < lattice.horizon(); ++s)
    for (int t = s + 1; t <= lattice.horizon(); ++t)
      f.maps.set(s, t, lattice.map(s, t) * slices[static_cast<std::size_t>(t)]);
  return f;
}

MarginalFamily build_lifted(FamilyKind kind, const MarginalFamily& source) {
  MarginalFamily f;
  f.kind = kind;
  f.n = source.n;
  f.algebra = source.algebra;
  f.maps = MapTable(source.horizon());
  f.omegas = source.omegas;
  const SuperMapd embed = embedding_map<double>(source.n, Leg::first);
  const auto slices = slices_for(source.omegas, Leg::first);
  for (int s = 0; s < source.horizon(); ++s)
    for (int t = s + 1; t <= source.horizon(); ++t)
      f.maps.set(s, t, embed * slices[static_cast<std::size_t>(s)] * source.map(s, t));
  return f;
}

void require_same_lattice(const MarginalFamily& a, const MarginalFamily& b) {
  if (a.n != b.n || a.horizon() != b.horizon())
    throw DimensionError("marginal families live on different lattices");
}

}  // namespace

MarginalFamily build_Q(const ProcessLattice& lattice) {
  MarginalFamily f = make_family(FamilyKind::Q, lattice);
  const auto slices = slices_for(lattice.omegas(), Leg::first);
  for (int s = 0; s < lattice.horizon(); ++s)
    for (int t = s + 1; t <= lattice.horizon(); ++t)
      f.maps.set(s, t, slices[static_cast<std::size_t>(s)] * lattice.map(s, t));
  return f;
}

MarginalFamily build_H(const ProcessLattice& lattice) {
  if (lattice.type() != ProcessType::A) throw std::invalid_argument("build_H: lattice is not of type A");
  return build_pair_process(FamilyKind::H, lattice);
}

MarginalFamily build_h(const ProcessLattice& lattice) {
  if (lattice.type() != ProcessType::B) throw std::invalid_argument("build_h: lattice is not of type B");
  return build_pair_process(FamilyKind::h, lattice);
}

MarginalFamily build_Z(const MarginalFamily& H) {
  if (H.kind != FamilyKind::H) throw std::invalid_argument("build_Z: input family is not H");
  return build_lifted(FamilyKind::Z, H);
}

MarginalFamily build_z(const MarginalFamily& h) {
  if (h.kind != FamilyKind::h) throw std::invalid_argument("build_z: input family is not h");
  return build_lifted(FamilyKind::z, h);
}

ResidualTable check_markov(const MarginalFamily& family) {
  ResidualTable table;
  const int horizon = family.horizon();
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 2; t <= horizon; ++t)
      for (int tau = s + 1; tau < t; ++tau)
        table.rows.push_back({s, tau, t, distance(family.map(s, t), family.map(s, tau) * family.map(tau, t))});
  return table;
}

ResidualTable check_hh_law(const MarginalFamily& h, const MarginalFamily& Q) {
  require_same_lattice(h, Q);
  ResidualTable table;
  const int horizon = h.horizon();
  for (int s = 0; s < horizon; ++s)
    for (int t = s + 2; t <= horizon; ++t)
      for (int tau = s + 1; tau < t; ++tau) {
        const SuperMapd& q = Q.map(s, tau);
        table.rows.push_back({s, tau, t, distance(h.map(s, t), tensor(q, q) * h.map(tau, t))});
      }
  return table;
}

ResidualTable check_composition(const MarginalFamily& family, const MarginalFamily& Q) {
  return family.kind == FamilyKind::h ? check_hh_law(family, Q) : check_markov(family);
}

double SliceReport::max() const {
  return std::max({h_left_embedding, h_right_embedding, z_left_embedding, z_right_embedding, intertwining,
                   q_from_p});
}

SliceReport slice_identities(const ProcessLattice& lattice, const MarginalFamily& Q, const MarginalFamily& H,
                             const MarginalFamily& Z) {
  require_same_lattice(Q, H);
  require_same_lattice(Q, Z);
  const int n = lattice.n();
  const SuperMapd left = embedding_map<double>(n, Leg::first);
  const SuperMapd right = embedding_map<double>(n, Leg::second);
  const auto first_slices = slices_for(lattice.omegas(), Leg::first);
  const auto marginal_slices = slices_for(lattice.omegas(), kMarginalSlice);

  SliceReport r;
  for (int s = 0; s < lattice.horizon(); ++s)
    for (int t = s + 1; t <= lattice.horizon(); ++t) {
      const SuperMapd& p = lattice.map(s, t);
      const SuperMapd scalar_t = constant_map(lattice.omega(t), n * n);
      r.h_left_embedding = std::max(r.h_left_embedding, distance(H.map(s, t) * left, p));
      r.h_right_embedding = std::max(r.h_right_embedding, distance(H.map(s, t) * right, scalar_t));
      r.z_left_embedding = std::max(r.z_left_embedding, distance(Z.map(s, t) * left, left * Q.map(s, t)));
      r.z_right_embedding = std::max(r.z_right_embedding, distance(Z.map(s, t) * right, scalar_t));
      r.intertwining =
          std::max(r.intertwining, distance(first_slices[static_cast<std::size_t>(s)] * H.map(s, t),
                                            Q.map(s, t) * marginal_slices[static_cast<std::size_t>(t)]));
      r.q_from_p = std::max(r.q_from_p, distance(Q.map(s, t), first_slices[static_cast<std::size_t>(s)] * p));
    }
  return r;
}

double AxiomReport::max() const { return std::max({flip, intertwining, absorption, phi_psi}); }

std::vector<Stated> phi_trajectory(const MarginalFamily& Q, const Stated& omega0) {
  std::vector<Stated> out{omega0};
  for (int t = 1; t <= Q.horizon(); ++t) out.push_back(pull_back(Q.map(0, t), omega0));
  return out;
}

std::vector<Stated> psi_trajectory(const MarginalFamily& H, const Stated& omega0) {
  const SuperMapd left = embedding_map<double>(H.n, Leg::first);
  const Stated pair = tensor(omega0, omega0);
  std::vector<Stated> out{omega0};
  for (int t = 1; t <= H.horizon(); ++t) out.push_back(pull_back(H.map(0, t) * left, pair));
  return out;
}

AxiomReport verify_marginal_axioms(const MarginalFamily& Q, const MarginalFamily& H, const Stated& omega0) {
  require_same_lattice(Q, H);
  if (omega0.dim() != Q.n) throw DimensionError("verify_marginal_axioms: initial state dimension mismatch");
  const int n = Q.n;
  const auto phis = phi_trajectory(Q, omega0);
  const auto psis = psi_trajectory(H, omega0);
  const auto phi_slices = slices_for(phis, kMarginalSlice);
  const auto psi_left = slices_for(psis, Leg::first);
  const auto psi_slices = slices_for(psis, kMarginalSlice);
  const SuperMapd flip = flip_map<double>(n);
  const SuperMapd left = embedding_map<double>(n, Leg::first);

  AxiomReport r;
  for (int s = 0; s < Q.horizon(); ++s)
    for (int t = s + 1; t <= Q.horizon(); ++t) {
      const SuperMapd& h = H.map(s, t);
      r.flip = std::max(r.flip, distance(flip * h, h));
      r.intertwining = std::max(r.intertwining, distance(psi_left[static_cast<std::size_t>(s)] * h,
                                                         Q.map(s, t) * phi_slices[static_cast<std::size_t>(t)]));
      r.absorption = std::max(r.absorption, distance(h, h * left * psi_slices[static_cast<std::size_t>(t)]));
    }
  for (std::size_t t = 0; t < phis.size(); ++t) r.phi_psi = std::max(r.phi_psi, trace_norm_distance(phis[t], psis[t]));
  return r;
}

ProcessLattice reconstruct_qqsp(const MarginalFamily& Q, const MarginalFamily& H, const Stated& omega0,
                                ProcessType target, Mode mode, double tol) {
  require_same_lattice(Q, H);
  if (mode == Mode::strict) {
    const AxiomReport axioms = verify_marginal_axioms(Q, H, omega0);
    if (!axioms.passes(tol))
      throw AxiomFailure("reconstruct_qqsp: marginal axioms fail (max residual " + std::to_string(axioms.max()) + ")");
  }
  const SuperMapd left = embedding_map<double>(H.n, Leg::first);
  MapTable maps(H.horizon());
  for (int s = 0; s < H.horizon(); ++s)
    for (int t = s + 1; t <= H.horizon(); ++t) maps.set(s, t, H.map(s, t) * left);
  return ProcessLattice::from_maps(target, H.algebra, std::move(maps), omega0);
}

double state_transport_residual(const MarginalFamily& Q) {
  if (Q.kind != FamilyKind::Q) throw std::invalid_argument("state_transport_residual: family is not Q");
  const auto slices = slices_for(Q.omegas, Leg::first);
  const SuperMapd id = SuperMapd::identity(Q.n);
  double worst = 0.0;
  for (int s = 0; s < Q.horizon(); ++s)
    for (int t = s + 1; t <= Q.horizon(); ++t)
      worst = std::max(worst, distance(slices[static_cast<std::size_t>(s)] * tensor(Q.map(s, t), id),
                                       slices[static_cast<std::size_t>(t)]));
  return worst;
}

double max_map_deviation(const MapTable& a, const MapTable& b) {
  if (a.horizon() != b.horizon()) throw DimensionError("max_map_deviation: horizons differ");
  double worst = 0.0;
  for (int s = 0; s < a.horizon(); ++s)
    for (int t = s + 1; t <= a.horizon(); ++t) worst = std::max(worst, distance(a.at(s, t), b.at(s, t)));
  return worst;
}

}  // namespace qqsp
