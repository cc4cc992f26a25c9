// Finite-horizon evidence for the ergodic principle: trace-norm decay of
// evolved state pairs, contraction coefficients, and a joint verdict across
// the process and its marginal families.

#pragma once

#include "qqsp/marginal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qqsp {

struct StatePair {
  Stated first;
  Stated second;
};

struct DecayTrace {
  std::string family;
  int s = 0;
  std::vector<int> times;
  /// distances[pair][k] = ‖F^{s,times[k]}_* φ − F^{s,times[k]}_* ψ‖₁
  std::vector<std::vector<double>> distances;

  double max_at(std::size_t k) const;
};

/// Distances for t = s+1..horizon. Pairs live on the output algebra of the
/// maps (M ⊗ M for P, H, Z; M for Q).
DecayTrace decay_trace(const MapTable& maps, const std::string& family, const std::vector<StatePair>& pairs, int s,
                       int horizon);
DecayTrace decay_trace(const ProcessLattice& lattice, const std::vector<StatePair>& pairs, int s, int horizon);
DecayTrace decay_trace(const MarginalFamily& family, const std::vector<StatePair>& pairs, int s, int horizon);

enum class ContractionMethod { exact_classical, pure_pair_sampling };

const char* to_string(ContractionMethod method);

struct ContractionEstimate {
  int s = 0;
  int t = 0;
  double lambda = 0.0;
  ContractionMethod method = ContractionMethod::exact_classical;
  int sample_count = 0;
};

/// sup ½‖L_* φ − L_* ψ‖₁ over state pairs. Diagonal algebras give the exact
/// Dobrushin coefficient from basis vertices; full algebras give a lower
/// bound from `samples` random orthonormal pure pairs.
ContractionEstimate contraction_coefficient(const SuperMapd& map, AlgebraKind kind, int samples,
                                            std::uint64_t seed);

ContractionEstimate contraction_coefficient(const MarginalFamily& family, int s, int t, int samples = 200,
                                            std::uint64_t seed = 20240531);

struct Ensemble {
  std::vector<StatePair> on_m;
  std::vector<StatePair> on_mm;
};

/// `count` random pairs on M and on M ⊗ M; diagonal algebras get diagonal states.
Ensemble random_ensemble(int n, AlgebraKind kind, int count, std::uint64_t seed);

struct ErgodicConfig {
  double epsilon = 1e-3;
  int s = 0;
  int samples = 200;
  std::uint64_t seed = 20240531;
};

struct FamilyVerdict {
  std::string family;
  DecayTrace trace;
  ContractionEstimate first_step;
  ContractionEstimate best;
  double final_max_distance = 0.0;
  bool ergodic = false;
};

struct ErgodicReport {
  std::vector<FamilyVerdict> families;
  bool joint = false;     // every family ergodic at the horizon
  bool coherent = false;  // all family verdicts agree

  const FamilyVerdict& family(const std::string& name) const;
};

/// `pair_family` is H or h, `lifted` is Z or z, all built from `lattice`.
ErgodicReport ergodic_verdict(const ProcessLattice& lattice, const MarginalFamily& Q, const MarginalFamily& pair_family,
                              const MarginalFamily& lifted, const Ensemble& ensemble, const ErgodicConfig& config);

}  // namespace qqsp
