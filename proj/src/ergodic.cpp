#include "qqsp/ergodic.hpp"

#include "qqsp/random.hpp"

#include <algorithm>
#include <limits>

namespace qqsp {

double DecayTrace::max_at(std::size_t k) const {
  double m = 0.0;
  for (const auto& row : distances) m = std::max(m, row.at(k));
  return m;
}

DecayTrace decay_trace(const MapTable& maps, const std::string& family, const std::vector<StatePair>& pairs, int s,
                       int horizon) {
  if (s < 0 || horizon > maps.horizon() || horizon <= s)
    throw std::out_of_range("decay_trace: times outside the lattice");
  DecayTrace trace;
  trace.family = family;
  trace.s = s;
  for (int t = s + 1; t <= horizon; ++t) trace.times.push_back(t);

  std::vector<SuperMapd> preduals;
  for (int t : trace.times) preduals.push_back(predual(maps.at(s, t)));
  for (const auto& pair : pairs) {
    if (pair.first.dim() != preduals.front().in_dim() || pair.second.dim() != preduals.front().in_dim())
      throw DimensionError("decay_trace: state pair lives on the wrong algebra for family " + family);
    std::vector<double> row;
    const Matrixd diff = pair.first.density() - pair.second.density();
    for (const auto& pre : preduals) row.push_back(trace_norm(pre(diff)));
    trace.distances.push_back(std::move(row));
  }
  return trace;
}

DecayTrace decay_trace(const ProcessLattice& lattice, const std::vector<StatePair>& pairs, int s, int horizon) {
  return decay_trace(lattice.maps(), "P", pairs, s, horizon);
}

DecayTrace decay_trace(const MarginalFamily& family, const std::vector<StatePair>& pairs, int s, int horizon) {
  return decay_trace(family.maps, to_string(family.kind), pairs, s, horizon);
}

const char* to_string(ContractionMethod method) {
  return method == ContractionMethod::exact_classical ? "exact-classical" : "pure-pair-sampling";
}

ContractionEstimate contraction_coefficient(const SuperMapd& map, AlgebraKind kind, int samples, std::uint64_t seed) {
  const SuperMapd pre = predual(map);
  const Index d = pre.in_dim();
  ContractionEstimate est;
  if (kind == AlgebraKind::diagonal) {
    // Rows of the predual stochastic matrix are the images of the vertices.
    std::vector<Matrixd> rows;
    for (Index i = 0; i < d; ++i) rows.push_back(pre(matrix_unit<double>(d, i, i)));
    double worst = 0.0;
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j)
        worst = std::max(worst, 0.5 * (rows[static_cast<std::size_t>(i)] - rows[static_cast<std::size_t>(j)])
                                          .diagonal()
                                          .cwiseAbs()
                                          .sum());
    est.lambda = worst;
    est.method = ContractionMethod::exact_classical;
    est.sample_count = 0;
    return est;
  }

  Rng rng(seed);
  auto score = [&](const Vectord& u, const Vectord& v) {
    return 0.5 * trace_norm(pre(Matrixd(u * u.adjoint() - v * v.adjoint())));
  };
  auto orthonormal_to = [](const Vectord& u, Vectord v) {
    v -= u.dot(v) * u;
    return Vectord(v.normalized());
  };
  double worst = -1.0;
  Vectord best_u, best_v;
  for (int k = 0; k < samples; ++k) {
    Vectord u = random_vector<double>(d, rng);
    Vectord v = orthonormal_to(u, random_vector<double>(d, rng));
    const double value = score(u, v);
    if (value > worst) {
      worst = value;
      best_u = u;
      best_v = v;
    }
  }
  // Hill climb from the best sample; the result remains a lower bound.
  if (samples > 0) {
    double step = 0.1;
    for (int iter = 0; iter < 4000 && step > 1e-9; ++iter) {
      Vectord u = (best_u + step * random_vector<double>(d, rng)).normalized();
      Vectord v = orthonormal_to(u, best_v + step * random_vector<double>(d, rng));
      const double value = score(u, v);
      if (value > worst) {
        worst = value;
        best_u = u;
        best_v = v;
      } else if (iter % 20 == 19) {
        step *= 0.7;
      }
    }
  }
  est.lambda = std::max(worst, 0.0);
  est.method = ContractionMethod::pure_pair_sampling;
  est.sample_count = samples;
  return est;
}

ContractionEstimate contraction_coefficient(const MarginalFamily& family, int s, int t, int samples,
                                            std::uint64_t seed) {
  if (!family.maps.contains(s, t)) throw std::out_of_range("contraction_coefficient: times outside the lattice");
  ContractionEstimate est = contraction_coefficient(family.map(s, t), family.algebra, samples, seed);
  est.s = s;
  est.t = t;
  return est;
}

Ensemble random_ensemble(int n, AlgebraKind kind, int count, std::uint64_t seed) {
  Rng rng(seed);
  auto draw = [&](Index dim) {
    return kind == AlgebraKind::diagonal ? random_diagonal_state<double>(dim, rng) : random_state<double>(dim, rng);
  };
  Ensemble e;
  for (int k = 0; k < count; ++k) {
    Stated a = draw(n);
    Stated b = draw(n);
    e.on_m.push_back({std::move(a), std::move(b)});
  }
  for (int k = 0; k < count; ++k) {
    Stated a = draw(n * n);
    Stated b = draw(n * n);
    e.on_mm.push_back({std::move(a), std::move(b)});
  }
  return e;
}

const FamilyVerdict& ErgodicReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.family == name) return f;
  throw std::out_of_range("ErgodicReport: no family " + name);
}

namespace {

FamilyVerdict judge(const MapTable& maps, const std::string& name, AlgebraKind kind,
                    const std::vector<StatePair>& pairs, const ErgodicConfig& config) {
  FamilyVerdict v;
  v.family = name;
  const int horizon = maps.horizon();
  v.trace = decay_trace(maps, name, pairs, config.s, horizon);
  v.final_max_distance = v.trace.max_at(v.trace.times.size() - 1);
  v.ergodic = v.final_max_distance < config.epsilon;
  for (int t = config.s + 1; t <= horizon; ++t) {
    ContractionEstimate est = contraction_coefficient(maps.at(config.s, t), kind, config.samples, config.seed);
    est.s = config.s;
    est.t = t;
    if (t == config.s + 1) {
      v.first_step = est;
      v.best = est;
    } else if (est.lambda < v.best.lambda) {
      v.best = est;
    }
  }
  return v;
}

}  // namespace

ErgodicReport ergodic_verdict(const ProcessLattice& lattice, const MarginalFamily& Q, const MarginalFamily& pair_family,
                              const MarginalFamily& lifted, const Ensemble& ensemble, const ErgodicConfig& config) {
  for (const MarginalFamily* f : {&Q, &pair_family, &lifted})
    if (f->n != lattice.n() || f->horizon() != lattice.horizon())
      throw DimensionError("ergodic_verdict: families do not match the lattice");
  if (config.s < 0 || config.s >= lattice.horizon()) throw std::out_of_range("ergodic_verdict: start time out of range");

  ErgodicReport report;
  report.families.push_back(judge(lattice.maps(), "P", lattice.kind(), ensemble.on_mm, config));
  report.families.push_back(judge(Q.maps, to_string(Q.kind), Q.algebra, ensemble.on_m, config));
  report.families.push_back(
      judge(pair_family.maps, to_string(pair_family.kind), pair_family.algebra, ensemble.on_mm, config));
  report.families.push_back(judge(lifted.maps, to_string(lifted.kind), lifted.algebra, ensemble.on_mm, config));

  report.joint = std::all_of(report.families.begin(), report.families.end(),
                             [](const FamilyVerdict& f) { return f.ergodic; });
  report.coherent = std::all_of(report.families.begin(), report.families.end(), [&](const FamilyVerdict& f) {
    return f.ergodic == report.families.front().ergodic;
  });
  return report;
}

}  // namespace qqsp
