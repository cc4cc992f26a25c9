#include "qqsp/scenario.hpp"

#include "qqsp/builtins.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace qqsp::cli {

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::validate: return "validate";
    case Stage::propagate: return "propagate";
    case Stage::kc: return "kc";
    case Stage::marginals: return "marginals";
    case Stage::axioms: return "axioms";
    case Stage::reconstruct: return "reconstruct";
    case Stage::ergodic: return "ergodic";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ScenarioError("field '" + field + "': " + what);
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path.empty() ? key : path + "." + key, "missing");
  return obj.at(key);
}

double as_number(const Json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<int>();
}

std::complex<double> as_complex(const Json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(field, "expected a complex number [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Matrixd as_matrix(const Json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) fail(field, "expected a non-empty list of rows");
  const auto rows = static_cast<Index>(v.size());
  if (!v[0].is_array() || v[0].empty()) fail(field, "rows must be non-empty lists");
  const auto cols = static_cast<Index>(v[0].size());
  Matrixd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) fail(field, "ragged matrix");
    for (Index j = 0; j < cols; ++j)
      m(i, j) = as_complex(row[static_cast<std::size_t>(j)], field + "[" + std::to_string(i) + "][" +
                                                                std::to_string(j) + "]");
  }
  return m;
}

Json complex_json(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

Json matrix_json(const Matrixd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Stated as_state(const Json& v, int dim, AlgebraKind kind, const std::string& field) {
  Matrixd rho;
  if (v.is_object()) {
    const Json& dist = require(v, "distribution", field);
    if (!dist.is_array()) fail(field + ".distribution", "expected a list of weights");
    Eigen::VectorXd w(static_cast<Index>(dist.size()));
    for (std::size_t i = 0; i < dist.size(); ++i) w(static_cast<Index>(i)) = as_number(dist[i], field + ".distribution");
    rho = w.cast<std::complex<double>>().asDiagonal().toDenseMatrix();
  } else {
    rho = as_matrix(v, field);
  }
  if (rho.rows() != dim || rho.cols() != dim)
    fail(field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " state");
  if (kind == AlgebraKind::diagonal && !is_diagonal_matrix(rho)) fail(field, "diagonal algebra requires a diagonal state");
  try {
    return Stated::from_density(rho);
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
}

std::optional<Stage> stage_from_string(const std::string& s) {
  for (Stage st : {Stage::validate, Stage::propagate, Stage::kc, Stage::marginals, Stage::axioms, Stage::reconstruct,
                   Stage::ergodic})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

const std::vector<std::string> kQuantumBuiltins = {"constant", "mixed", "entangling", "symmetrized-embedding",
                                                   "left-embedding", "transpose-embedding"};
const std::vector<std::string> kClassicalBuiltins = {"volterra", "mendel"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
  if (!doc.is_object()) throw ScenarioError("scenario document must be a JSON object");
  Scenario sc;
  sc.source = doc;

  const Json& name = require(doc, "name", "");
  if (!name.is_string() || name.get<std::string>().empty()) fail("name", "expected a non-empty string");
  sc.name = name.get<std::string>();
  for (char c : sc.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
      fail("name", "only letters, digits, '-', '_' and '.' are allowed");

  const Json& algebra = require(doc, "algebra", "");
  const Json& kind = require(algebra, "kind", "algebra");
  if (kind == "full") sc.algebra = AlgebraKind::full;
  else if (kind == "diagonal") sc.algebra = AlgebraKind::diagonal;
  else fail("algebra.kind", "expected \"full\" or \"diagonal\"");
  sc.dim = as_int(require(algebra, "dim", "algebra"), "algebra.dim");
  if (sc.dim < 1 || sc.dim > 4) fail("algebra.dim", "supported dimensions are 1..4");

  const Json& type = require(doc, "process_type", "");
  if (type == "A") sc.type = ProcessType::A;
  else if (type == "B") sc.type = ProcessType::B;
  else fail("process_type", "expected \"A\" or \"B\"");

  sc.horizon = as_int(require(doc, "horizon", ""), "horizon");
  if (sc.horizon < 1 || sc.horizon > 16) fail("horizon", "expected 1..16");

  // Seed.
  const Json& seed = require(doc, "seed", "");
  if (!seed.is_object()) fail("seed", "expected an object");
  if (seed.contains("builtin")) {
    sc.seed.source = SeedSpec::Source::builtin;
    if (!seed["builtin"].is_string()) fail("seed.builtin", "expected a string");
    sc.seed.builtin = seed["builtin"].get<std::string>();
    if (contains(kClassicalBuiltins, sc.seed.builtin)) {
      if (sc.algebra != AlgebraKind::diagonal || sc.dim != 2)
        fail("seed.builtin", sc.seed.builtin + " requires a diagonal algebra of dimension 2");
      if (sc.seed.builtin == "volterra") {
        sc.seed.parameter = as_number(require(seed, "a", "seed"), "seed.a");
        if (sc.seed.parameter < 0.0 || sc.seed.parameter > 1.0) fail("seed.a", "expected a value in [0, 1]");
      }
    } else if (contains(kQuantumBuiltins, sc.seed.builtin)) {
      if (sc.algebra != AlgebraKind::full) fail("seed.builtin", sc.seed.builtin + " requires a full matrix algebra");
      if (sc.seed.builtin == "entangling" && sc.dim != 2) fail("seed.builtin", "entangling requires dimension 2");
    } else {
      fail("seed.builtin", "unknown built-in seed '" + sc.seed.builtin + "'");
    }
  } else if (seed.contains("step_maps")) {
    sc.seed.source = SeedSpec::Source::step_maps;
    const Json& maps = seed["step_maps"];
    if (!maps.is_array() || maps.empty()) fail("seed.step_maps", "expected a non-empty list of matrices");
    const Index n = sc.dim;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      const std::string field = "seed.step_maps[" + std::to_string(k) + "]";
      Matrixd m = as_matrix(maps[k], field);
      if (m.rows() != n * n * n * n || m.cols() != n * n)
        fail(field, "expected a " + std::to_string(n * n * n * n) + "x" + std::to_string(n * n) + " matrix");
      sc.seed.maps.emplace_back(n, n * n, std::move(m));
    }
  } else if (seed.contains("classical")) {
    sc.seed.source = SeedSpec::Source::classical;
    if (sc.algebra != AlgebraKind::diagonal) fail("seed.classical", "classical tensors require a diagonal algebra");
    const Json& tensors = require(seed["classical"], "tensors", "seed.classical");
    if (!tensors.is_array() || tensors.empty()) fail("seed.classical.tensors", "expected a non-empty list");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const std::string field = "seed.classical.tensors[" + std::to_string(k) + "]";
      if (!tensors[k].is_array()) fail(field, "expected a flat list of N^3 numbers");
      std::vector<double> values;
      for (const auto& v : tensors[k]) values.push_back(as_number(v, field));
      if (values.size() != static_cast<std::size_t>(sc.dim * sc.dim * sc.dim))
        fail(field, "expected " + std::to_string(sc.dim * sc.dim * sc.dim) + " entries");
      sc.seed.tensors.push_back(CubicTensor::from_row_major(sc.dim, values));
    }
  } else {
    fail("seed", "expected one of 'builtin', 'step_maps', 'classical'");
  }
  sc.seed.homogeneous = seed.value("homogeneous", true);
  if (seed.contains("classical")) sc.seed.homogeneous = seed["classical"].value("homogeneous", true);
  const std::size_t step_count = sc.seed.source == SeedSpec::Source::step_maps   ? sc.seed.maps.size()
                                 : sc.seed.source == SeedSpec::Source::classical ? sc.seed.tensors.size()
                                                                                 : 1;
  if (!sc.seed.homogeneous && static_cast<int>(step_count) < sc.horizon)
    fail("seed", "inhomogeneous seed has fewer step maps than the horizon");
  if (sc.seed.homogeneous && step_count != 1) fail("seed", "homogeneous seed must hold exactly one step");

  sc.initial_state = as_state(require(doc, "initial_state", ""), sc.dim, sc.algebra, "initial_state").density();

  if (doc.contains("tolerances")) {
    const Json& t = doc["tolerances"];
    if (t.contains("cp")) sc.tol.cp = as_number(t["cp"], "tolerances.cp");
    if (t.contains("unital")) sc.tol.unital = as_number(t["unital"], "tolerances.unital");
    if (t.contains("identity")) sc.tol.identity = as_number(t["identity"], "tolerances.identity");
  }

  if (doc.contains("ensemble")) {
    const Json& e = doc["ensemble"];
    if (e.contains("random")) {
      sc.ensemble_size = as_int(e["random"], "ensemble.random");
      if (sc.ensemble_size < 0) fail("ensemble.random", "must be non-negative");
    } else {
      sc.ensemble_size = 0;
    }
    auto read_pairs = [&](const char* key, int dim, std::vector<StatePair>& out) {
      if (!e.contains(key)) return;
      const std::string field = std::string("ensemble.") + key;
      if (!e[key].is_array()) fail(field, "expected a list of [state, state] pairs");
      for (std::size_t i = 0; i < e[key].size(); ++i) {
        const Json& p = e[key][i];
        const std::string f = field + "[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 2) fail(f, "expected [state, state]");
        out.push_back({as_state(p[0], dim, sc.algebra, f), as_state(p[1], dim, sc.algebra, f)});
      }
    };
    read_pairs("pairs_m", sc.dim, sc.pairs_m);
    read_pairs("pairs_mm", sc.dim * sc.dim, sc.pairs_mm);
  }

  if (doc.contains("ergodic")) {
    const Json& e = doc["ergodic"];
    if (e.contains("epsilon")) sc.ergodic.epsilon = as_number(e["epsilon"], "ergodic.epsilon");
    if (e.contains("s")) sc.ergodic.s = as_int(e["s"], "ergodic.s");
    if (e.contains("samples")) sc.ergodic.samples = as_int(e["samples"], "ergodic.samples");
    if (sc.ergodic.s < 0 || sc.ergodic.s >= sc.horizon) fail("ergodic.s", "start time must lie in [0, horizon)");
  }

  if (doc.contains("seed_value")) {
    if (!doc["seed_value"].is_number_unsigned()) fail("seed_value", "expected an unsigned integer");
    sc.run_seed = doc["seed_value"].get<std::uint64_t>();
  }

  const Json& pipeline = require(doc, "pipeline", "");
  if (!pipeline.is_array() || pipeline.empty()) fail("pipeline", "expected a non-empty list of stages");
  for (const auto& p : pipeline) {
    if (!p.is_string()) fail("pipeline", "stage names must be strings");
    auto st = stage_from_string(p.get<std::string>());
    if (!st) fail("pipeline", "unknown stage '" + p.get<std::string>() + "'");
    sc.pipeline.push_back(*st);
  }
  for (Stage st : sc.pipeline)
    if ((st == Stage::kc || st == Stage::marginals || st == Stage::reconstruct) && sc.horizon < 2)
      fail("horizon", std::string("stage '") + to_string(st) + "' needs a horizon of at least 2");
  return sc;
}

Scenario parse_scenario_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

QQSPSeed make_seed(const Scenario& sc, const Stated& omega0) {
  if (sc.seed.source == SeedSpec::Source::classical ||
      (sc.seed.source == SeedSpec::Source::builtin && contains(kClassicalBuiltins, sc.seed.builtin))) {
    ClassicalQSP q;
    q.N = sc.dim;
    q.type = sc.type;
    q.homogeneous = sc.seed.homogeneous;
    q.x0 = omega0.density().diagonal().real();
    if (sc.seed.source == SeedSpec::Source::classical) q.step_tensors = sc.seed.tensors;
    else q.step_tensors = {sc.seed.builtin == "volterra" ? volterra_tensor(sc.seed.parameter) : mendel_tensor()};
    QQSPSeed seed;
    seed.n = q.N;
    seed.kind = AlgebraKind::diagonal;
    seed.type = q.type;
    seed.homogeneous = q.homogeneous;
    for (const auto& p : q.step_tensors) seed.step_maps.push_back(lift_tensor(p));
    seed.omega0 = omega0;
    return seed;
  }
  QQSPSeed seed;
  seed.n = sc.dim;
  seed.kind = sc.algebra;
  seed.type = sc.type;
  seed.omega0 = omega0;
  seed.homogeneous = sc.seed.homogeneous;
  if (sc.seed.source == SeedSpec::Source::step_maps) {
    seed.step_maps = sc.seed.maps;
    return seed;
  }
  const int n = sc.dim;
  const Stated trace_state = Stated::maximally_mixed(n);
  const std::string& b = sc.seed.builtin;
  if (b == "constant") seed.step_maps = {builtins::constant_step(trace_state)};
  else if (b == "mixed") seed.step_maps = {0.5 * builtins::constant_step(trace_state) + 0.5 * builtins::symmetrized_embedding(n)};
  else if (b == "entangling") seed.step_maps = {0.5 * builtins::constant_step(trace_state) + 0.5 * builtins::entangling_step()};
  else if (b == "symmetrized-embedding") seed.step_maps = {builtins::symmetrized_embedding(n)};
  else if (b == "left-embedding") seed.step_maps = {builtins::left_embedding(n)};
  else seed.step_maps = {builtins::transpose_embedding(n)};
  return seed;
}

Json table_json(const ResidualTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) rows.push_back(Json::array({r.s, r.tau, r.t, r.residual}));
  return Json{{"max", table.max()}, {"rows", std::move(rows)}};
}

Json contraction_json(const ContractionEstimate& e) {
  return Json{{"s", e.s}, {"t", e.t}, {"lambda", e.lambda}, {"method", to_string(e.method)},
              {"sample_count", e.sample_count}};
}

struct Context {
  const Scenario& sc;
  Mode mode;
  std::uint64_t seed;
  Stated omega0;
  QQSPSeed qseed;
  std::optional<ProcessLattice> lattice;
  std::optional<MarginalFamily> Q, pair, lifted;

  const ProcessLattice& ensure_lattice() {
    if (!lattice) lattice = propagate(qseed, sc.horizon, mode, sc.tol);
    return *lattice;
  }

  void ensure_marginals() {
    if (Q) return;
    const ProcessLattice& L = ensure_lattice();
    Q = build_Q(L);
    if (L.type() == ProcessType::A) {
      pair = build_H(L);
      lifted = build_Z(*pair);
    } else {
      pair = build_h(L);
      lifted = build_z(*pair);
    }
  }
};

class StrictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

StageResult run_stage(Stage stage, Context& ctx, Report& report) {
  StageResult r;
  r.stage = to_string(stage);
  const Scenario& sc = ctx.sc;
  switch (stage) {
    case Stage::validate: {
      const SeedDiagnostics diag = validate_seed(ctx.qseed, sc.tol);
      Json steps = Json::array();
      for (const auto& s : diag.steps)
        steps.push_back(Json{{"k", s.k},
                             {"is_cp", s.choi.is_cp},
                             {"min_choi_eigenvalue", s.choi.min_choi_eigenvalue},
                             {"is_unital", s.choi.is_unital},
                             {"unitality_residual", s.choi.unitality_residual},
                             {"flip_residual", s.flip_residual}});
      r.ok = diag.ok();
      r.data = Json{{"steps", std::move(steps)}, {"issues", diag.issues}};
      report.verdicts["seed_valid"] = diag.ok();
      break;
    }
    case Stage::propagate: {
      const ProcessLattice& L = ctx.ensure_lattice();
      report.omega_diagonals.clear();
      for (const auto& w : L.omegas()) {
        std::vector<double> d;
        for (Index i = 0; i < w.dim(); ++i) d.push_back(w.density()(i, i).real());
        report.omega_diagonals.push_back(std::move(d));
      }
      Json omegas = Json::array();
      for (const auto& w : L.omegas()) omegas.push_back(matrix_json(w.density()));
      r.data = Json{{"horizon", L.horizon()}, {"process_type", to_string(L.type())}, {"omegas", std::move(omegas)}};
      break;
    }
    case Stage::kc: {
      const ResidualTable table = kc_consistency(ctx.ensure_lattice());
      r.data = table_json(table);
      report.verdicts["kc_consistent"] = table.max() <= sc.tol.identity;
      break;
    }
    case Stage::marginals: {
      ctx.ensure_marginals();
      const ProcessLattice& L = *ctx.lattice;
      const SliceReport slices = slice_identities(L, *ctx.Q, *ctx.pair, *ctx.lifted);
      Json composition;
      composition["Q"] = table_json(check_markov(*ctx.Q));
      if (L.type() == ProcessType::A) {
        composition["H"] = table_json(check_markov(*ctx.pair));
        composition["Z"] = table_json(check_markov(*ctx.lifted));
      } else {
        composition["h"] = table_json(check_hh_law(*ctx.pair, *ctx.Q));
        composition["h_plain_markov"] = table_json(check_markov(*ctx.pair));
        composition["z"] = table_json(check_markov(*ctx.lifted));
      }
      r.data = Json{{"slice_identities",
                     {{"pair_left_embedding", slices.h_left_embedding},
                      {"pair_right_embedding", slices.h_right_embedding},
                      {"lifted_left_embedding", slices.z_left_embedding},
                      {"lifted_right_embedding", slices.z_right_embedding},
                      {"intertwining", slices.intertwining},
                      {"q_from_p", slices.q_from_p},
                      {"max", slices.max()}}},
                    {"composition", std::move(composition)}};
      r.ok = slices.max() <= sc.tol.identity;
      break;
    }
    case Stage::axioms: {
      ctx.ensure_marginals();
      const AxiomReport ax = verify_marginal_axioms(*ctx.Q, *ctx.pair, ctx.omega0);
      r.ok = ax.passes(sc.tol.identity);
      r.data = Json{{"flip", ax.flip},
                    {"intertwining", ax.intertwining},
                    {"absorption", ax.absorption},
                    {"phi_psi_distance", ax.phi_psi},
                    {"max", ax.max()},
                    {"passes", r.ok}};
      report.verdicts["axioms_pass"] = r.ok;
      if (!r.ok && ctx.mode == Mode::strict) throw StrictFailure("marginal axioms fail");
      break;
    }
    case Stage::reconstruct: {
      ctx.ensure_marginals();
      const ProcessLattice& L = *ctx.lattice;
      ProcessLattice R = [&] {
        try {
          return reconstruct_qqsp(*ctx.Q, *ctx.pair, ctx.omega0, L.type(), ctx.mode, sc.tol.identity);
        } catch (const AxiomFailure& e) {
          throw StrictFailure(e.what());
        }
      }();
      const MarginalFamily QR = build_Q(R);
      const double deviation = max_map_deviation(R.maps(), L.maps());
      r.data = Json{{"max_map_deviation", deviation},
                    {"kc_max", kc_consistency(R).max()},
                    {"q_from_p", max_map_deviation(QR.maps, ctx.Q->maps)}};
      if (L.type() == ProcessType::B) r.data["state_transport"] = state_transport_residual(*ctx.Q);
      r.ok = deviation <= sc.tol.identity;
      report.verdicts["reconstruction_matches"] = r.ok;
      break;
    }
    case Stage::ergodic: {
      ctx.ensure_marginals();
      Ensemble ensemble = random_ensemble(sc.dim, sc.algebra, sc.ensemble_size, ctx.seed);
      ensemble.on_m.insert(ensemble.on_m.end(), sc.pairs_m.begin(), sc.pairs_m.end());
      ensemble.on_mm.insert(ensemble.on_mm.end(), sc.pairs_mm.begin(), sc.pairs_mm.end());
      if (ensemble.on_m.empty() || ensemble.on_mm.empty())
        throw ScenarioError("field 'ensemble': the ergodic stage needs at least one pair on M and on M (x) M");
      ErgodicConfig config = sc.ergodic;
      config.seed = ctx.seed + 1;
      const ErgodicReport er = ergodic_verdict(*ctx.lattice, *ctx.Q, *ctx.pair, *ctx.lifted, ensemble, config);
      Json families = Json::array();
      report.decay.clear();
      for (const auto& f : er.families) {
        families.push_back(Json{{"family", f.family},
                                {"final_max_distance", f.final_max_distance},
                                {"ergodic", f.ergodic},
                                {"first_step", contraction_json(f.first_step)},
                                {"best", contraction_json(f.best)}});
        DecaySeries series;
        series.family = f.family;
        for (std::size_t k = 0; k < f.trace.times.size(); ++k)
          for (std::size_t p = 0; p < f.trace.distances.size(); ++p)
            series.rows.push_back({f.trace.times[k], static_cast<int>(p), f.trace.distances[p][k]});
        report.decay.push_back(std::move(series));
      }
      r.data = Json{{"epsilon", config.epsilon},
                    {"s", config.s},
                    {"pairs_m", ensemble.on_m.size()},
                    {"pairs_mm", ensemble.on_mm.size()},
                    {"families", std::move(families)},
                    {"joint", er.joint},
                    {"coherent", er.coherent}};
      report.verdicts["ergodic_at_horizon"] = er.joint;
      report.verdicts["verdicts_coherent"] = er.coherent;
      break;
    }
  }
  return r;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& options) {
  RunResult out;
  Report& report = out.report;
  const std::uint64_t seed = options.seed.value_or(sc.run_seed.value_or(kDefaultSeed));
  report.seed = seed;
  report.mode = options.mode == Mode::strict ? "strict" : "permissive";
  report.scenario = sc.source;

  const Stated omega0 = Stated::from_density(sc.initial_state);
  Context ctx{sc, options.mode, seed, omega0, make_seed(sc, omega0), {}, {}, {}, {}};

  for (Stage stage : sc.pipeline) {
    const auto start = std::chrono::steady_clock::now();
    try {
      StageResult r = run_stage(stage, ctx, report);
      const bool stop = stage == Stage::validate && !r.ok && options.mode == Mode::strict;
      report.stages.push_back(std::move(r));
      if (stop) {
        report.failure = "seed validation failed";
        break;
      }
    } catch (const StrictFailure& e) {
      report.stages.push_back(StageResult{to_string(stage), false, Json::object()});
      report.failure = std::string(to_string(stage)) + ": " + e.what();
      break;
    } catch (const SeedValidationError& e) {
      report.stages.push_back(StageResult{to_string(stage), false, Json::object()});
      report.failure = std::string(to_string(stage)) + ": " + e.what();
      break;
    } catch (const InvalidStateError& e) {
      report.stages.push_back(StageResult{to_string(stage), false, Json::object()});
      report.failure = std::string(to_string(stage)) + ": " + e.what();
      break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    out.timings.push_back({to_string(stage), elapsed.count()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

Json to_json(const Report& report) {
  Json stages = Json::array();
  for (const auto& s : report.stages) stages.push_back(Json{{"stage", s.stage}, {"ok", s.ok}, {"data", s.data}});
  Json decay = Json::array();
  for (const auto& d : report.decay) {
    Json rows = Json::array();
    for (const auto& r : d.rows) rows.push_back(Json::array({r.t, r.pair_index, r.distance}));
    decay.push_back(Json{{"family", d.family}, {"rows", std::move(rows)}});
  }
  Json doc;
  doc["tool_version"] = report.tool_version;
  doc["seed"] = report.seed;
  doc["mode"] = report.mode;
  doc["failure"] = report.failure ? Json(*report.failure) : Json(nullptr);
  doc["scenario"] = report.scenario;
  doc["stages"] = std::move(stages);
  doc["verdicts"] = report.verdicts;
  doc["series"] = Json{{"omega_diagonals", report.omega_diagonals}, {"decay", std::move(decay)}};
  return doc;
}

Report report_from_json(const Json& doc) {
  Report r;
  try {
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.mode = doc.at("mode").get<std::string>();
    if (!doc.at("failure").is_null()) r.failure = doc.at("failure").get<std::string>();
    r.scenario = doc.at("scenario");
    for (const auto& s : doc.at("stages"))
      r.stages.push_back(StageResult{s.at("stage").get<std::string>(), s.at("ok").get<bool>(), s.at("data")});
    r.verdicts = doc.at("verdicts");
    const Json& series = doc.at("series");
    r.omega_diagonals = series.at("omega_diagonals").get<std::vector<std::vector<double>>>();
    for (const auto& d : series.at("decay")) {
      DecaySeries ds;
      ds.family = d.at("family").get<std::string>();
      for (const auto& row : d.at("rows"))
        ds.rows.push_back({row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<double>()});
      r.decay.push_back(std::move(ds));
    }
  } catch (const Json::exception& e) {
    throw ScenarioError(std::string("malformed report: ") + e.what());
  }
  return r;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string decay_csv(const DecaySeries& series) {
  std::string out = "t,pair_index,distance\n";
  for (const auto& r : series.rows)
    out += std::to_string(r.t) + "," + std::to_string(r.pair_index) + "," + format_double(r.distance) + "\n";
  return out;
}

std::string omega_csv(const std::vector<std::vector<double>>& diagonals) {
  std::string out = "t";
  const std::size_t width = diagonals.empty() ? 0 : diagonals.front().size();
  for (std::size_t i = 0; i < width; ++i) out += ",diag_" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < diagonals.size(); ++t) {
    out += std::to_string(t);
    for (double v : diagonals[t]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const Report& report, Format format, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const std::string name = report.scenario.value("name", "scenario");
  std::vector<std::filesystem::path> written;

  const auto report_path = out_dir / (name + ".report.json");
  write_file(report_path, to_json(report).dump(2) + "\n");
  written.push_back(report_path);
  if (format == Format::csv_bundle) {
    if (!report.omega_diagonals.empty()) {
      const auto p = out_dir / (name + ".omega.csv");
      write_file(p, omega_csv(report.omega_diagonals));
      written.push_back(p);
    }
    for (const auto& d : report.decay) {
      const auto p = out_dir / (name + ".decay_" + d.family + ".csv");
      write_file(p, decay_csv(d));
      written.push_back(p);
    }
  }
  return written;
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace {

const Json kAllStages = Json::array({"validate", "propagate", "kc", "marginals", "axioms", "reconstruct", "ergodic"});

Json full_state_json(const Matrixd& rho) { return matrix_json(rho); }

Json make_builtin(const std::string& name, const char* kind, int dim, Json seed, Json state, const char* type,
                  int horizon) {
  Json doc;
  doc["name"] = name;
  doc["algebra"] = Json{{"kind", kind}, {"dim", dim}};
  doc["seed"] = std::move(seed);
  doc["initial_state"] = std::move(state);
  doc["process_type"] = type;
  doc["horizon"] = horizon;
  doc["ensemble"] = Json{{"random", 20}};
  doc["ergodic"] = Json{{"epsilon", 1e-3}, {"s", 0}, {"samples", 200}};
  doc["pipeline"] = kAllStages;
  return doc;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"constant-n2",          "constant-n3",          "mixed-n2-typeA",    "mixed-n2-typeB",
          "entangling-n2-typeA",  "entangling-n2-typeB",  "volterra-a1-typeA", "volterra-a1-typeB",
          "mendel-typeA",         "identity-like-diag"};
}

Json builtin_scenario(const std::string& name) {
  const Json tracial2 = full_state_json(unit<double>(2) / 2.0);
  const Json tracial3 = full_state_json(unit<double>(3) / 3.0);
  const Json half = Json{{"distribution", {0.5, 0.5}}};
  if (name == "constant-n2") return make_builtin(name, "full", 2, Json{{"builtin", "constant"}}, tracial2, "A", 5);
  if (name == "constant-n3") return make_builtin(name, "full", 3, Json{{"builtin", "constant"}}, tracial3, "B", 4);
  if (name == "mixed-n2-typeA") return make_builtin(name, "full", 2, Json{{"builtin", "mixed"}}, tracial2, "A", 8);
  if (name == "mixed-n2-typeB") return make_builtin(name, "full", 2, Json{{"builtin", "mixed"}}, tracial2, "B", 8);
  if (name == "entangling-n2-typeA")
    return make_builtin(name, "full", 2, Json{{"builtin", "entangling"}},
                        full_state_json(builtins::entangling_initial_state().density()), "A", 8);
  if (name == "entangling-n2-typeB")
    return make_builtin(name, "full", 2, Json{{"builtin", "entangling"}},
                        full_state_json(builtins::entangling_initial_state().density()), "B", 8);
  if (name == "volterra-a1-typeA")
    return make_builtin(name, "diagonal", 2, Json{{"builtin", "volterra"}, {"a", 1.0}}, half, "A", 6);
  if (name == "volterra-a1-typeB")
    return make_builtin(name, "diagonal", 2, Json{{"builtin", "volterra"}, {"a", 1.0}}, half, "B", 6);
  if (name == "mendel-typeA")
    return make_builtin(name, "diagonal", 2, Json{{"builtin", "mendel"}}, Json{{"distribution", {0.3, 0.7}}}, "A", 6);
  if (name == "identity-like-diag")
    return make_builtin(name, "diagonal", 2, Json{{"builtin", "volterra"}, {"a", 0.0}},
                        Json{{"distribution", {1.0, 0.0}}}, "A", 8);
  throw ScenarioError("unknown built-in scenario '" + name + "'");
}

}  // namespace qqsp::cli
