#include "aht/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "aht/diagnostics.hpp"
#include "aht/expr.hpp"
#include "aht/flow.hpp"

namespace aht {
namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void dump(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
      return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

std::string to_text(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------- parsing

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "' in " + where + " is missing or has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

int get_int(const json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ConfigError("field '" + key + "' in " + where + " must be an integer");
  return obj.at(key).get<int>();
}

std::uint64_t get_seed(const json& obj, const std::string& key, std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("field '" + key + "' in " + where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

struct GeometryBlock {
  GeometrySpec spec;
  json echo;
};

GeometryBlock parse_geometry(const json& g, std::optional<std::uint64_t> seed_override) {
  const std::string where = "geometry";
  if (!g.is_object()) throw ConfigError("geometry must be an object");
  const std::string type = get<std::string>(g, "type", where);
  json echo;
  echo["type"] = type;
  const int degree = get_int(g, "jet_degree", 4, where);
  if (degree < 3 || degree > 8) throw ConfigError("jet_degree must be between 3 and 8");

  GeometrySpec spec;
  try {
    if (type == "flat") {
      check_keys(g, {"type", "n", "jet_degree"}, where);
      const int n = get_int(g, "n", 2, where);
      if (n < 1 || n > 4) throw ConfigError("flat geometry needs 1 <= n <= 4");
      spec = flat_kahler(n);
      echo["n"] = n;
    } else if (type == "conformal") {
      check_keys(g, {"type", "n", "f", "periodic", "jet_degree"}, where);
      const int n = get_int(g, "n", 2, where);
      const std::string f = get<std::string>(g, "f", where);
      const bool periodic = get_or<bool>(g, "periodic", true, where);
      if (n < 2 || n > 4) throw ConfigError("conformal geometry needs 2 <= n <= 4");
      try {
        (void)parse_expr(f);
      } catch (const ExprSyntaxError& e) {
        throw ConfigError(std::string("conformal factor: ") + e.what());
      }
      spec = conformal(n, f, periodic);
      echo["n"] = n;
      echo["f"] = f;
      echo["periodic"] = periodic;
    } else if (type == "hopf") {
      check_keys(g, {"type", "n", "jet_degree"}, where);
      const int n = get_int(g, "n", 2, where);
      if (n < 2 || n > 4) throw ConfigError("hopf geometry needs 2 <= n <= 4");
      spec = hopf_chart(n);
      echo["n"] = n;
    } else if (type == "s6") {
      check_keys(g, {"type", "n", "jet_degree"}, where);
      if (get_int(g, "n", 3, where) != 3) throw GeometryError("the round S^6 chart needs n = 3");
      spec = s6_nearly_kahler();
      echo["n"] = 3;
    } else if (type == "hermitian") {
      check_keys(g, {"type", "planes", "jet_degree"}, where);
      const auto planes = get<std::vector<std::string>>(g, "planes", where);
      if (planes.size() < 2 || planes.size() > 4) throw ConfigError("hermitian geometry needs 2 to 4 planes");
      for (const auto& p : planes) try {
          (void)parse_expr(p);
        } catch (const ExprSyntaxError& e) {
          throw ConfigError(std::string("plane factor: ") + e.what());
        }
      spec = hermitian_planes(planes);
      echo["planes"] = planes;
    } else if (type == "random") {
      check_keys(g, {"type", "n", "seed", "amplitude", "jet_degree"}, where);
      const int n = get_int(g, "n", 2, where);
      const std::uint64_t seed = seed_override.value_or(get_seed(g, "seed", 0, where));
      const double amplitude = get_or<double>(g, "amplitude", 0.3, where);
      if (n < 1 || n > 4) throw ConfigError("random geometry needs 1 <= n <= 4");
      if (!(amplitude >= 0.0)) throw ConfigError("amplitude must be non-negative");
      spec = random_geometry(seed, n, amplitude);
      echo["n"] = n;
      echo["seed"] = seed;
      echo["amplitude"] = amplitude;
    } else {
      throw ConfigError("unknown geometry type '" + type + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw GeometryError(e.what());
  }
  spec.jet_degree = degree;
  echo["jet_degree"] = degree;
  return {spec, echo};
}

// ---------------------------------------------------------------- commands

std::vector<std::vector<double>> points_for(const RunConfig& cfg) {
  if (!cfg.point_list.empty()) {
    for (const auto& p : cfg.point_list)
      if (!cfg.geometry.domain.contains(p)) throw GeometryError("point outside the geometry's domain");
    return cfg.point_list;
  }
  try {
    return sample_points(cfg.geometry, cfg.point_count, cfg.point_seed);
  } catch (const std::exception& e) {
    throw GeometryError(e.what());
  }
}

json header(const RunConfig& cfg) {
  json j;
  j["schema"] = 1;
  j["command"] = cfg.command;
  j["geometry"] = json::parse(cfg.geometry_json);
  return j;
}

json check(const std::string& name, double value, double tolerance, bool pass) {
  json c;
  c["name"] = name;
  c["value"] = value;
  c["tolerance"] = tolerance;
  c["pass"] = pass;
  return c;
}

const std::vector<std::string>& verdict_names() {
  static const std::vector<std::string> names{"harmonic",       "harmonic_map", "vert_geodesic",
                                              "horiz_geodesic", "flatness",     "superflat"};
  return names;
}

struct Inspection {
  json report;
  json checks = json::array();
  DiagnosticsReport diag;
  std::vector<std::vector<double>> points;
};

Inspection inspect(const RunConfig& cfg) {
  Inspection ins;
  ins.points = points_for(cfg);
  const AlmostHermitianStructure s = cfg.geometry.build();
  ins.diag = run_diagnostics(cfg.geometry, ins.points, cfg.tol, cfg.point_seed);
  const DiagnosticsReport& d = ins.diag;

  json& r = ins.report;
  r = header(cfg);
  r["sign_audit"] = d.sign_audit ? "paper-convention" : "failed";
  r["sign_audit_error"] = d.sign_audit_error;
  r["tolerance"] = cfg.tol;
  r["jet_degree"] = d.jet_degree;
  json pts = json::array();
  for (std::size_t i = 0; i < ins.points.size(); ++i) {
    json p;
    p["x"] = ins.points[i];
    p["scale"] = d.scales[i];
    json res;
    for (const auto& [k, v] : d.residuals[i]) res[k] = v;
    p["residuals"] = res;
    p["class"] = classify_gh(s, {ins.points[i]}, cfg.tol).label;
    pts.push_back(p);
  }
  r["points"] = pts;

  json verdicts;
  for (const auto& name : verdict_names()) verdicts[name] = d.pass.at(name);
  json summary;
  summary["class"] = d.classification.label;
  summary["component_max"] = d.classification.component_max;
  summary["torsion_max"] = d.classification.torsion_max;
  summary["verdicts"] = verdicts;
  json maxn;
  for (const auto& [k, v] : d.max_normalized) maxn[k] = v;
  summary["max_normalized"] = maxn;
  r["summary"] = summary;

  ins.checks.push_back(check("sign_audit", d.sign_audit_error, 1e-8, d.sign_audit));
  for (const auto& [k, v] : d.max_normalized)
    if (k.rfind("identity.", 0) == 0) ins.checks.push_back(check(k, v, cfg.tol, v < cfg.tol));
  const ExpectedDiagnostics& e = cfg.geometry.expected;
  if (!e.gh_class.empty())
    ins.checks.push_back(check("expected.class." + e.gh_class, 0.0, 0.0, d.classification.label == e.gh_class));
  for (const auto& k : e.zero_residuals)
    ins.checks.push_back(check("expected.zero." + k, d.max_normalized.at(k), cfg.tol, d.pass.at(k)));
  for (const auto& k : e.positive_residuals)
    ins.checks.push_back(check("expected.positive." + k, d.max_normalized.at(k), cfg.tol, !d.pass.at(k)));
  return ins;
}

RunOutput finish(json report, const json& checks) {
  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  report["checks"] = checks;
  report["pass"] = pass;
  RunOutput out;
  out.exit_code = pass ? kExitPass : kExitResidualFailure;
  out.report = to_text(report);
  return out;
}

RunOutput run_inspect(const RunConfig& cfg) {
  Inspection ins = inspect(cfg);
  return finish(std::move(ins.report), ins.checks);
}

// Statements that hold on specific classes, checked at every point.
RunOutput run_verify(const RunConfig& cfg) {
  Inspection ins = inspect(cfg);
  const AlmostHermitianStructure s = cfg.geometry.build();
  const double tol = cfg.tol;
  AnalysisOptions opts;
  opts.degree = ins.diag.jet_degree;

  int mixed = 0, criterion_disagreements = 0, criteria_applied = 0;
  double nk_worst = 0.0, psi_worst = 0.0, laplacian_worst = 0.0, lck_worst = 0.0;
  bool nearly_kahler = false;
  for (const auto& p : ins.points) {
    const PointAnalysis pa = analyze_point(s, p, opts);
    const double cut = tol * pa.scale;
    const bool harmonic = section_residuals(pa).harmonic < cut;
    bool all_eq = true, any_eq = false;
    for (const auto& r : harmonicity_equivalents(pa)) {
      all_eq = all_eq && r.value < cut;
      any_eq = any_eq || r.value < cut;
    }
    if (all_eq != harmonic || any_eq != harmonic) ++mixed;
    for (ClassCondition c : {ClassCondition::W1W2W4, ClassCondition::QuasiKahler,
                             ClassCondition::LocallyConformalAlmostKahler, ClassCondition::W1W4, ClassCondition::Hermitian,
                             ClassCondition::HarmonicMapW1W2W4, ClassCondition::HarmonicMapQuasiKahler,
                             ClassCondition::HarmonicMapHermitian}) {
      const ClassCriterion cc = class_criteria(pa, c, tol);
      if (!cc.applicable) continue;
      ++criteria_applied;
      if ((cc.class_residual < cut) != (cc.harmonic_residual < cut)) ++criterion_disagreements;
    }
    const NearlyKahlerSuite nk = nearly_kahler_suite(pa, tol);
    if (nk.applicable) {
      nearly_kahler = true;
      nk_worst = std::max({nk_worst, nk.ecxy, nk.ecjxjy, nk.ecxyzw, nk.minimal_parallel});
      laplacian_worst = std::max(laplacian_worst, nk.laplacian_alpha);
      const double stated = 144.0 * nk.einstein_alpha;
      psi_worst = std::max(psi_worst, std::abs(nk.psi_norm_sq - stated) / std::abs(stated));
    }
    if (cfg.geometry.metric_kind == MetricKind::Conformal && cfg.geometry.n == 2)
      lck_worst = std::max(lck_worst, hermitian_harmonicity(pa).lck_laplacian / pa.scale);
  }
  json& checks = ins.checks;
  checks.push_back(check("harmonicity_equivalents.mixed_points", mixed, 0.0, mixed == 0));
  checks.push_back(
      check("class_criteria.disagreements", criterion_disagreements, 0.0, criterion_disagreements == 0));
  if (nearly_kahler) {
    checks.push_back(check("nearly_kahler.identities", nk_worst, tol, nk_worst < tol));
    checks.push_back(check("nearly_kahler.laplacian_4_alpha", laplacian_worst, 1e-5, laplacian_worst < 1e-5));
    checks.push_back(check("nearly_kahler.psi_norm_144_alpha", psi_worst, 1e-4, psi_worst < 1e-4));
  }
  if (cfg.geometry.metric_kind == MetricKind::Conformal) {
    double audit = 0.0, form = 0.0;
    for (const auto& p : ins.points) {
      audit = std::max(audit, conformal_curvature_audit(cfg.geometry.n, cfg.geometry.conformal_factor, p));
      const ConformalCheck c = conformal_example_check(cfg.geometry.n, cfg.geometry.conformal_factor, p);
      form = std::max(form, c.residual / (1.0 + c.closed_form.cwiseAbs().maxCoeff()));
    }
    checks.push_back(check("conformal.curvature_closed_form", audit, 1e-7, audit < 1e-7));
    checks.push_back(check("conformal.harmonic_map_form", form, 1e-6, form < 1e-6));
    if (cfg.geometry.n == 2) checks.push_back(check("conformal.lck_laplacian", lck_worst, 1e-6, lck_worst < 1e-6));
  }
  ins.report["criteria_applied"] = criteria_applied;
  return finish(std::move(ins.report), checks);
}

RunOutput run_classify(const RunConfig& cfg) {
  const std::vector<std::vector<double>> points = points_for(cfg);
  const Classification c = classify_gh(cfg.geometry.build(), points, cfg.tol);
  json r = header(cfg);
  r["points"] = points;
  r["class"] = c.label;
  r["component_max"] = c.component_max;
  r["torsion_max"] = c.torsion_max;
  json checks = json::array();
  const std::string& expected = cfg.geometry.expected.gh_class;
  if (!expected.empty()) checks.push_back(check("expected.class." + expected, 0.0, 0.0, c.label == expected));
  return finish(std::move(r), checks);
}

std::string grid_to_json(const JGrid& g) {
  json j;
  j["schema"] = 1;
  j["n"] = g.n();
  j["m"] = g.resolution();
  j["layout"] = "row-major matrix per node; node index = sum_k digit_k m^k";
  json nodes = json::array();
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const Mat J = g.J(node);
    std::vector<double> row;
    for (int i = 0; i < J.rows(); ++i)
      for (int k = 0; k < J.cols(); ++k) row.push_back(J(i, k));
    nodes.push_back(row);
  }
  j["nodes"] = nodes;
  return to_text(j);
}

RunOutput run_flow(const RunConfig& cfg) {
  JGrid start;
  try {
    start = JGrid::sample(cfg.geometry.build(), cfg.flow.m);
  } catch (const std::invalid_argument& e) {
    throw GeometryError(e.what());
  }
  const GradientCheck gc = gradient_check(start, cfg.flow.gradient_fields, 1e-4, cfg.point_seed + 1);
  FlowOptions opts;
  opts.max_iter = cfg.flow.max_iter;
  opts.tol_grad = cfg.flow.tol_grad;
  const FlowResult res = descend(start, opts);

  bool monotone = true;
  for (std::size_t i = 1; i < res.trace.size(); ++i) monotone = monotone && res.trace[i].energy <= res.trace[i - 1].energy;

  json r = header(cfg);
  json fp;
  fp["m"] = cfg.flow.m;
  fp["max_iter"] = cfg.flow.max_iter;
  fp["tol_grad"] = cfg.flow.tol_grad;
  fp["gradient_fields"] = cfg.flow.gradient_fields;
  fp["armijo"] = {{"initial_step", opts.initial_step}, {"shrink", opts.shrink},
                  {"sufficient_decrease", opts.sufficient_decrease}, {"grow", opts.grow}};
  r["flow"] = fp;
  json summary;
  summary["initial_energy"] = res.trace.front().energy;
  summary["final_energy"] = res.trace.back().energy;
  summary["iterations"] = res.trace.back().iteration;
  summary["terminal_grad_norm"] = res.trace.back().grad_norm;
  summary["terminal_pointwise_harmonic"] = res.terminal_pointwise;
  summary["terminal_pointwise_harmonic_naive"] = res.terminal_pointwise_naive;
  summary["max_drift"] = res.max_drift;
  summary["monotone"] = monotone;
  summary["converged"] = res.converged;
  summary["stalled"] = res.stalled;
  summary["stall_reason"] = res.stall_reason;
  summary["gradient_check"] = {{"sign", gc.sign}, {"max_rel_error", gc.max_rel_error}, {"fields", gc.fields}};
  r["summary"] = summary;
  json checks = json::array();
  checks.push_back(check("gradient_check", gc.max_rel_error, 1e-4, gc.max_rel_error < 1e-4));
  checks.push_back(check("monotone_energy", monotone ? 0.0 : 1.0, 0.0, monotone));
  checks.push_back(check("terminal_grad_norm", res.trace.back().grad_norm, cfg.flow.tol_grad, res.converged));
  RunOutput out = finish(std::move(r), checks);
  if (!res.converged) out.exit_code = kExitFlowStall;
  out.trace_csv = trace_csv(res.trace);
  out.grid_json = grid_to_json(res.grid);
  return out;
}

RunOutput error_output(int code, const std::string& kind, const std::string& message) {
  json r;
  r["schema"] = 1;
  r["error"] = {{"kind", kind}, {"message", message}};
  r["pass"] = false;
  RunOutput out;
  out.exit_code = code;
  out.report = to_text(r);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const CliOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string where = "config";
  check_keys(root, {"schema", "command", "geometry", "points", "tol", "flow", "out"}, where);
  if (!root.contains("schema") || !root["schema"].is_number_integer() || root["schema"].get<int>() != 1)
    throw ConfigError("config must declare \"schema\": 1");

  RunConfig cfg;
  cfg.command = get_or<std::string>(root, "command", "", where);
  if (!overrides.command.empty()) {
    if (!cfg.command.empty() && cfg.command != overrides.command)
      throw ConfigError("config command '" + cfg.command + "' does not match '" + overrides.command + "'");
    cfg.command = overrides.command;
  }
  static const std::set<std::string> commands{"inspect", "verify", "classify", "flow"};
  if (!commands.count(cfg.command)) throw ConfigError("command must be one of inspect, verify, classify, flow");

  cfg.tol = overrides.tol.value_or(get_or<double>(root, "tol", cfg.tol, where));
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  cfg.out = overrides.out.value_or(get_or<std::string>(root, "out", "", where));

  if (root.contains("points")) {
    const json& p = root["points"];
    check_keys(p, {"count", "seed", "list"}, "points");
    cfg.point_count = get_int(p, "count", cfg.point_count, "points");
    cfg.point_seed = get_seed(p, "seed", 0, "points");
    if (p.contains("list")) cfg.point_list = get<std::vector<std::vector<double>>>(p, "list", "points");
  }
  if (overrides.seed) cfg.point_seed = *overrides.seed;
  if (cfg.point_count < 1 || cfg.point_count > 10000) throw ConfigError("points.count must be in 1..10000");

  if (root.contains("flow")) {
    if (cfg.command != "flow") throw ConfigError("a flow block is only valid for the flow command");
    const json& f = root["flow"];
    check_keys(f, {"m", "max_iter", "tol_grad", "gradient_fields"}, "flow");
    cfg.flow.m = get_int(f, "m", cfg.flow.m, "flow");
    cfg.flow.max_iter = get_int(f, "max_iter", cfg.flow.max_iter, "flow");
    cfg.flow.tol_grad = get_or<double>(f, "tol_grad", cfg.flow.tol_grad, "flow");
    cfg.flow.gradient_fields = get_int(f, "gradient_fields", cfg.flow.gradient_fields, "flow");
  }
  if (cfg.flow.m < 4 || cfg.flow.m > 64) throw ConfigError("flow.m must be in 4..64");
  if (cfg.flow.max_iter < 0) throw ConfigError("flow.max_iter must be non-negative");
  if (!(cfg.flow.tol_grad > 0.0)) throw ConfigError("flow.tol_grad must be positive");
  if (cfg.flow.gradient_fields < 0) throw ConfigError("flow.gradient_fields must be non-negative");

  if (!root.contains("geometry")) throw ConfigError("config needs a geometry block");
  std::optional<std::uint64_t> geometry_seed;
  if (cfg.command == "flow") geometry_seed = overrides.seed;
  GeometryBlock gb = parse_geometry(root["geometry"], geometry_seed);
  cfg.geometry = std::move(gb.spec);
  cfg.geometry_json = gb.echo.dump();
  for (const auto& p : cfg.point_list)
    if (static_cast<int>(p.size()) != cfg.geometry.dim())
      throw ConfigError("explicit points must have " + std::to_string(cfg.geometry.dim()) + " coordinates");
  if (cfg.command == "flow" && cfg.geometry.dim() > 8) throw ConfigError("flow supports n <= 4");
  return cfg;
}

RunOutput run(const RunConfig& cfg) {
  try {
    if (cfg.command == "inspect") return run_inspect(cfg);
    if (cfg.command == "verify") return run_verify(cfg);
    if (cfg.command == "classify") return run_classify(cfg);
    if (cfg.command == "flow") return run_flow(cfg);
  } catch (const ExprEvalError& e) {
    throw GeometryError(e.what());
  } catch (const JetDomainError& e) {
    throw GeometryError(e.what());
  }
  throw ConfigError("unknown command '" + cfg.command + "'");
}

RunOutput execute(const std::string& json_text, const CliOverrides& overrides) {
  try {
    const RunConfig cfg = parse_config(json_text, overrides);
    RunOutput output = run(cfg);
    output.out = cfg.out;
    return output;
  } catch (const ConfigError& e) {
    RunOutput output = error_output(kExitConfigError, "config", e.what());
    output.out = overrides.out.value_or("");
    return output;
  } catch (const GeometryError& e) {
    RunOutput output = error_output(kExitGeometryError, "geometry", e.what());
    output.out = overrides.out.value_or("");
    return output;
  }
}

std::vector<std::string> write_outputs(const RunOutput& output, const std::string& out) {
  std::vector<std::string> written;
  if (out.empty()) return written;
  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    written.push_back(path.string());
  };
  const std::filesystem::path report(out);
  write(report, output.report);
  std::filesystem::path stem = report;
  stem.replace_extension();
  if (!output.trace_csv.empty()) write(stem.string() + ".trace.csv", output.trace_csv);
  if (!output.grid_json.empty()) write(stem.string() + ".grid.json", output.grid_json);
  return written;
}

}  // namespace aht
