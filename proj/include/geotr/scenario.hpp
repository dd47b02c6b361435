/// @file scenario.hpp
/// @brief Scenario files: parse, dispatch to an experiment, collect checks,
/// and write results.csv / summary.json.
#pragma once

#include "geotr/config.hpp"
#include "geotr/currents.hpp"
#include "geotr/expr.hpp"
#include "geotr/fields.hpp"
#include "geotr/flow.hpp"
#include "geotr/forms.hpp"
#include "geotr/frobenius.hpp"
#include "geotr/induction.hpp"
#include "geotr/io.hpp"
#include "geotr/transport.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace geotr::scenario {

namespace fs = std::filesystem;
using config::Section;

enum class ExitCode : int { Pass = 0, AssertionFailure = 1, ConfigError = 2, Instability = 3 };

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline Check check_le(std::string name, double value, double bound) {
  return {std::move(name), value, bound, std::isfinite(value) && value <= bound};
}
inline Check check_ge(std::string name, double value, double bound) {
  return {std::move(name), value, bound, std::isfinite(value) && value >= bound};
}

/// Long-format result table shared by every experiment.
inline io::CsvTable make_results_table() { return io::CsvTable({"case", "metric", "t", "s", "resolution", "value"}); }

struct Outcome {
  std::string scenario;
  std::string experiment;
  std::vector<Check> checks;
  io::CsvTable results = make_results_table();
  std::vector<std::string> warnings;
  std::string reason;
  ExitCode status = ExitCode::Pass;

  bool pass() const { return status == ExitCode::Pass; }

  void row(const std::string& c, const std::string& metric, double t, double s, int res, double value) {
    results.add({c, metric, io::CsvTable::num(t), io::CsvTable::num(s), std::to_string(res), io::CsvTable::num(value)});
  }
};

struct Overrides {
  std::optional<double> dt;
  std::optional<int> resolution;
  std::optional<unsigned long> seed;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"flow_check", "vae_compare", "gte_invariance", "gte_residual",
                                              "lie_duality", "frobenius",  "duhamel",        "alfven",
                                              "lifted_flow", "convergence"};
  return kinds;
}

/// Parsed scenario: the document plus the resolved common parameters.
struct Scenario {
  config::Document doc;
  fs::path base_dir;
  std::string name;
  std::string experiment;
  int dim = 2;
  unsigned long seed = 1;
  IntegratorConfig flow{};
  std::optional<int> resolution_override;

  const Section& section(const std::string& n) const { return doc.section(n); }
  const Section& numerics() const { return doc.section_or_empty("numerics"); }
  const Section& tolerances() const { return doc.section_or_empty("tolerances"); }

  /// Sections named "case.<id>" in lexical order.
  std::vector<const Section*> cases() const {
    std::vector<const Section*> out;
    for (const auto& [n, s] : doc.sections())
      if (n.rfind("case.", 0) == 0) out.push_back(&s);
    return out;
  }

  int resolution(const Section& s, const std::string& key, int fallback) const {
    if (resolution_override) return *resolution_override;
    return s.integer(key, fallback);
  }

  double tol(const std::string& key, double fallback) const {
    double v = tolerances().number(key, fallback);
    if (!(v > 0.0)) throw ConfigError("tolerance '" + key + "' must be positive");
    return v;
  }
};

inline Scenario load_text(std::string_view text, const fs::path& base_dir, const Overrides& ov = {}) {
  Scenario s;
  s.doc = config::parse(text);
  s.base_dir = base_dir;
  const Section& head = s.doc.section("scenario");
  s.name = head.string("name");
  s.experiment = head.string("experiment");
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == s.experiment;
  if (!known) throw ConfigError("unknown experiment kind '" + s.experiment + "'");
  s.dim = head.integer("dim", 2);
  if (s.dim != 2 && s.dim != 3) throw ConfigError("dim must be 2 or 3");
  s.seed = static_cast<unsigned long>(head.integer("seed", 1));
  if (ov.seed) s.seed = *ov.seed;
  s.flow.dt = s.numerics().number("dt", 1e-3);
  if (ov.dt) s.flow.dt = *ov.dt;
  if (!(s.flow.dt > 0.0)) throw ConfigError("dt must be positive");
  s.resolution_override = ov.resolution;
  if (ov.resolution && *ov.resolution < 4) throw ConfigError("resolution override must be at least 4");
  return s;
}

inline Scenario load(const fs::path& file, const Overrides& ov = {}) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str(), file.parent_path(), ov);
}

// ---------------------------------------------------------------------------
// Building blocks read from sections

/// A field spec is a builtin name, "zero", or components separated by ';'.
/// An array of strings is also accepted as one expression per component.
inline VectorField field_from_spec(const std::vector<std::string>& spec, int dim) {
  if (spec.size() == 1 && spec[0].find(';') == std::string::npos) {
    const std::string& n = spec[0];
    if (n == "zero") return constant_field(Vec::Zero(dim)).with_metadata({"zero", 0.0, 0.0, 0.0});
    return builtin_field(n, dim);
  }
  std::vector<std::string> parts;
  if (spec.size() == 1) {
    std::stringstream ss(spec[0]);
    std::string p;
    while (std::getline(ss, p, ';')) parts.push_back(p);
  } else {
    parts = spec;
  }
  if (static_cast<int>(parts.size()) != dim)
    throw ConfigError("field has " + std::to_string(parts.size()) + " components, expected " + std::to_string(dim));
  std::vector<FieldExpr> comps;
  for (const auto& p : parts) comps.push_back(parse_field_expr(p));
  return VectorField::from_expressions(std::move(comps), {}, {"expression", {}, {}, {}});
}

inline std::optional<Window> window_from(const Section& s, const std::string& prefix, int dim) {
  std::string rk = prefix + "_window_radius";
  if (!s.has(rk)) return std::nullopt;
  double r = s.number(rk);
  if (!(r > 0.0)) throw ConfigError(rk + " must be positive");
  Vec c = s.has(prefix + "_window_center") ? s.vec(prefix + "_window_center") : Vec::Zero(dim);
  require_dim(static_cast<int>(c.size()), dim, "window center");
  return Window{c, r};
}

/// Field `prefix` from a section, windowed if `<prefix>_window_radius` is set.
inline VectorField field_from(const Section& s, const std::string& prefix, int dim) {
  VectorField f = field_from_spec(s.strings(prefix), dim);
  if (f.dim() != dim) throw DimensionError("field '" + prefix + "' has the wrong dimension");
  if (auto w = window_from(s, prefix, dim)) return windowed(f, *w);
  return f;
}

inline Box box_from(const Section& s, int dim, int res) {
  double lo = s.number("box_lo", -2.0), hi = s.number("box_hi", 2.0);
  if (!(hi > lo)) throw ConfigError("box_hi must exceed box_lo");
  if (res < 4) throw ConfigError("resolution must be at least 4");
  return Box::cube(dim, lo, hi, res);
}

inline Vec vec_from_value(const config::Value& v, int dim, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + ": point must be an array");
  const auto& a = std::get<config::Array>(v.v);
  if (static_cast<int>(a.size()) != dim) throw DimensionError(what + ": point has the wrong dimension");
  Vec p(dim);
  for (int i = 0; i < dim; ++i) {
    if (!a[i].is_number()) throw ConfigError(what + ": coordinates must be numbers");
    p[i] = std::get<double>(a[i].v);
  }
  return p;
}

/// Initial curve chain: `initial` is one of segment, segments, circle,
/// circles, loop, chain_file.
inline CurveChain chain_from(const Section& s, int dim, const fs::path& base_dir) {
  std::string kind = s.string("initial");
  if (kind == "segment" || kind == "segments") {
    const auto& v = s.at("points");
    if (!v.is_array()) throw ConfigError("points must be an array");
    const auto& arr = std::get<config::Array>(v.v);
    std::vector<Curve> curves;
    if (kind == "segment") {
      Curve c{s.number("weight", 1.0), {}};
      for (const auto& p : arr) c.vertices.push_back(vec_from_value(p, dim, "points"));
      curves.push_back(std::move(c));
    } else {
      auto weights = s.numbers("weights", std::vector<double>(arr.size(), 1.0));
      if (weights.size() != arr.size()) throw ConfigError("weights must match the number of segments");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_array()) throw ConfigError("segments: each entry must be a list of points");
        Curve c{weights[i], {}};
        for (const auto& p : std::get<config::Array>(arr[i].v)) c.vertices.push_back(vec_from_value(p, dim, "points"));
        curves.push_back(std::move(c));
      }
    }
    return CurveChain(dim, std::move(curves));
  }
  if (kind == "circle" || kind == "circles") {
    if (dim != 2) throw DimensionError("circle initial data is two-dimensional");
    Vec c = s.has("center") ? s.vec("center") : Vec::Zero(2);
    int sides = s.integer("sides", 512);
    std::vector<double> radii = kind == "circle" ? std::vector<double>{s.number("radius")} : s.numbers("radii");
    auto weights = s.numbers("weights", std::vector<double>(radii.size(), 1.0));
    if (weights.size() != radii.size()) throw ConfigError("weights must match radii");
    std::vector<Curve> curves;
    for (std::size_t i = 0; i < radii.size(); ++i) curves.push_back(circle(c, radii[i], sides, weights[i]));
    return CurveChain(2, std::move(curves));
  }
  if (kind == "loop") {
    if (dim != 2) throw DimensionError("loop initial data is two-dimensional");
    return CurveChain(2, {square_loop(s.vec("lo"), s.number("side"), s.number("weight", 1.0))});
  }
  if (kind == "chain_file") return io::read_chain(base_dir / s.string("file"), dim);
  throw ConfigError("unknown initial data kind '" + kind + "'");
}

/// Initial current: a chain, or `initial = "field"` for an AC current.
inline Current current_from(const Section& s, int dim, const fs::path& base_dir, const Box& box) {
  if (s.string("initial") == "field") return ACCurrent::from_field(field_from(s, "current", dim), box, std::nullopt);
  return chain_from(s, dim, base_dir);
}

inline std::vector<Vec> random_points(const Box& box, std::size_t n, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec x(box.dim);
    for (int a = 0; a < box.dim; ++a) x[a] = box.lo[a] + u(rng) * box.extent[a];
    pts.push_back(x);
  }
  return pts;
}

inline std::string case_id(const Section& s) { return s.name().substr(std::string("case.").size()); }

// ---------------------------------------------------------------------------
// Experiments

/// Density bounds, semigroup property and Jacobian consistency per field.
inline void run_flow_check(const Scenario& sc, Outcome& out) {
  const double tol = sc.tol("density", 1e-6);
  const double semi_tol = sc.tol("semigroup", 1e-8);
  const double jac_tol = sc.tol("jacobian", 1e-5);
  auto cases = sc.cases();
  if (cases.empty()) throw ConfigError("flow_check needs at least one [case.*] section");
  for (const Section* cs : cases) {
    const std::string id = case_id(*cs);
    const int dim = cs->integer("dim", sc.dim);
    VectorField b = field_from(*cs, "field", dim);
    Box box = box_from(*cs, dim, 4);
    auto pts = random_points(box, static_cast<std::size_t>(cs->integer("samples", 1000)), sc.seed);
    double D = b.metadata().div_bound ? *b.metadata().div_bound : max_abs_divergence(b, pts);
    out.row(id, "div_bound", 0, 0, 0, D);
    for (double t : cs->numbers("times", {0.25, 0.5, 1.0})) {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& x : pts) {
        double rho = density_at(b, t, x, sc.flow);
        lo = std::min(lo, rho);
        hi = std::max(hi, rho);
      }
      out.row(id, "rho_min", t, 0, 0, lo);
      out.row(id, "rho_max", t, 0, 0, hi);
      out.checks.push_back(check_ge(id + ".rho_min_t" + io::CsvTable::num(t), lo, std::exp(-D * t) - tol));
      out.checks.push_back(check_le(id + ".rho_max_t" + io::CsvTable::num(t), hi, std::exp(D * t) + tol));
    }
    std::vector<Vec> few(pts.begin(), pts.begin() + static_cast<long>(std::min<std::size_t>(pts.size(), 50)));
    double semi = semigroup_defect(b, 0.25, 0.5, few, sc.flow);
    out.row(id, "semigroup_defect", 0.25, 0.5, 0, semi);
    out.checks.push_back(check_le(id + ".semigroup", semi, semi_tol));
    if (b.has_analytic_jacobian()) {
      double jerr = jacobian_self_test(b, pts);
      out.row(id, "jacobian_rel_error", 0, 0, 0, jerr);
      out.checks.push_back(check_le(id + ".jacobian_fd", jerr, jac_tol));
    }
  }
}

struct LevelError {
  int resolution = 0;
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceTable {
  std::vector<LevelError> levels;
  std::vector<double> orders;  // between consecutive levels
  bool exact = false;           // every error at roundoff level
  bool monotone = true;
};

inline ConvergenceTable make_convergence_table(std::vector<LevelError> levels, double exact_floor = 1e-12) {
  ConvergenceTable t;
  t.levels = std::move(levels);
  t.exact = true;
  for (const auto& l : t.levels) t.exact = t.exact && l.error <= exact_floor;
  for (std::size_t k = 1; k < t.levels.size(); ++k) {
    t.monotone = t.monotone && t.levels[k].error < t.levels[k - 1].error;
    t.orders.push_back(std::log2(t.levels[k - 1].error / t.levels[k].error));
  }
  return t;
}

/// Eulerian VAE solutions against the Lagrangian formula on a sequence of
/// resolutions.
inline ConvergenceTable vae_eulerian_study(const Scenario& sc, const Section& s, const std::vector<int>& res) {
  VectorField b = field_from(s, "field", sc.dim);
  VectorField vbar = field_from(s, "vbar", sc.dim);
  double T = s.number("horizon", 1.0);
  IntegratorConfig ref = sc.flow;
  ref.dt = s.number("reference_dt", sc.flow.dt);
  EulerianConfig ec{s.number("cfl", 0.5), 0.0};
  std::vector<LevelError> lv;
  for (int n : res) {
    Box box = box_from(s, sc.dim, n);
    auto st = vae_eulerian(b, vbar, box, {T}, ec);
    auto exact = lagrangian_samples(b, vbar, box, T, ref, false);
    lv.push_back({n, box.min_h(), l2_difference(box, st.back().samples, exact)});
  }
  return make_convergence_table(std::move(lv));
}

/// Induction solutions against the frozen-field formula.
inline ConvergenceTable alfven_study(const Scenario& sc, const Section& s, const std::vector<int>& res) {
  VectorField V = field_from(s, "velocity", 3);
  VectorField B = field_from(s, "bfield", 3);
  double T = s.number("horizon", 0.5);
  IntegratorConfig ref = sc.flow;
  ref.dt = s.number("reference_dt", sc.flow.dt);
  EulerianConfig ec{s.number("cfl", 0.5), 0.0};
  std::vector<LevelError> lv;
  for (int n : res) {
    Box box = box_from(s, 3, n);
    auto r = induction_solve(V, B, box, {T}, ec);
    auto exact = frozen_field_samples(V, B, box, T, ref);
    lv.push_back({n, box.min_h(), l2_difference(box, r.states.back().samples, exact)});
  }
  return make_convergence_table(std::move(lv));
}

inline void report_convergence(const ConvergenceTable& tab, const std::string& id, double order_lo, double order_hi,
                               Outcome& out) {
  for (std::size_t k = 0; k < tab.levels.size(); ++k) {
    out.row(id, "grid_spacing", 0, 0, tab.levels[k].resolution, tab.levels[k].h);
    out.row(id, "l2_error", 0, 0, tab.levels[k].resolution, tab.levels[k].error);
    if (k > 0) out.row(id, "observed_order", 0, 0, tab.levels[k].resolution, tab.orders[k - 1]);
  }
  if (tab.exact) {
    out.warnings.push_back(id + ": errors at roundoff level; order undefined, reported as exact");
    out.checks.push_back(check_le(id + ".exact_error", tab.levels.back().error, 1e-12));
    return;
  }
  if (!tab.monotone) out.warnings.push_back(id + ": errors are not monotone under refinement");
  out.checks.push_back(check_ge(id + ".monotone", tab.monotone ? 1.0 : 0.0, 1.0));
  if (!tab.orders.empty()) {
    out.checks.push_back(check_ge(id + ".order_min", tab.orders.back(), order_lo));
    out.checks.push_back(check_le(id + ".order_max", tab.orders.back(), order_hi));
  }
}

inline std::vector<int> resolutions_of(const Scenario& sc, const Section& s, std::vector<int> fallback) {
  std::vector<int> res;
  if (s.has("resolutions"))
    for (double r : s.numbers("resolutions")) res.push_back(static_cast<int>(r));
  else
    res = std::move(fallback);
  if (sc.resolution_override) {
    int base = *sc.resolution_override;
    for (std::size_t k = 0; k < res.size(); ++k) res[k] = base << k;
  }
  return res;
}

/// Closed-form cases (`reference` expression in x, y, z, t) and/or an
/// Eulerian-vs-Lagrangian refinement study in [eulerian].
inline void run_vae_compare(const Scenario& sc, Outcome& out) {
  for (const Section* cs : sc.cases()) {
    const std::string id = case_id(*cs);
    VectorField b = field_from(*cs, "field", sc.dim);
    VectorField vbar = field_from(*cs, "vbar", sc.dim);
    VectorField ref = field_from(*cs, "reference", sc.dim);
    Box box = box_from(*cs, sc.dim, 4);
    auto pts = random_points(box, static_cast<std::size_t>(cs->integer("samples", 200)), sc.seed);
    const double tol = cs->number("tolerance", sc.tol("closed_form", 1e-7));
    for (double t : cs->numbers("times", {0.5, 1.0})) {
      auto got = vae_lagrangian(b, vbar, t, pts, sc.flow);
      double err = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, (got[i] - ref(t, pts[i])).norm());
      out.row(id, "max_error", t, 0, 0, err);
      out.checks.push_back(check_le(id + ".closed_form_t" + io::CsvTable::num(t), err, tol));
    }
  }
  if (sc.doc.has("eulerian")) {
    const Section& s = sc.section("eulerian");
    auto tab = vae_eulerian_study(sc, s, resolutions_of(sc, s, {64, 128, 256}));
    report_convergence(tab, "eulerian", s.number("order_min", 1.7), s.number("order_max", 2.3), out);
    if (!tab.exact)
      out.checks.push_back(check_le("eulerian.final_l2", tab.levels.back().error, sc.tol("final_l2", 1e-3)));
  }
  if (out.checks.empty()) throw ConfigError("vae_compare needs [case.*] sections or an [eulerian] section");
}

/// <L_b T_v, omega> from the boundary formula against the explicit
/// (-[b,v] + (div b) v) L^d, on random (b, v, omega) triples.
inline void run_lie_duality(const Scenario& sc, Outcome& out) {
  const Section& s = sc.section("duality");
  auto bspecs = s.strings("b_fields");
  auto vspecs = s.strings("v_fields");
  if (bspecs.empty() || vspecs.empty()) throw ConfigError("b_fields and v_fields must be non-empty");
  Box box = box_from(s, sc.dim, sc.resolution(s, "resolution", 128));
  auto win = window_from(s, "v", sc.dim);
  auto forms = form_catalog(sc.dim, s.number("form_scale", 0.5));
  const int n = s.integer("triples", 20);
  const double tol = sc.tol("duality", 1e-6);
  std::mt19937_64 rng(sc.seed);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& bs = bspecs[rng() % bspecs.size()];
    const auto& vs = vspecs[rng() % vspecs.size()];
    const auto& w = forms[rng() % forms.size()];
    VectorField b = field_from_spec({bs}, sc.dim);
    ACCurrent T = ACCurrent::from_field(field_from_spec({vs}, sc.dim), box, win);
    double lhs = lie_derivative_pair(T, b, w);
    double rhs = pair(lie_derivative_ac(T, b), w);
    double diff = std::abs(lhs - rhs);
    worst = std::max(worst, diff);
    out.row("triple" + std::to_string(k) + ":" + bs + "|" + vs + "|" + w.label, "abs_difference", 0, 0,
            box.n[0], diff);
  }
  out.checks.push_back(check_le("duality.max_difference", worst, tol));
}

inline void run_gte_invariance(const Scenario& sc, Outcome& out) {
  for (const Section* cs : sc.cases()) {
    const std::string id = case_id(*cs);
    VectorField b = field_from(*cs, "field", sc.dim);
    CurveChain T = chain_from(*cs, sc.dim, sc.base_dir);
    auto forms = form_catalog(sc.dim, cs->number("form_scale", 0.5));
    Box grid = box_from(*cs, sc.dim, 16);
    auto times = cs->numbers("times", {0.5, 1.0});
    auto rep = invariance_defect(b, T, times, forms, grid, sc.flow);
    out.row(id, "hypothesis_residual", 0, 0, 0, rep.hypothesis_residual);
    for (std::size_t k = 0; k < times.size(); ++k) out.row(id, "defect", times[k], 0, 0, rep.distances[k]);
    double dmax = 0.0;
    for (double d : rep.distances) dmax = std::max(dmax, d);
    if (cs->string("expect", "invariant") == "invariant") {
      out.checks.push_back(check_le(id + ".defect", dmax, cs->number("tolerance", sc.tol("invariance", 1e-6))));
      out.checks.push_back(
          check_le(id + ".hypothesis_residual", rep.hypothesis_residual, cs->number("tolerance", sc.tol("invariance", 1e-6))));
    } else {
      out.checks.push_back(check_ge(id + ".hypothesis_residual", rep.hypothesis_residual, cs->number("min_residual", 0.1)));
      out.checks.push_back(check_ge(id + ".final_defect", rep.distances.back(), cs->number("min_defect", 0.1)));
      bool grows = true;
      for (std::size_t k = 1; k < rep.distances.size(); ++k) grows = grows && rep.distances[k] > rep.distances[k - 1];
      out.checks.push_back(check_ge(id + ".defect_grows", grows ? 1.0 : 0.0, 1.0));
    }
  }
  if (out.checks.empty()) throw ConfigError("gte_invariance needs [case.*] sections");
}

inline double max_weak_residual(const VectorField& b, const Current& T0, double horizon, double step,
                                const std::vector<TestForm1>& forms, const IntegratorConfig& cfg) {
  auto path = gte_solve(b, T0, uniform_times(0.0, horizon, step), cfg);
  double m = 0.0;
  for (const auto& w : forms) m = std::max(m, std::abs(weak_residual(path, b, w, TimeBump{0.05 * horizon, 0.95 * horizon})));
  return m;
}

/// Weak GTE residual of gte_solve paths at time step dt and dt/2.
inline void run_gte_residual(const Scenario& sc, Outcome& out) {
  for (const Section* cs : sc.cases()) {
    const std::string id = case_id(*cs);
    VectorField b = field_from(*cs, "field", sc.dim);
    Box box = box_from(*cs, sc.dim, sc.resolution(*cs, "resolution", 64));
    Current T0 = current_from(*cs, sc.dim, sc.base_dir, box);
    auto forms = form_catalog(sc.dim, cs->number("form_scale", 1.0));
    double horizon = cs->number("horizon", 1.0);
    double step = cs->number("time_step", sc.numerics().number("time_step", 1e-2));
    double r1 = max_weak_residual(b, T0, horizon, step, forms, sc.flow);
    double r2 = max_weak_residual(b, T0, horizon, 0.5 * step, forms, sc.flow);
    out.row(id, "weak_residual", horizon, step, 0, r1);
    out.row(id, "weak_residual", horizon, 0.5 * step, 0, r2);
    out.checks.push_back(check_le(id + ".residual", r1, sc.tol("residual", 1e-4)));
    out.checks.push_back(check_ge(id + ".halving_ratio", r2 > 0.0 ? r1 / r2 : INFINITY, 2.0));
  }
  if (out.checks.empty()) throw ConfigError("gte_residual needs [case.*] sections");
}

/// Commuting pairs (defect small) and closed-form negative controls.
inline void run_frobenius(const Scenario& sc, Outcome& out) {
  for (const Section* cs : sc.cases()) {
    const std::string id = case_id(*cs);
    VectorField b = field_from(*cs, "b", sc.dim);
    VectorField v = field_from(*cs, "v", sc.dim);
    Box box = box_from(*cs, sc.dim, 16);
    Box inner = box;
    auto pts = halton_points(box, static_cast<std::size_t>(cs->integer("samples", 200)));
    auto ts = cs->numbers("t", {0.25, 0.5, 1.0});
    auto ss = cs->numbers("s", {0.25, 0.5, 1.0});
    CommutatorConfig cc;
    cc.flow = sc.flow;
    cc.tolerance = cs->number("tolerance", sc.tol("commutator", 1e-6));
    auto rep = commutator_defect(b, v, ts, ss, pts, inner, cc);
    for (const auto& p : rep.pairs) {
      out.row(id, "max_defect", p.t, p.s, 0, p.max_defect);
      out.row(id, "mean_defect", p.t, p.s, 0, p.mean_defect);
    }
    out.row(id, "bracket_residual", 0, 0, box.n[0], rep.bracket_residual);
    out.row(id, "concentration_ratio", 0, 0, 0, rep.concentration_ratio);
    out.checks.push_back(check_le(id + ".non_concentration", rep.concentration_ratio,
                                  rep.concentration_bound * (1.0 + cc.concentration_slack)));
    std::string closed = cs->string("closed_form", "");
    if (closed.empty()) {
      out.checks.push_back(check_le(id + ".bracket_residual", rep.bracket_residual, sc.tol("bracket", 1e-8)));
      out.checks.push_back(check_le(id + ".max_defect", rep.max_defect, cc.tolerance));
    } else if (closed == "rotation_translation") {
      // |R_t(x + s c) - (R_t x + s c)| = 2 s |c| |sin(t/2)|
      Vec c = v(0.0, Vec::Zero(sc.dim));
      double dev = 0.0;
      for (const auto& p : rep.pairs) {
        double expect = 2.0 * p.s * c.norm() * std::abs(std::sin(p.t / 2.0));
        dev = std::max({dev, std::abs(p.max_defect - expect), std::abs(p.mean_defect - expect)});
      }
      out.checks.push_back(check_le(id + ".closed_form_deviation", dev, cc.tolerance));
      out.checks.push_back(check_ge(id + ".bracket_residual", rep.bracket_residual, cs->number("min_bracket", 0.5)));
    } else {
      throw ConfigError("unknown closed_form '" + closed + "'");
    }
  }
  if (out.checks.empty()) throw ConfigError("frobenius needs [case.*] sections");
}

/// Composite GL5 in s of <(X_{t-s})_* R_s, omega> with each node pushed
/// separately; the refinement oracle for Duhamel sums.
inline double duhamel_oracle(const VectorField& b, const std::function<CurveChain(double)>& source, double t,
                             const TestForm1& w, int panels, const IntegratorConfig& cfg) {
  double total = 0.0;
  const double h = t / panels;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < 5; ++q) {
      double s = (p + GaussLegendre5::nodes[q]) * h;
      total += h * GaussLegendre5::weights[q] * pair(pushforward(source(s), FlowMap{b, t - s, cfg}), w);
    }
  return total;
}

inline void run_duhamel(const Scenario& sc, Outcome& out) {
  const Section& s = sc.section("duhamel");
  VectorField b = field_from(s, "field", sc.dim);
  CurveChain T0 = chain_from(s, sc.dim, sc.base_dir);
  const Section& src = sc.section("source");
  CurveChain R = chain_from(src, sc.dim, sc.base_dir);
  VectorField mover = src.has("mover") ? field_from(src, "mover", sc.dim) : constant_field(Vec::Zero(sc.dim));
  auto source_at = [&](double t) { return t == 0.0 ? R : pushforward(R, FlowMap{mover, t, sc.flow}); };
  auto forms = form_catalog(sc.dim, s.number("form_scale", 1.0));
  const double horizon = s.number("horizon", 1.0);
  const double step = s.number("time_step", sc.numerics().number("time_step", 1e-2));
  auto times = uniform_times(0.0, horizon, step);

  // (a) zero source reduces to the pushforward of the initial current
  CurrentPath zero;
  zero.times = times;
  zero.currents.assign(times.size(), Current{CurveChain(sc.dim)});
  auto with_zero = duhamel_solve(b, T0, zero, sc.flow);
  auto plain = gte_solve(b, T0, times, sc.flow);
  double red = 0.0;
  for (std::size_t k = 0; k < times.size(); k += std::max<std::size_t>(1, times.size() / 10))
    for (const auto& w : forms) red = std::max(red, std::abs(pair(with_zero.currents[k], w) - pair(plain.currents[k], w)));
  out.row("zero_source", "max_pairing_difference", horizon, step, 0, red);
  out.checks.push_back(check_le("zero_source.reduction", red, sc.tol("reduction", 1e-10)));

  // source path on the grid
  CurrentPath sources;
  sources.times = times;
  for (double t : times) sources.currents.emplace_back(source_at(t));

  // (b) b = 0: T_t = T0 + int_0^t R_s ds, compared with trapezoid sums of pairings
  VectorField zero_b = constant_field(Vec::Zero(sc.dim));
  auto still = duhamel_solve(zero_b, T0, sources, sc.flow);
  std::vector<double> acc(forms.size(), 0.0);
  double still_err = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t f = 0; f < forms.size(); ++f) {
      double direct = pair(T0, forms[f]);
      if (k > 0) {
        std::vector<double> sub(times.begin(), times.begin() + static_cast<long>(k) + 1);
        auto wts = trapezoid_weights(sub);
        double q = 0.0;
        for (std::size_t j = 0; j <= k; ++j) q += wts[j] * pair(sources.currents[j], forms[f]);
        direct += q;
      }
      if (k % std::max<std::size_t>(1, times.size() / 10) == 0 || k + 1 == times.size())
        still_err = std::max(still_err, std::abs(pair(still.currents[k], forms[f]) - direct));
    }
  }
  out.row("zero_velocity", "max_pairing_difference", horizon, step, 0, still_err);
  out.checks.push_back(check_le("zero_velocity.direct_quadrature", still_err, sc.tol("direct", 1e-8)));

  // (c) full solve at the final time against the GL5 refinement oracle
  auto full = duhamel_solve(b, T0, sources, sc.flow);
  const int panels = s.integer("oracle_panels", 16);
  double orc = 0.0;
  for (const auto& w : forms) {
    double expect = pair(pushforward(T0, FlowMap{b, horizon, sc.flow}), w) + duhamel_oracle(b, source_at, horizon, w, panels, sc.flow);
    orc = std::max(orc, std::abs(pair(full.currents.back(), w) - expect));
  }
  out.row("oracle", "max_pairing_difference", horizon, step, panels, orc);
  out.checks.push_back(check_le("oracle.agreement", orc, sc.tol("oracle", 1e-5)));
}

inline void run_lifted_flow(const Scenario& sc, Outcome& out) {
  for (const Section* cs : sc.cases()) {
    const std::string id = case_id(*cs);
    VectorField b = field_from(*cs, "field", sc.dim);
    CurveChain eta = chain_from(*cs, sc.dim, sc.base_dir);
    auto forms = form_catalog(sc.dim, cs->number("form_scale", 1.0));
    double t = cs->number("t", 1.0);
    PushOptions po;
    po.refine_tol = cs->number("refine_tol", 1e-5);
    auto rep = lifted_pushforward_check(b, eta, t, forms, sc.flow, po, cs->integer("quadrature_subdivisions", 64));
    for (const auto& w : rep.warnings) out.warnings.push_back(id + ": " + w);
    out.row(id, "pairing_mismatch", t, 0, 0, rep.pairing_mismatch);
    out.row(id, "lifted_mass", t, 0, 0, rep.lifted_mass);
    out.row(id, "jacobian_mass", t, 0, 0, rep.jacobian_mass);
    out.checks.push_back(check_le(id + ".pairing_mismatch", rep.pairing_mismatch, sc.tol("pairing", 1e-6)));
    out.checks.push_back(check_le(id + ".mass_identity", rep.mass_mismatch, sc.tol("mass", 1e-5)));
    if (cs->has("expected_mass")) {
      double e = cs->number("expected_mass");
      double dev = std::max(std::abs(rep.lifted_mass - e), std::abs(rep.jacobian_mass - e));
      out.checks.push_back(check_le(id + ".expected_mass", dev, sc.tol("mass", 1e-5)));
    }
  }
  if (out.checks.empty()) throw ConfigError("lifted_flow needs [case.*] sections");
}

inline std::vector<Vec> seeds_from(const Section& s, int dim) {
  std::vector<Vec> seeds;
  const auto& v = s.at("seeds");
  if (!v.is_array()) throw ConfigError("seeds must be an array of points");
  for (const auto& p : std::get<config::Array>(v.v)) seeds.push_back(vec_from_value(p, dim, "seeds"));
  return seeds;
}

inline void run_alfven(const Scenario& sc, Outcome& out) {
  if (sc.dim != 3) throw ConfigError("alfven scenarios are three-dimensional");
  const Section& s = sc.section("alfven");
  auto res = resolutions_of(sc, s, {32, 64});
  auto tab = alfven_study(sc, s, res);
  report_convergence(tab, "induction", s.number("order_min", 1.7), s.number("order_max", 2.3), out);
  out.checks.push_back(check_le("induction.l2_base", tab.levels.front().error,
                                sc.tol("l2_base", 5e-3) * std::pow(static_cast<double>(res.front()) / s.number("bound_resolution", res.front()), -2.0)));

  // divergence and frozen lines on the finest grid
  VectorField V = field_from(s, "velocity", 3);
  VectorField B = field_from(s, "bfield", 3);
  double T = s.number("horizon", 0.5);
  Box fine = box_from(s, 3, res.back());
  auto r = induction_solve(V, B, fine, {T}, EulerianConfig{s.number("cfl", 0.5), 0.0});
  out.row("induction", "max_div", T, 0, res.back(), r.max_div.back());
  out.checks.push_back(check_le("induction.max_div", r.max_div.back(), sc.tol("divergence", 1e-10)));
  if (s.has("seeds")) {
    FrozenLineConfig fc;
    fc.flow = sc.flow;
    fc.line.length = s.number("line_length", 0.8);
    fc.line.ds = s.number("line_ds", 1e-2);
    fc.line.region = fine;
    VectorField Bt = r.states.back().as_field(Interp::Cubic);
    auto rep = frozen_line_compare(V, B, Bt, T, seeds_from(s, 3), fc);
    for (const auto& w : rep.warnings) out.warnings.push_back("frozen_lines: " + w);
    out.row("frozen_lines", "geometric_deviation", T, 0, res.back(), rep.max_geometric);
    out.row("frozen_lines", "parametric_deviation", T, 0, res.back(), rep.max_parametric);
    const double tol = sc.tol("frozen_lines", 1e-3);
    out.checks.push_back(check_le("frozen_lines.geometric", rep.max_geometric, tol));
    out.checks.push_back(check_le("frozen_lines.parametric", rep.max_parametric, tol));
  }
  if (sc.doc.has("compressible")) {
    const Section& c = sc.section("compressible");
    VectorField Vc = field_from(c, "velocity", 3);
    VectorField Bc = field_from(c, "bfield", 3);
    double tc = c.number("horizon", T);
    IntegratorConfig fcfg = sc.flow;
    // B_t = rho (grad X_t . Bbar)(X_{-t} y), from the flow
    VectorField Bt = VectorField::analytic(
        3, [Vc, Bc, tc, fcfg](double, const Vec& y) { return lagrangian_push_vector(Vc, Bc, tc, y, fcfg, true); }, {},
        false, {"frozen_field", {}, {}, {}});
    FrozenLineConfig fc;
    fc.flow = sc.flow;
    fc.line.length = c.number("line_length", 0.8);
    fc.line.ds = c.number("line_ds", 1e-2);
    auto seeds = seeds_from(c, 3);
    auto raw = frozen_line_compare(Vc, Bc, Bt, tc, seeds, fc);
    fc.rescale_by_density = true;
    auto scaled = frozen_line_compare(Vc, Bc, Bt, tc, seeds, fc);
    out.row("compressible", "raw_geometric_deviation", tc, 0, 0, raw.max_geometric);
    out.row("compressible", "raw_parametric_deviation", tc, 0, 0, raw.max_parametric);
    out.row("compressible", "rescaled_geometric_deviation", tc, 0, 0, scaled.max_geometric);
    out.row("compressible", "rescaled_parametric_deviation", tc, 0, 0, scaled.max_parametric);
    const double tol = sc.tol("frozen_lines", 1e-3);
    out.checks.push_back(check_ge("compressible.raw_fails", raw.max_parametric, c.number("min_raw_deviation", 10.0 * tol)));
    out.checks.push_back(check_le("compressible.rescaled_geometric", scaled.max_geometric, tol));
    out.checks.push_back(check_le("compressible.rescaled_parametric", scaled.max_parametric, tol));
  }
}

/// Refinement study on a vae_compare [eulerian] or alfven section with
/// `levels` resolutions starting from the configured base.
inline void run_convergence_study(const Scenario& sc, int levels, Outcome& out) {
  if (levels < 2) throw ConfigError("a convergence study needs at least 2 levels");
  std::string target;
  const Section* s = nullptr;
  if (sc.doc.has("eulerian")) {
    target = "vae";
    s = &sc.section("eulerian");
  } else if (sc.doc.has("alfven")) {
    target = "induction";
    s = &sc.section("alfven");
  } else {
    throw ConfigError("scenario has no refinable section ([eulerian] or [alfven])");
  }
  auto base = resolutions_of(sc, *s, target == "vae" ? std::vector<int>{64} : std::vector<int>{16});
  int r0 = base.front();
  if (r0 <= 0 || (r0 & (r0 - 1)) != 0) throw ConfigError("convergence studies need a power-of-two base resolution");
  std::vector<int> res;
  for (int k = 0; k < levels; ++k) res.push_back(r0 << k);
  auto tab = target == "vae" ? vae_eulerian_study(sc, *s, res) : alfven_study(sc, *s, res);
  report_convergence(tab, target, s->number("order_min", 1.7), s->number("order_max", 2.3), out);
}

inline void run_convergence(const Scenario& sc, Outcome& out) {
  run_convergence_study(sc, sc.section("convergence").integer("levels", 3), out);
}

// ---------------------------------------------------------------------------
// Execution and output

inline nlohmann::json summary_json(const Outcome& o) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : o.checks) checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
  return {{"scenario", o.scenario}, {"experiment", o.experiment}, {"pass", o.pass()},     {"checks", checks},
          {"reason", o.reason},     {"exit_code", static_cast<int>(o.status)}, {"warnings", o.warnings}};
}

inline void finalize(Outcome& o) {
  if (o.status != ExitCode::Pass) return;
  std::vector<std::string> failed;
  for (const auto& c : o.checks)
    if (!c.pass) failed.push_back(c.name);
  if (o.checks.empty()) failed.push_back("no checks were produced");
  if (!failed.empty()) {
    o.status = ExitCode::AssertionFailure;
    o.reason = "assertion failed:";
    for (const auto& f : failed) o.reason += " " + f;
  }
}

/// Runs one parsed scenario. `levels` > 0 turns it into a convergence study.
inline Outcome execute(const Scenario& sc, int levels = 0) {
  Outcome o;
  o.scenario = sc.name;
  o.experiment = levels > 0 ? "convergence" : sc.experiment;
  try {
    if (levels > 0) run_convergence_study(sc, levels, o);
    else if (sc.experiment == "flow_check") run_flow_check(sc, o);
    else if (sc.experiment == "vae_compare") run_vae_compare(sc, o);
    else if (sc.experiment == "lie_duality") run_lie_duality(sc, o);
    else if (sc.experiment == "gte_invariance") run_gte_invariance(sc, o);
    else if (sc.experiment == "gte_residual") run_gte_residual(sc, o);
    else if (sc.experiment == "frobenius") run_frobenius(sc, o);
    else if (sc.experiment == "duhamel") run_duhamel(sc, o);
    else if (sc.experiment == "lifted_flow") run_lifted_flow(sc, o);
    else if (sc.experiment == "alfven") run_alfven(sc, o);
    else if (sc.experiment == "convergence") run_convergence(sc, o);
  } catch (const InstabilityError& e) {
    o.status = ExitCode::Instability;
    o.reason = std::string("numeric instability: ") + e.what();
  } catch (const IntegrationError& e) {
    o.status = ExitCode::Instability;
    o.reason = std::string("integration failure: ") + e.what();
  } catch (const ParseError& e) {
    o.status = ExitCode::ConfigError;
    o.reason = std::string("config error: ") + e.what();
  } catch (const Error& e) {
    o.status = ExitCode::ConfigError;
    o.reason = std::string("config error: ") + e.what();
  } catch (const std::exception& e) {
    o.status = ExitCode::ConfigError;
    o.reason = std::string("config error: ") + e.what();
  }
  finalize(o);
  return o;
}

inline void write_outputs(const Outcome& o, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "results.csv");
    o.results.write(csv);
  }
  std::ofstream js(dir / "summary.json");
  js << summary_json(o).dump(2) << '\n';
}

/// Load + execute + write; config problems are reported as outcomes too.
inline Outcome run_file(const fs::path& file, const fs::path& out_root, const Overrides& ov = {}, int levels = 0) {
  Outcome o;
  try {
    Scenario sc = load(file, ov);
    o = execute(sc, levels);
  } catch (const Error& e) {
    o.scenario = file.stem().string();
    o.experiment = "unknown";
    o.status = ExitCode::ConfigError;
    o.reason = std::string("config error: ") + e.what();
  }
  write_outputs(o, out_root / (o.scenario.empty() ? file.stem().string() : o.scenario));
  return o;
}

}  // namespace geotr::scenario
