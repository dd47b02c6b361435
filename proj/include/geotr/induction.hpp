/// @file induction.hpp
/// @brief Ideal induction equation dB/dt = curl(V x B) on a periodic 3D box,
/// field-line tracing, and the frozen-in field line comparison.
#pragma once

#include "geotr/currents.hpp"
#include "geotr/flow.hpp"
#include "geotr/transport.hpp"

#include <string>
#include <vector>

namespace geotr {

struct InductionResult {
  std::vector<EulerianGridState> states;
  std::vector<double> max_div;  // max |div B| at t = 0 and after each output time
};

/// Central-difference max |div| of node samples.
inline double max_abs_divergence(const Box& box, const std::vector<double>& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    double div = 0.0;
    for (int a = 0; a < box.dim; ++a) div += detail::central_diff(box, s, i, a, a);
    m = std::max(m, std::abs(div));
  }
  return m;
}

/// RK4 in time, periodic central differences for the curl of E = V x B.
/// The discrete divergence of a central-difference curl vanishes identically,
/// so max |div B| stays at its initial value up to roundoff.
inline InductionResult induction_solve(const VectorField& V, const VectorField& Bbar, const Box& box,
                                       const std::vector<double>& times, const EulerianConfig& cfg = {}) {
  if (box.dim != 3 || V.dim() != 3 || Bbar.dim() != 3)
    throw DimensionError("induction_solve requires three dimensions");
  if (!V.is_autonomous()) throw ConfigError("induction_solve: velocity must be autonomous");
  const std::size_t N = box.num_nodes();
  std::vector<Vec> Vn(N);
  double speed = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    Vn[i] = V(0.0, box.node(i));
    speed = std::max(speed, Vn[i].norm());
  }
  const double dt_max = detail::stable_dt(speed, box, cfg);

  std::vector<double> y(N * 3);
  for (std::size_t i = 0; i < N; ++i) {
    Vec b = Bbar(0.0, box.node(i));
    for (int c = 0; c < 3; ++c) y[i * 3 + c] = b[c];
  }
  std::vector<double> E(N * 3);
  auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& out) {
    for (std::size_t i = 0; i < N; ++i) {
      const Vec& v = Vn[i];
      const double bx = s[i * 3], by = s[i * 3 + 1], bz = s[i * 3 + 2];
      E[i * 3 + 0] = v[1] * bz - v[2] * by;
      E[i * 3 + 1] = v[2] * bx - v[0] * bz;
      E[i * 3 + 2] = v[0] * by - v[1] * bx;
    }
    for (std::size_t i = 0; i < N; ++i) {
      out[i * 3 + 0] = detail::central_diff(box, E, i, 2, 1) - detail::central_diff(box, E, i, 1, 2);
      out[i * 3 + 1] = detail::central_diff(box, E, i, 0, 2) - detail::central_diff(box, E, i, 2, 0);
      out[i * 3 + 2] = detail::central_diff(box, E, i, 1, 0) - detail::central_diff(box, E, i, 0, 1);
    }
  };
  InductionResult res;
  res.max_div.push_back(max_abs_divergence(box, y));
  res.states = detail::march(rhs, box, std::move(y), 0.0, times, dt_max, "induction_solve");
  for (const auto& st : res.states) res.max_div.push_back(max_abs_divergence(box, st.samples));
  return res;
}

/// Frozen-field reference B_t(y) = rho_t(y) (grad X_t . Bbar)(X_{-t} y) on
/// the box nodes.
inline std::vector<double> frozen_field_samples(const VectorField& V, const VectorField& Bbar, const Box& box,
                                                double t, const IntegratorConfig& cfg) {
  return lagrangian_samples(V, Bbar, box, t, cfg, true);
}

// ---------------------------------------------------------------------------
// Field lines

struct LineTraceConfig {
  double length = 1.0;     // arclength (normalised mode) or parameter span
  double ds = 1e-2;
  double zero_tol = 1e-8;  // |B| below this ends the trace
  std::optional<Box> region;  // leaving it truncates the trace
};

struct TracedLine {
  std::vector<Vec> points;
  bool truncated = false;  // left the region or hit a zero of B
};

namespace detail {

inline bool inside(const std::optional<Box>& region, const Vec& x) {
  if (!region) return true;
  for (int a = 0; a < region->dim; ++a)
    if (x[a] < region->lo[a] || x[a] > region->lo[a] + region->extent[a]) return false;
  return true;
}

}  // namespace detail

/// Streamline of B/|B| by RK4 in arclength.
inline TracedLine trace_field_line(const VectorField& B, const Vec& seed, const LineTraceConfig& cfg) {
  TracedLine line;
  line.points.push_back(seed);
  auto dir = [&](const Vec& x, bool& zero) -> Vec {
    Vec b = B(0.0, x);
    double n = b.norm();
    if (n < cfg.zero_tol) {
      zero = true;
      return Vec::Zero(x.size());
    }
    return b / n;
  };
  const long n = static_cast<long>(std::ceil(cfg.length / cfg.ds - 1e-9));
  const double h = cfg.length / n;
  Vec x = seed;
  for (long k = 0; k < n; ++k) {
    bool zero = false;
    Vec k1 = dir(x, zero);
    Vec k2 = dir(x + 0.5 * h * k1, zero);
    Vec k3 = dir(x + 0.5 * h * k2, zero);
    Vec k4 = dir(x + h * k3, zero);
    if (zero) {
      line.truncated = true;
      break;
    }
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!detail::inside(cfg.region, x)) {
      line.truncated = true;
      break;
    }
    line.points.push_back(x);
  }
  return line;
}

/// Integral curve of B itself (not normalised), sampled at parameter steps ds.
inline TracedLine trace_parametric(const VectorField& B, const Vec& seed, const LineTraceConfig& cfg) {
  TracedLine line;
  line.points.push_back(seed);
  const long n = static_cast<long>(std::ceil(cfg.length / cfg.ds - 1e-9));
  const double h = cfg.length / n;
  Vec x = seed;
  for (long k = 0; k < n; ++k) {
    detail::flow_step(B, 0.0, h, Scheme::RK4, x, nullptr);
    if (!x.allFinite() || !detail::inside(cfg.region, x)) {
      line.truncated = true;
      break;
    }
    line.points.push_back(x);
  }
  return line;
}

/// B_t / rho_t as a field; rho_t comes from the flow of V.
inline VectorField density_rescaled(const VectorField& Bt, const VectorField& V, double t,
                                    const IntegratorConfig& cfg) {
  return VectorField::analytic(
      Bt.dim(), [Bt, V, t, cfg](double, const Vec& x) -> Vec { return Bt(0.0, x) / density_at(V, t, x, cfg); },
      {}, false, {"rescaled_" + Bt.name(), {}, {}, {}});
}

struct FrozenLineConfig {
  LineTraceConfig line{};
  IntegratorConfig flow{};
  /// Compare against B_t / rho_t instead of B_t.
  bool rescale_by_density = false;
};

struct FrozenLineReport {
  std::vector<double> geometric;   // per seed: Hausdorff distance of unit-speed lines
  std::vector<double> parametric;  // per seed: max |X_t(Y0_s(y)) - Yt_s(X_t y)|
  double max_geometric = 0.0;
  double max_parametric = 0.0;
  bool truncated = false;
  std::vector<std::string> warnings;
};

/// Pushes field lines of Bbar through X_t and compares them with field lines
/// of Bt traced from the pushed seeds, both as point sets (direction only)
/// and as parametrised integral curves (direction and intensity).
inline FrozenLineReport frozen_line_compare(const VectorField& V, const VectorField& Bbar, const VectorField& Bt,
                                            double t, const std::vector<Vec>& seeds,
                                            const FrozenLineConfig& cfg = {}) {
  FrozenLineReport rep;
  VectorField target = cfg.rescale_by_density ? density_rescaled(Bt, V, t, cfg.flow) : Bt;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    const Vec& y = seeds[si];
    Vec ty = flow_point(V, t, y, cfg.flow);

    // geometric: unit-speed lines
    TracedLine l0 = trace_field_line(Bbar, y, cfg.line);
    std::vector<Vec> pushed;
    pushed.reserve(l0.points.size());
    for (const auto& p : l0.points) pushed.push_back(flow_point(V, t, p, cfg.flow));
    double pushed_len = 0.0;
    for (std::size_t k = 1; k < pushed.size(); ++k) pushed_len += (pushed[k] - pushed[k - 1]).norm();
    LineTraceConfig lc = cfg.line;
    lc.length = std::max(pushed_len, lc.ds);
    lc.region.reset();
    TracedLine lt = trace_field_line(target, ty, lc);
    double g = hausdorff_distance(pushed, lt.points);

    // parametric: integral curves of the fields themselves
    TracedLine p0 = trace_parametric(Bbar, y, cfg.line);
    LineTraceConfig pc = cfg.line;
    pc.region.reset();
    TracedLine pt = trace_parametric(target, ty, pc);
    double p = 0.0;
    std::size_t m = std::min(p0.points.size(), pt.points.size());
    for (std::size_t k = 0; k < m; ++k)
      p = std::max(p, (flow_point(V, t, p0.points[k], cfg.flow) - pt.points[k]).norm());

    if (l0.truncated || lt.truncated || p0.truncated || pt.truncated) {
      rep.truncated = true;
      rep.warnings.push_back("seed " + std::to_string(si) + ": field line truncated; comparison covers the traced part");
    }
    rep.geometric.push_back(g);
    rep.parametric.push_back(p);
    rep.max_geometric = std::max(rep.max_geometric, g);
    rep.max_parametric = std::max(rep.max_parametric, p);
  }
  return rep;
}

}  // namespace geotr
