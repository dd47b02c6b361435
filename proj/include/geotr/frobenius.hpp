/// @file frobenius.hpp
/// @brief Commutativity of two flows, invariance of a current under a
/// divergence-free flow, and the lifted flow on weighted curves.
#pragma once

#include "geotr/currents.hpp"
#include "geotr/flow.hpp"
#include "geotr/forms.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace geotr {

/// Halton points (bases 2, 3, 5) mapped into the box.
inline std::vector<Vec> halton_points(const Box& box, std::size_t count, std::size_t skip = 1) {
  static const int bases[3] = {2, 3, 5};
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vec x(box.dim);
    for (int a = 0; a < box.dim; ++a) {
      double f = 1.0, r = 0.0;
      for (std::size_t i = k + skip; i > 0; i /= bases[a]) {
        f /= bases[a];
        r += f * static_cast<double>(i % bases[a]);
      }
      x[a] = box.lo[a] + r * box.extent[a];
    }
    out.push_back(x);
  }
  return out;
}

/// max over the box nodes of |[b, v]|.
inline double bracket_residual_norm(const VectorField& b, const VectorField& v, const Box& grid, double t = 0.0) {
  require_dim(b.dim(), v.dim(), "bracket_residual_norm");
  double m = 0.0;
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) m = std::max(m, lie_bracket(b, v, t, grid.node(i)).norm());
  return m;
}

struct PairDefect {
  double t = 0.0;
  double s = 0.0;
  double max_defect = 0.0;
  double mean_defect = 0.0;
};

struct CommutativityReport {
  std::vector<PairDefect> pairs;
  double max_defect = 0.0;
  double bracket_residual = 0.0;
  double tolerance = 1e-6;
  bool commute = false;
  /// Largest cell-count ratio of the pushed cloud against e^{|div v| s}.
  double concentration_ratio = 0.0;
  double concentration_bound = 1.0;
  bool non_concentrating = true;
};

/// Histogram check that Y_s does not compress a uniform cloud beyond
/// e^{|div v| s}. Returns (worst observed ratio, bound).
inline std::pair<double, double> concentration_check(const VectorField& v, double s, const Box& box,
                                                     const IntegratorConfig& cfg, int cells = 8, int per_cell = 6) {
  Box fine = box.with_resolution(cells * per_cell);
  Box coarse = box.with_resolution(cells);
  std::vector<Vec> pts(fine.num_nodes());
  for (std::size_t i = 0; i < fine.num_nodes(); ++i) {
    Vec x = fine.node(i);
    for (int a = 0; a < box.dim; ++a) x[a] += 0.5 * fine.h(a);
    pts[i] = x;
  }
  std::vector<double> counts(coarse.num_nodes(), 0.0);
  for (const auto& x : pts) {
    Vec y = flow_point(v, s, x, cfg);
    std::array<int, 3> ijk{0, 0, 0};
    bool in = true;
    for (int a = 0; a < box.dim; ++a) {
      double u = (y[a] - box.lo[a]) / coarse.h(a);
      if (u < 0.0 || u >= cells) {
        in = false;
        break;
      }
      ijk[a] = static_cast<int>(u);
    }
    if (in) counts[coarse.index(ijk)] += 1.0;
  }
  const double expected = std::pow(static_cast<double>(per_cell), box.dim);
  double worst = 0.0;
  for (double c : counts) worst = std::max(worst, c / expected);
  double div = max_abs_divergence(v, pts);
  return {worst, std::exp(div * std::abs(s))};
}

struct CommutatorConfig {
  IntegratorConfig flow{};
  double tolerance = 1e-6;
  /// Relative slack on the concentration bound absorbing histogram boundary effects.
  double concentration_slack = 0.35;
};

/// defect(x) = |X_t(Y_s x) - Y_s(X_t x)| over the (t, s) lattice and samples.
inline CommutativityReport commutator_defect(const VectorField& b, const VectorField& v,
                                             const std::vector<double>& ts, const std::vector<double>& ss,
                                             const std::vector<Vec>& samples, const Box& grid,
                                             const CommutatorConfig& cfg = {}) {
  require_dim(b.dim(), v.dim(), "commutator_defect");
  if (!b.is_autonomous() || !v.is_autonomous())
    throw ConfigError("commutator_defect: fields must be autonomous");
  CommutativityReport rep;
  rep.tolerance = cfg.tolerance;
  for (double t : ts) {
    for (double s : ss) {
      PairDefect pd{t, s, 0.0, 0.0};
      for (const auto& x : samples) {
        Vec a = flow_point(b, t, flow_point(v, s, x, cfg.flow), cfg.flow);
        Vec c = flow_point(v, s, flow_point(b, t, x, cfg.flow), cfg.flow);
        double d = (a - c).norm();
        pd.max_defect = std::max(pd.max_defect, d);
        pd.mean_defect += d;
      }
      if (!samples.empty()) pd.mean_defect /= static_cast<double>(samples.size());
      rep.max_defect = std::max(rep.max_defect, pd.max_defect);
      rep.pairs.push_back(pd);
    }
  }
  rep.bracket_residual = bracket_residual_norm(b, v, grid);
  double smax = 0.0;
  for (double s : ss) smax = std::max(smax, std::abs(s));
  auto [ratio, bound] = concentration_check(v, smax, grid, cfg.flow);
  rep.concentration_ratio = ratio;
  rep.concentration_bound = bound;
  rep.non_concentrating = ratio <= bound * (1.0 + cfg.concentration_slack);
  rep.commute = rep.max_defect <= cfg.tolerance;
  return rep;
}

struct InvarianceReport {
  std::vector<double> times;
  std::vector<double> distances;  // per time, max over the catalog
  double hypothesis_residual = 0.0;  // max |<L_b T, omega>|
  std::string catalog_id;
};

/// Per time, max over the catalog of |<(X_t)_* T, omega> - <T, omega>|.
/// Requires div b = 0 (checked on the grid nodes).
inline InvarianceReport invariance_defect(const VectorField& b, const CurveChain& T, const std::vector<double>& times,
                                          const std::vector<TestForm1>& catalog, const Box& grid,
                                          const IntegratorConfig& cfg = {}, const PushOptions& opt = {},
                                          std::string catalog_id = "catalog25") {
  std::vector<Vec> nodes(grid.num_nodes());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = grid.node(i);
  double div = max_abs_divergence(b, nodes);
  if (div > 1e-8)
    throw PreconditionError("invariance_defect: field is not divergence-free (max |div| = " + std::to_string(div) + ")");
  InvarianceReport rep;
  rep.catalog_id = std::move(catalog_id);
  rep.times = times;
  std::vector<double> base(catalog.size());
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    base[k] = pair(T, catalog[k]);
    rep.hypothesis_residual = std::max(rep.hypothesis_residual, std::abs(lie_derivative_pair(T, b, catalog[k])));
  }
  for (double t : times) {
    double d = 0.0;
    if (t != 0.0) {
      CurveChain P = pushforward(T, FlowMap{b, t, cfg}, opt);
      for (std::size_t k = 0; k < catalog.size(); ++k) d = std::max(d, std::abs(pair(P, catalog[k]) - base[k]));
    }
    rep.distances.push_back(d);
  }
  return rep;
}

struct LiftedFlowReport {
  double pairing_mismatch = 0.0;  // lifted polylines vs Jacobian quadrature, max over catalog
  double lifted_mass = 0.0;       // sum w_i length(X_t o gamma_i)
  double jacobian_mass = 0.0;     // int |J tau| d||T||
  double mass_mismatch = 0.0;
  bool budget_exceeded = false;
  std::vector<std::string> warnings;
};

/// Pushes each weighted curve through the flow pointwise (the lifted flow)
/// and checks that the result represents the pushed current: pairings
/// against the Jacobian formula on the original curves, and masses.
inline LiftedFlowReport lifted_pushforward_check(const VectorField& b, const CurveChain& eta, double t,
                                                 const std::vector<TestForm1>& catalog,
                                                 const IntegratorConfig& cfg = {}, const PushOptions& opt = {},
                                                 int quadrature_subdivisions = 64) {
  LiftedFlowReport rep;
  FlowMap f{b, t, cfg};
  PushReport pr;
  CurveChain lifted = pushforward(eta, f, opt, &pr);
  rep.budget_exceeded = pr.budget_exceeded;
  if (pr.budget_exceeded) rep.warnings.push_back("refinement budget exceeded; lifted curves are under-resolved");
  for (const auto& w : catalog) {
    double a = pair(lifted, w);
    double c = pair_pushforward_by_jacobian(eta, f, w, quadrature_subdivisions);
    rep.pairing_mismatch = std::max(rep.pairing_mismatch, std::abs(a - c));
  }
  rep.lifted_mass = lifted.mass();
  rep.jacobian_mass = pushforward_mass_by_jacobian(eta, f, quadrature_subdivisions);
  rep.mass_mismatch = std::abs(rep.lifted_mass - rep.jacobian_mass);
  return rep;
}

}  // namespace geotr
