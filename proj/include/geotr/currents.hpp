/// @file currents.hpp
/// @brief Finite-mass 1-currents in two concrete representations and the
/// operations on them: pairing with test forms, mass, boundary, pushforward
/// under a flow, and the Lie derivative (by duality).
///
/// * CurveChain: T = sum_i w_i [[gamma_i]] over weighted polylines, with
///   <[[gamma]], omega> = int_0^1 omega(gamma(s)) . gamma'(s) ds.
/// * ACCurrent: T = w L^d with w = chi * v sampled on a box lattice; pairings
///   are lattice quadratures. The window chi keeps the support strictly inside
///   the box.
#pragma once

#include "geotr/fields.hpp"
#include "geotr/flow.hpp"
#include "geotr/forms.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

namespace geotr {

// ---------------------------------------------------------------------------
// 0-currents

/// Finite sum of signed Dirac masses.
struct ZeroCurrent {
  int dim = 2;
  std::vector<std::pair<double, Vec>> atoms;

  template <class F>
  double pair(F&& f) const {
    double s = 0.0;
    for (const auto& [w, p] : atoms) s += w * f(p);
    return s;
  }

  double mass() const {
    double m = 0.0;
    for (const auto& [w, p] : atoms) m += std::abs(w);
    return m;
  }

  double total_weight() const {
    double m = 0.0;
    for (const auto& [w, p] : atoms) m += w;
    return m;
  }

  /// Merges atoms at bit-identical points and drops zero weights.
  ZeroCurrent consolidated() const {
    auto less = [](const Vec& a, const Vec& b) {
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    };
    std::map<Vec, double, decltype(less)> acc(less);
    for (const auto& [w, p] : atoms) acc[p] += w;
    ZeroCurrent out{dim, {}};
    for (const auto& [p, w] : acc)
      if (w != 0.0) out.atoms.emplace_back(w, p);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Curve chains

struct Curve {
  double weight = 1.0;
  std::vector<Vec> vertices;

  double length() const {
    double l = 0.0;
    for (std::size_t k = 1; k < vertices.size(); ++k) l += (vertices[k] - vertices[k - 1]).norm();
    return l;
  }
};

class CurveChain {
 public:
  CurveChain() = default;
  explicit CurveChain(int dim, std::vector<Curve> curves = {}) : dim_(dim), curves_(std::move(curves)) {
    for (const auto& c : curves_) check(c);
  }

  int dim() const { return dim_; }
  const std::vector<Curve>& curves() const { return curves_; }
  bool empty() const { return curves_.empty(); }

  void add(Curve c) {
    check(c);
    curves_.push_back(std::move(c));
  }

  /// Representation mass sum_i w_i * length(gamma_i). Equals M(T) only when
  /// the curves do not cancel each other.
  double mass() const {
    double m = 0.0;
    for (const auto& c : curves_) m += c.weight * c.length();
    return m;
  }

  double diameter() const {
    if (curves_.empty()) return 0.0;
    Vec lo = curves_[0].vertices[0], hi = lo;
    for (const auto& c : curves_)
      for (const auto& v : c.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
    return (hi - lo).norm();
  }

 private:
  void check(const Curve& c) const {
    if (!(c.weight > 0.0)) throw ConfigError("curve weight must be positive");
    if (c.vertices.size() < 2) throw ConfigError("curve needs at least two vertices");
    for (std::size_t k = 0; k < c.vertices.size(); ++k) {
      require_dim(static_cast<int>(c.vertices[k].size()), dim_, "curve vertex");
      if (k > 0 && c.vertices[k] == c.vertices[k - 1])
        throw ConfigError("consecutive curve vertices must be distinct");
    }
  }

  int dim_ = 2;
  std::vector<Curve> curves_;
};

// Shapes used by scenarios and tests.

inline Curve segment(const Vec& a, const Vec& b, double weight = 1.0) { return Curve{weight, {a, b}}; }

/// Closed counter-clockwise polygon inscribed in the circle |x - c| = r
/// (plane spanned by the first two axes), n sides, starting at angle phase.
inline Curve circle(const Vec& c, double r, int n, double weight = 1.0, double phase = 0.0) {
  Curve out{weight, {}};
  for (int k = 0; k <= n; ++k) {
    double th = phase + 2.0 * std::numbers::pi * (k % n) / n;
    Vec p = c;
    p[0] += r * std::cos(th);
    p[1] += r * std::sin(th);
    out.vertices.push_back(p);
  }
  return out;
}

/// Closed axis-aligned square loop with corner lo and side s.
inline Curve square_loop(const Vec& lo, double s, double weight = 1.0) {
  Vec a = lo, b = lo, c = lo, d = lo;
  b[0] += s;
  c[0] += s;
  c[1] += s;
  d[1] += s;
  return Curve{weight, {a, b, c, d, a}};
}

// ---------------------------------------------------------------------------
// Absolutely continuous currents

class ACCurrent {
 public:
  ACCurrent() = default;

  /// T = (chi v) L^d sampled on the nodes of `box`. With a window, the
  /// effective field keeps v's analytic derivatives; the window must vanish
  /// on the outermost node layer.
  static ACCurrent from_field(const VectorField& v, const Box& box, std::optional<Window> window) {
    require_dim(v.dim(), box.dim, "ACCurrent");
    ACCurrent T;
    T.box_ = box;
    T.effective_ = window ? geotr::windowed(v, *window) : v;
    T.analytic_ = true;
    T.window_ = window;
    T.resample();
    T.check_support();
    return T;
  }

  /// Samples-only current; derivatives come from the periodic interpolant or
  /// central differences.
  static ACCurrent from_samples(const Box& box, std::vector<double> samples) {
    ACCurrent T;
    T.box_ = box;
    T.samples_ = std::move(samples);
    if (T.samples_.size() != box.num_nodes() * box.dim)
      throw DimensionError("ACCurrent samples do not match the box");
    GridData g{box, T.samples_, Interp::Linear, true};
    T.effective_ = VectorField::from_grid(std::move(g), {"ac_samples", {}, {}, {}});
    T.analytic_ = false;
    return T;
  }

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  const std::vector<double>& samples() const { return samples_; }
  bool analytic() const { return analytic_; }
  const std::optional<Window>& window() const { return window_; }
  const VectorField& effective_field() const { return effective_; }

  Vec sample(std::size_t idx) const {
    Vec w(dim());
    for (int c = 0; c < dim(); ++c) w[c] = samples_[idx * dim() + c];
    return w;
  }

  /// Effective field chi*v at an arbitrary point.
  Vec at(const Vec& x) const { return effective_(0.0, x); }
  Mat jacobian_at(const Vec& x) const { return effective_.jacobian(0.0, x); }

  /// div(chi v) at node idx: analytic when available, else periodic central
  /// differences of the samples.
  double divergence_at_node(std::size_t idx) const {
    if (analytic_) return effective_.jacobian(0.0, box_.node(idx)).trace();
    auto ijk = box_.multi_index(idx);
    double div = 0.0;
    for (int a = 0; a < dim(); ++a) {
      auto p = ijk, m = ijk;
      p[a] = (ijk[a] + 1) % box_.n[a];
      m[a] = (ijk[a] - 1 + box_.n[a]) % box_.n[a];
      div += (samples_[box_.index(p) * dim() + a] - samples_[box_.index(m) * dim() + a]) / (2.0 * box_.h(a));
    }
    return div;
  }

  /// Linear combination on the same lattice (samples only).
  ACCurrent plus_scaled(const ACCurrent& other, double s) const {
    if (other.box_.num_nodes() != box_.num_nodes() || other.dim() != dim())
      throw DimensionError("ACCurrent sum requires identical lattices");
    std::vector<double> out = samples_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * other.samples_[i];
    return from_samples(box_, std::move(out));
  }

  ACCurrent scaled(double s) const {
    std::vector<double> out = samples_;
    for (auto& v : out) v *= s;
    return from_samples(box_, std::move(out));
  }

 private:
  void resample() {
    samples_.assign(box_.num_nodes() * box_.dim, 0.0);
    for (std::size_t i = 0; i < box_.num_nodes(); ++i) {
      Vec w = effective_(0.0, box_.node(i));
      for (int c = 0; c < box_.dim; ++c) samples_[i * box_.dim + c] = w[c];
    }
  }

  // The effective field must vanish on the outermost node layer.
  void check_support() const {
    for (std::size_t i = 0; i < box_.num_nodes(); ++i) {
      auto ijk = box_.multi_index(i);
      bool outer = false;
      for (int a = 0; a < dim(); ++a) outer = outer || ijk[a] == 0 || ijk[a] == box_.n[a] - 1;
      if (!outer) continue;
      for (int c = 0; c < dim(); ++c)
        if (samples_[i * dim() + c] != 0.0)
          throw ConfigError("ACCurrent support reaches the box boundary; shrink the window");
    }
  }

  Box box_;
  std::vector<double> samples_;
  VectorField effective_;
  bool analytic_ = false;
  std::optional<Window> window_;
};

/// Either representation; CurrentPath and the solvers traffic in this.
using Current = std::variant<CurveChain, ACCurrent>;

// ---------------------------------------------------------------------------
// Pairing

namespace detail {

/// Panels per unit length so that GL5 resolves the bump's transition layer.
inline double panel_length(const Bump& bump) { return (bump.r_out - bump.r_in) / 64.0; }

/// Calls f(x, dx) at the GL5 nodes of every panel of every segment of c,
/// where dx is the weighted tangent increment (weight included).
template <class F>
void chain_quadrature(const Curve& c, double panel, F&& f) {
  for (std::size_t k = 1; k < c.vertices.size(); ++k) {
    const Vec& p0 = c.vertices[k - 1];
    const Vec seg = c.vertices[k] - p0;
    const int m = std::max(1, static_cast<int>(std::ceil(seg.norm() / panel)));
    const Vec tangent = seg / m;
    for (int j = 0; j < m; ++j) {
      const Vec a = p0 + (static_cast<double>(j) / m) * seg;
      for (int q = 0; q < 5; ++q) f(a + GaussLegendre5::nodes[q] * tangent, (GaussLegendre5::weights[q] * c.weight) * tangent);
    }
  }
}

}  // namespace detail

inline double pair(const CurveChain& T, const TestForm1& omega) {
  require_dim(T.dim(), omega.dim, "pair");
  double total = 0.0;
  const double panel = detail::panel_length(omega.bump);
  for (const auto& c : T.curves())
    detail::chain_quadrature(c, panel, [&](const Vec& x, const Vec& dx) {
      if (omega.bump.supports(x)) total += omega(x).dot(dx);
    });
  return total;
}

inline double pair(const ACCurrent& T, const TestForm1& omega) {
  require_dim(T.dim(), omega.dim, "pair");
  const Box& box = T.box();
  double s = 0.0;
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    Vec x = box.node(i);
    if (!omega.bump.supports(x)) continue;
    s += T.sample(i).dot(omega(x));
  }
  return s * box.cell_volume();
}

inline double pair(const Current& T, const TestForm1& omega) {
  return std::visit([&](const auto& c) { return pair(c, omega); }, T);
}

/// <T, df> for a scalar test function; by definition this is <dT, f>.
inline double pair_exact(const CurveChain& T, const TestForm0& f) {
  double total = 0.0;
  const double panel = detail::panel_length(f.bump);
  for (const auto& c : T.curves())
    detail::chain_quadrature(c, panel, [&](const Vec& x, const Vec& dx) {
      if (f.bump.supports(x)) total += f.gradient(x).dot(dx);
    });
  return total;
}

inline double pair_exact(const ACCurrent& T, const TestForm0& f) {
  const Box& box = T.box();
  double s = 0.0;
  for (std::size_t i = 0; i < box.num_nodes(); ++i) s += T.sample(i).dot(f.gradient(box.node(i)));
  return s * box.cell_volume();
}

// ---------------------------------------------------------------------------
// Mass and boundary

inline double mass(const CurveChain& T) { return T.mass(); }

inline double mass(const ACCurrent& T) {
  double m = 0.0;
  for (std::size_t i = 0; i < T.box().num_nodes(); ++i) m += T.sample(i).norm();
  return m * T.box().cell_volume();
}

inline double mass(const Current& T) {
  return std::visit([](const auto& c) { return mass(c); }, T);
}

/// d[[gamma]] = delta_end - delta_start per curve, weighted and merged.
inline ZeroCurrent boundary(const CurveChain& T) {
  ZeroCurrent z{T.dim(), {}};
  for (const auto& c : T.curves()) {
    z.atoms.emplace_back(c.weight, c.vertices.back());
    z.atoms.emplace_back(-c.weight, c.vertices.front());
  }
  return z.consolidated();
}

/// dT_w = -(div w) L^d, sampled at the lattice nodes.
inline ZeroCurrent boundary(const ACCurrent& T) {
  ZeroCurrent z{T.dim(), {}};
  const double dv = T.box().cell_volume();
  for (std::size_t i = 0; i < T.box().num_nodes(); ++i) {
    double d = T.divergence_at_node(i);
    if (d != 0.0) z.atoms.emplace_back(-d * dv, T.box().node(i));
  }
  return z;
}

// ---------------------------------------------------------------------------
// Lie derivative

/// <L_b T, omega> = -<b ^ T, d omega> - <b ^ dT, omega>.
inline double lie_derivative_pair(const CurveChain& T, const VectorField& b, const TestForm1& omega) {
  require_dim(T.dim(), b.dim(), "lie_derivative_pair");
  double total = 0.0;
  const double panel = detail::panel_length(omega.bump);
  for (const auto& c : T.curves())
    detail::chain_quadrature(c, panel, [&](const Vec& x, const Vec& dx) {
      if (omega.bump.supports(x)) total -= omega.d_omega(x, b(0.0, x), dx);
    });
  // b ^ dT paired with omega is dT paired with omega(b).
  ZeroCurrent dT = boundary(T);
  total -= dT.pair([&](const Vec& p) { return omega(p).dot(b(0.0, p)); });
  return total;
}

inline double lie_derivative_pair(const ACCurrent& T, const VectorField& b, const TestForm1& omega) {
  require_dim(T.dim(), b.dim(), "lie_derivative_pair");
  const Box& box = T.box();
  double wedge = 0.0, bdry = 0.0;
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    Vec x = box.node(i);
    if (!omega.bump.supports(x)) continue;
    Vec w = T.sample(i);
    Vec bx = b(0.0, x);
    Mat Da = omega.gradient(x);
    wedge += TestForm1::d_omega(Da, bx, w);
    if (T.analytic()) {
      // dT = -(div w) L^d
      bdry -= T.divergence_at_node(i) * omega(x).dot(bx);
    } else {
      // <dT, f> := <T, df> with f = omega(b)
      bdry += w.dot(Da.transpose() * bx + b.jacobian(0.0, x).transpose() * omega(x));
    }
  }
  return -(wedge + bdry) * box.cell_volume();
}

inline double lie_derivative_pair(const Current& T, const VectorField& b, const TestForm1& omega) {
  return std::visit([&](const auto& c) { return lie_derivative_pair(c, b, omega); }, T);
}

/// Explicit density of L_b(T_w) for smooth fields: (-[b,w] + (div b) w) L^d,
/// as an AC current on the same lattice.
inline ACCurrent lie_derivative_ac(const ACCurrent& Tv, const VectorField& b) {
  require_dim(Tv.dim(), b.dim(), "lie_derivative_ac");
  const VectorField w = Tv.effective_field();
  auto field = VectorField::analytic(
      b.dim(),
      [w, b](double t, const Vec& x) -> Vec {
        Vec wv = w(t, x);
        Vec bv = b(t, x);
        Mat Db = b.jacobian(t, x);
        Vec bracket = Db * wv - w.jacobian(t, x) * bv;
        return -bracket + Db.trace() * wv;
      },
      {}, false, {"lie_derivative", {}, {}, {}});
  if (Tv.analytic()) return ACCurrent::from_field(field, Tv.box(), std::nullopt);
  std::vector<double> s(Tv.box().num_nodes() * Tv.dim());
  for (std::size_t i = 0; i < Tv.box().num_nodes(); ++i) {
    Vec v = field(0.0, Tv.box().node(i));
    for (int c = 0; c < Tv.dim(); ++c) s[i * Tv.dim() + c] = v[c];
  }
  return ACCurrent::from_samples(Tv.box(), std::move(s));
}

// ---------------------------------------------------------------------------
// Pushforward

/// The map x -> X_t(x) of an autonomous field, as used by pushforward.
struct FlowMap {
  VectorField b;
  double t = 0.0;
  IntegratorConfig cfg{};

  Vec operator()(const Vec& x) const { return flow_point(b, t, x, cfg); }
};

struct PushOptions {
  /// Chord-deviation threshold for splitting pushed segments; negative means
  /// 1e-4 * diameter of the input chain.
  double refine_tol = -1.0;
  int max_depth = 16;
  std::size_t max_vertices = 1u << 20;
};

struct PushReport {
  bool budget_exceeded = false;
  double max_stretch = 0.0;       // max |f(q1)-f(q0)| / |q1-q0| over emitted segments
  std::size_t refined_splits = 0;
  double refine_tol = 0.0;
};

/// Pushes every vertex through f; a segment is split while the image of its
/// midpoint deviates from the image chord by more than refine_tol.
template <class Map>
CurveChain pushforward_chain(const CurveChain& T, Map&& f, const PushOptions& opt = {},
                             PushReport* report = nullptr) {
  PushReport rep;
  rep.refine_tol = opt.refine_tol >= 0.0 ? opt.refine_tol : 1e-4 * T.diameter();
  std::size_t emitted = 0;
  CurveChain out(T.dim());
  for (const auto& c : T.curves()) {
    Curve pc{c.weight, {}};
    Vec prev_img = f(c.vertices[0]);
    pc.vertices.push_back(prev_img);
    for (std::size_t k = 1; k < c.vertices.size(); ++k) {
      const Vec p0 = c.vertices[k - 1], p1 = c.vertices[k];
      Vec img1 = f(p1);
      // depth-first subdivision on the original segment parameter
      std::function<void(double, double, const Vec&, const Vec&, int)> emit =
          [&](double u0, double u1, const Vec& fa, const Vec& fb, int depth) {
            double um = 0.5 * (u0 + u1);
            bool can_split = depth < opt.max_depth && emitted < opt.max_vertices;
            if (rep.refine_tol > 0.0 && can_split) {
              Vec fm = f(p0 + um * (p1 - p0));
              if ((fm - 0.5 * (fa + fb)).norm() > rep.refine_tol) {
                ++rep.refined_splits;
                emit(u0, um, fa, fm, depth + 1);
                emit(um, u1, fm, fb, depth + 1);
                return;
              }
            } else if (rep.refine_tol > 0.0 && !can_split) {
              Vec fm = f(p0 + um * (p1 - p0));
              if ((fm - 0.5 * (fa + fb)).norm() > rep.refine_tol) rep.budget_exceeded = true;
            }
            double len = (u1 - u0) * (p1 - p0).norm();
            if (len > 0.0) rep.max_stretch = std::max(rep.max_stretch, (fb - fa).norm() / len);
            if (fb != pc.vertices.back()) {
              pc.vertices.push_back(fb);
              ++emitted;
            }
          };
      emit(0.0, 1.0, prev_img, img1, 0);
      prev_img = img1;
    }
    if (pc.vertices.size() >= 2) out.add(std::move(pc));
  }
  if (report) *report = rep;
  return out;
}

inline CurveChain pushforward(const CurveChain& T, const FlowMap& f, const PushOptions& opt = {},
                              PushReport* report = nullptr) {
  if (f.t == 0.0) {
    if (report) *report = PushReport{false, 1.0, 0, 0.0};
    return T;
  }
  return pushforward_chain(T, f, opt, report);
}

/// (X_t)_* T_w = rho_t (J w)(X_{-t} y) L^d, evaluated on the same lattice:
/// with K = grad X_{-t}(y) we have J = K^{-1} and rho_t(y) = det K.
inline ACCurrent pushforward(const ACCurrent& T, const FlowMap& f) {
  if (!f.b.is_autonomous()) throw ConfigError("AC pushforward requires an autonomous field");
  if (f.t == 0.0) return T;
  const Box& box = T.box();
  const int d = T.dim();
  std::vector<double> out(box.num_nodes() * d, 0.0);
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    FlowSample back = integrate(f.b, 0.0, -f.t, box.node(i), f.cfg, true);
    Vec w = T.at(back.endpoint);
    if (w.squaredNorm() == 0.0) continue;
    Vec pushed = back.det_j * back.jacobian.lu().solve(w);
    for (int c = 0; c < d; ++c) out[i * d + c] = pushed[c];
  }
  return ACCurrent::from_samples(box, std::move(out));
}

inline Current pushforward(const Current& T, const FlowMap& f, const PushOptions& opt = {},
                           PushReport* report = nullptr) {
  if (auto* c = std::get_if<CurveChain>(&T)) return pushforward(*c, f, opt, report);
  return pushforward(std::get<ACCurrent>(T), f);
}

/// <f_* T, omega> through the Jacobian formula f_*T = (Df tau) f_#mu, by
/// quadrature on the *original* curves (no image polyline involved).
/// `subdivisions` splits each segment for the quadrature.
inline double pair_pushforward_by_jacobian(const CurveChain& T, const FlowMap& f,
                                           const TestForm1& omega, int subdivisions = 1) {
  double total = 0.0;
  for (const auto& c : T.curves()) {
    double s = 0.0;
    for (std::size_t k = 1; k < c.vertices.size(); ++k) {
      for (int m = 0; m < subdivisions; ++m) {
        Vec p0 = c.vertices[k - 1] + (static_cast<double>(m) / subdivisions) * (c.vertices[k] - c.vertices[k - 1]);
        Vec tangent = (c.vertices[k] - c.vertices[k - 1]) / subdivisions;
        for (int q = 0; q < 5; ++q) {
          FlowSample fs = advance(f.b, f.t, p0 + GaussLegendre5::nodes[q] * tangent, f.cfg);
          s += GaussLegendre5::weights[q] * omega(fs.endpoint).dot(fs.jacobian * tangent);
        }
      }
    }
    total += c.weight * s;
  }
  return total;
}

/// int |Df tau| d||T|| over the original curves (the mass of the pushed
/// representation computed from Jacobians).
inline double pushforward_mass_by_jacobian(const CurveChain& T, const FlowMap& f, int subdivisions = 1) {
  double total = 0.0;
  for (const auto& c : T.curves()) {
    double s = 0.0;
    for (std::size_t k = 1; k < c.vertices.size(); ++k) {
      for (int m = 0; m < subdivisions; ++m) {
        Vec p0 = c.vertices[k - 1] + (static_cast<double>(m) / subdivisions) * (c.vertices[k] - c.vertices[k - 1]);
        Vec tangent = (c.vertices[k] - c.vertices[k - 1]) / subdivisions;
        for (int q = 0; q < 5; ++q) {
          FlowSample fs = advance(f.b, f.t, p0 + GaussLegendre5::nodes[q] * tangent, f.cfg);
          s += GaussLegendre5::weights[q] * (fs.jacobian * tangent).norm();
        }
      }
    }
    total += c.weight * s;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Formal sums and distances

/// a + s*b as a representation-level sum. Chains concatenate (negative s
/// reverses orientation); AC currents add samples on a shared lattice.
inline Current add_scaled(const Current& a, const Current& b, double s) {
  if (s == 0.0) return a;
  if (auto* ca = std::get_if<CurveChain>(&a)) {
    auto* cb = std::get_if<CurveChain>(&b);
    if (!cb) throw ConfigError("cannot add currents of different representations");
    CurveChain out = *ca;
    for (auto c : cb->curves()) {
      c.weight *= std::abs(s);
      if (s < 0.0) std::reverse(c.vertices.begin(), c.vertices.end());
      out.add(std::move(c));
    }
    return out;
  }
  auto* cb = std::get_if<ACCurrent>(&b);
  if (!cb) throw ConfigError("cannot add currents of different representations");
  return std::get<ACCurrent>(a).plus_scaled(*cb, s);
}

/// Zero current of the same representation and shape as `like`.
inline Current zero_like(const Current& like) {
  if (auto* c = std::get_if<CurveChain>(&like)) return CurveChain(c->dim());
  const auto& ac = std::get<ACCurrent>(like);
  return ACCurrent::from_samples(ac.box(), std::vector<double>(ac.samples().size(), 0.0));
}

/// Weak-star proximity proxy: max |<S - T, omega>| over a form battery.
inline double weak_star_distance(const Current& S, const Current& T, const std::vector<TestForm1>& forms) {
  double m = 0.0;
  for (const auto& f : forms) m = std::max(m, std::abs(pair(S, f) - pair(T, f)));
  return m;
}

inline double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  double L2 = ab.squaredNorm();
  double u = L2 > 0.0 ? std::clamp((p - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
  return (p - (a + u * ab)).norm();
}

inline double point_polyline_distance(const Vec& p, const std::vector<Vec>& poly) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < poly.size(); ++k) m = std::min(m, point_segment_distance(p, poly[k - 1], poly[k]));
  if (poly.size() == 1) m = (p - poly[0]).norm();
  return m;
}

/// Symmetric Hausdorff distance between polylines, checked at vertices and
/// segment midpoints (exact for straight segments, adequate for fine
/// polylines).
inline double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  auto one_sided = [](const std::vector<Vec>& p, const std::vector<Vec>& q) {
    double m = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m = std::max(m, point_polyline_distance(p[k], q));
      if (k > 0) m = std::max(m, point_polyline_distance(0.5 * (p[k] + p[k - 1]), q));
    }
    return m;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace geotr
