/// @file transport.hpp
/// @brief Evolution solvers: the vector advection equation (Lagrangian
/// representation formula and an Eulerian central-difference/RK4 scheme),
/// the geometric transport equation by pushforward, its weak-form residual,
/// and the Duhamel formula for the inhomogeneous problem.
#pragma once

#include "geotr/currents.hpp"
#include "geotr/fields.hpp"
#include "geotr/flow.hpp"
#include "geotr/forms.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace geotr {

// ---------------------------------------------------------------------------
// Time grids

/// Uniform grid t_k = t0 + k*dt, k = 0..n.
inline std::vector<double> uniform_times(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  long n = std::lround((t1 - t0) / dt);
  if (n < 1) n = 1;
  std::vector<double> ts(n + 1);
  for (long k = 0; k <= n; ++k) ts[k] = t0 + (t1 - t0) * static_cast<double>(k) / n;
  return ts;
}

struct SnapReport {
  bool snapped = false;
  double max_shift = 0.0;
};

/// Replaces `times` by the uniform grid with the same end points and count;
/// reports how far any requested time moved.
inline std::vector<double> snap_uniform(const std::vector<double>& times, SnapReport* rep = nullptr) {
  if (times.size() < 2) {
    if (rep) *rep = {};
    return times;
  }
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ConfigError("path times must be strictly increasing");
  const std::size_t n = times.size() - 1;
  std::vector<double> out(times.size());
  SnapReport r;
  for (std::size_t k = 0; k <= n; ++k) {
    out[k] = times.front() + (times.back() - times.front()) * static_cast<double>(k) / n;
    double shift = std::abs(out[k] - times[k]);
    r.max_shift = std::max(r.max_shift, shift);
  }
  r.snapped = r.max_shift > 1e-12 * std::max(1.0, std::abs(times.back()));
  if (rep) *rep = r;
  return out;
}

/// Uniformly spaced (t_k, T_k).
struct CurrentPath {
  std::vector<double> times;
  std::vector<Current> currents;
  SnapReport snap;

  std::size_t size() const { return times.size(); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Trapezoid weights on a uniform grid.
inline std::vector<double> trapezoid_weights(const std::vector<double>& ts) {
  std::vector<double> w(ts.size(), 0.0);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    double h = ts[k] - ts[k - 1];
    w[k - 1] += 0.5 * h;
    w[k] += 0.5 * h;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Lagrangian transport of vectors

/// Samples of f_t(y) = rho_t(y)^p * (grad X_t . vbar)(X_{-t}(y)) with p = 1
/// if `with_density`, else 0. One backward integration per point: with
/// K = grad X_{-t}(y), grad X_t(X_{-t} y) = K^{-1} and rho_t(y) = det K.
inline Vec lagrangian_push_vector(const VectorField& b, const VectorField& vbar, double t, const Vec& y,
                                  const IntegratorConfig& cfg, bool with_density) {
  if (t == 0.0) return vbar(0.0, y);
  FlowSample back = integrate(b, t, 0.0, y, cfg, true);
  Vec v0 = vbar(0.0, back.endpoint);
  Vec pushed = back.jacobian.lu().solve(v0);
  return with_density ? (back.det_j * pushed).eval() : pushed;
}

/// v(t, x) = (grad X_t . vbar)(X_{-t}(x)) at each query point.
inline std::vector<Vec> vae_lagrangian(const VectorField& b, const VectorField& vbar, double t,
                                       const std::vector<Vec>& points, const IntegratorConfig& cfg = {}) {
  require_dim(b.dim(), vbar.dim(), "vae_lagrangian");
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(lagrangian_push_vector(b, vbar, t, x, cfg, false));
  return out;
}

/// Node samples of the Lagrangian formula on a lattice (point-major).
inline std::vector<double> lagrangian_samples(const VectorField& b, const VectorField& vbar, const Box& box,
                                              double t, const IntegratorConfig& cfg, bool with_density) {
  std::vector<double> s(box.num_nodes() * box.dim);
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    Vec v = lagrangian_push_vector(b, vbar, t, box.node(i), cfg, with_density);
    for (int c = 0; c < box.dim; ++c) s[i * box.dim + c] = v[c];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Eulerian grid solvers

struct EulerianGridState {
  Box box;
  double t = 0.0;
  std::vector<double> samples;  // point-major
  double dt = 0.0;              // step used to reach this state
  long steps = 0;               // cumulative step count

  Vec at_node(std::size_t i) const {
    Vec v(box.dim);
    for (int c = 0; c < box.dim; ++c) v[c] = samples[i * box.dim + c];
    return v;
  }

  VectorField as_field(Interp order = Interp::Linear) const {
    return VectorField::from_grid(GridData{box, samples, order, true}, {"grid_state", {}, {}, {}});
  }
};

struct EulerianConfig {
  double cfl = 0.5;
  /// Requested time step; 0 selects cfl*h/|b|_inf. A requested step above
  /// that bound is a configuration error.
  double dt = 0.0;
};

/// Discrete L2 norm sqrt(sum |a-b|^2 dV) over lattice samples.
inline double l2_difference(const Box& box, const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("l2_difference: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s * box.cell_volume());
}

namespace detail {

/// Periodic central difference d/dx_axis of component c at node idx.
inline double central_diff(const Box& box, const std::vector<double>& s, std::size_t idx, int c, int axis) {
  const int d = box.dim;
  auto ijk = box.multi_index(idx);
  auto p = ijk, m = ijk;
  p[axis] = (ijk[axis] + 1) % box.n[axis];
  m[axis] = (ijk[axis] - 1 + box.n[axis]) % box.n[axis];
  return (s[box.index(p) * d + c] - s[box.index(m) * d + c]) / (2.0 * box.h(axis));
}

/// Classic RK4 over flat state vectors; rhs(t, y, out).
template <class Rhs>
void rk4_flat(Rhs&& rhs, double t, double h, std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

inline double max_speed(const VectorField& b, const Box& box, double t = 0.0) {
  double m = 0.0;
  for (std::size_t i = 0; i < box.num_nodes(); ++i) m = std::max(m, b(t, box.node(i)).norm());
  return m;
}

inline double stable_dt(double speed, const Box& box, const EulerianConfig& cfg) {
  double bound = speed > 0.0 ? cfg.cfl * box.min_h() / speed : std::numeric_limits<double>::infinity();
  if (cfg.dt > 0.0) {
    if (cfg.dt > bound * (1.0 + 1e-12))
      throw ConfigError("CFL violation: dt=" + std::to_string(cfg.dt) + " exceeds cfl*h/|b|=" +
                        std::to_string(bound));
    return cfg.dt;
  }
  return bound;
}

inline bool all_finite(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Steps `y` from t0 through every output time; records states.
template <class Rhs>
std::vector<EulerianGridState> march(Rhs&& rhs, const Box& box, std::vector<double> y, double t0,
                                     const std::vector<double>& times, double dt_max, const char* what) {
  std::vector<EulerianGridState> out;
  double t = t0;
  long steps = 0;
  for (double target : times) {
    if (target < t - 1e-14) throw ConfigError("output times must be non-decreasing");
    double span = target - t;
    long n = std::isfinite(dt_max) ? static_cast<long>(std::ceil(span / dt_max - 1e-9)) : (span > 0 ? 1 : 0);
    double h = n > 0 ? span / n : 0.0;
    for (long k = 0; k < n; ++k) {
      rk4_flat(rhs, t + k * h, h, y);
      ++steps;
      if (!all_finite(y)) throw InstabilityError(std::string(what) + ": non-finite state", steps);
    }
    t = target;
    out.push_back(EulerianGridState{box, t, y, h, steps});
  }
  return out;
}

}  // namespace detail

/// Eulerian VAE: d/dt v = -grad v . b + grad b . v, periodic central
/// differences for grad v, RK4 in time. `vbar` is sampled on the box nodes;
/// b's Jacobian comes from the field (analytic where available).
inline std::vector<EulerianGridState> vae_eulerian(const VectorField& b, const VectorField& vbar, const Box& box,
                                                   const std::vector<double>& times,
                                                   const EulerianConfig& cfg = {}) {
  require_dim(b.dim(), box.dim, "vae_eulerian");
  require_dim(vbar.dim(), box.dim, "vae_eulerian");
  if (!b.is_autonomous()) throw ConfigError("vae_eulerian: velocity must be autonomous");
  const int d = box.dim;
  const std::size_t N = box.num_nodes();
  std::vector<Vec> bn(N);
  std::vector<Mat> Dbn(N);
  for (std::size_t i = 0; i < N; ++i) {
    Vec x = box.node(i);
    bn[i] = b(0.0, x);
    Dbn[i] = b.jacobian(0.0, x);
  }
  double speed = 0.0;
  for (const auto& v : bn) speed = std::max(speed, v.norm());
  const double dt_max = detail::stable_dt(speed, box, cfg);

  std::vector<double> y(N * d);
  for (std::size_t i = 0; i < N; ++i) {
    Vec v = vbar(0.0, box.node(i));
    for (int c = 0; c < d; ++c) y[i * d + c] = v[c];
  }
  auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& out) {
    for (std::size_t i = 0; i < N; ++i) {
      Mat Dv(d, d);
      Vec v(d);
      for (int c = 0; c < d; ++c) {
        v[c] = s[i * d + c];
        for (int a = 0; a < d; ++a) Dv(c, a) = detail::central_diff(box, s, i, c, a);
      }
      Vec r = -Dv * bn[i] + Dbn[i] * v;
      for (int c = 0; c < d; ++c) out[i * d + c] = r[c];
    }
  };
  return detail::march(rhs, box, std::move(y), 0.0, times, dt_max, "vae_eulerian");
}

// ---------------------------------------------------------------------------
// Geometric transport equation

/// AC pushforward along a whole time grid with one backward integration per
/// node (recording K = grad X_{-t_k}(y) at every t_k).
inline std::vector<ACCurrent> pushforward_path(const ACCurrent& T, const VectorField& b,
                                               const std::vector<double>& times, const IntegratorConfig& cfg) {
  const Box& box = T.box();
  const int d = T.dim();
  std::vector<std::vector<double>> samples(times.size(), std::vector<double>(box.num_nodes() * d, 0.0));
  std::vector<double> back_times(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) back_times[k] = -times[k];
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    auto rec = integrate_recording(b, 0.0, back_times, box.node(i), cfg, true);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Vec w = T.at(rec[k].endpoint);
      if (w.squaredNorm() == 0.0) continue;
      Vec pushed = rec[k].det_j * rec[k].jacobian.lu().solve(w);
      for (int c = 0; c < d; ++c) samples[k][i * d + c] = pushed[c];
    }
  }
  std::vector<ACCurrent> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] == 0.0) out.push_back(T);
    else out.push_back(ACCurrent::from_samples(box, std::move(samples[k])));
  }
  return out;
}

/// T_t = (X_t)_* Tbar at each time of the (snapped) uniform grid.
inline CurrentPath gte_solve(const VectorField& b, const Current& Tbar, const std::vector<double>& times,
                             const IntegratorConfig& cfg = {}, const PushOptions& opt = {}) {
  if (!b.is_autonomous()) throw ConfigError("gte_solve requires an autonomous velocity field");
  CurrentPath path;
  path.times = snap_uniform(times, &path.snap);
  if (auto* ac = std::get_if<ACCurrent>(&Tbar)) {
    for (auto& c : pushforward_path(*ac, b, path.times, cfg)) path.currents.emplace_back(std::move(c));
    return path;
  }
  const auto& chain = std::get<CurveChain>(Tbar);
  for (double t : path.times) path.currents.emplace_back(pushforward(chain, FlowMap{b, t, cfg}, opt));
  return path;
}

/// int <T_t, omega> psi'(t) dt - int <L_b T_t, omega> psi(t) dt by the
/// trapezoid rule on the path's grid. Psi provides psi(t) and
/// psi.derivative(t) (TimeBump is the standard choice).
template <class Psi = TimeBump>
double weak_residual(const CurrentPath& path, const VectorField& b, const TestForm1& omega,
                     const Psi& psi = {}) {
  auto w = trapezoid_weights(path.times);
  double r = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    double t = path.times[k];
    double dpsi = psi.derivative(t), p = psi(t);
    if (dpsi != 0.0) r += w[k] * pair(path.currents[k], omega) * dpsi;
    if (p != 0.0) r -= w[k] * lie_derivative_pair(path.currents[k], b, omega) * p;
  }
  return r;
}

/// T_t = (X_t)_* Tbar + int_0^t (X_{t-s})_* R_s ds with the trapezoid rule
/// on the source path's own grid; sources accumulate as formal sums.
inline CurrentPath duhamel_solve(const VectorField& b, const Current& Tbar, const CurrentPath& sources,
                                 const IntegratorConfig& cfg = {}, const PushOptions& opt = {}) {
  if (!b.is_autonomous()) throw ConfigError("duhamel_solve requires an autonomous velocity field");
  CurrentPath path;
  path.times = sources.times;
  path.snap = sources.snap;
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    const double t = path.times[k];
    Current T = pushforward(Tbar, FlowMap{b, t, cfg}, opt);
    if (k > 0) {
      std::vector<double> sub(path.times.begin(), path.times.begin() + static_cast<long>(k) + 1);
      auto w = trapezoid_weights(sub);
      for (std::size_t j = 0; j <= k; ++j) {
        Current pushed = pushforward(sources.currents[j], FlowMap{b, t - path.times[j], cfg}, opt);
        T = add_scaled(T, pushed, w[j]);
      }
    }
    path.currents.push_back(std::move(T));
  }
  return path;
}

/// Constant-in-time source path on a uniform grid.
inline CurrentPath constant_path(const Current& R, const std::vector<double>& times) {
  CurrentPath p;
  p.times = snap_uniform(times, &p.snap);
  p.currents.assign(p.times.size(), R);
  return p;
}

}  // namespace geotr
