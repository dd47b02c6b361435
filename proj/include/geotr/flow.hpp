/// @file flow.hpp
/// @brief Flow map X_t of a vector field together with its Jacobian (from the
/// variational equation dJ/dt = grad b(X) J) and the Lebesgue density
/// rho(t, x) = 1 / det grad X_t (X_{-t}(x)).
#pragma once

#include "geotr/fields.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace geotr {

enum class Scheme { RK4, RK2 };

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::RK4;
  long max_steps = 100'000'000;
};

struct FlowSample {
  Vec start;
  double t = 0.0;
  Vec endpoint;
  Mat jacobian;
  double det_j = 1.0;
  double density = 1.0;  // rho(t, endpoint) = 1 / det_j
};

namespace detail {

inline long step_count(double span, const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("integrator dt must be positive");
  double n = std::ceil(std::abs(span) / cfg.dt - 1e-9);
  if (n > static_cast<double>(cfg.max_steps))
    throw IntegrationError("step budget exceeded: " + std::to_string(n) + " > " +
                           std::to_string(cfg.max_steps));
  return static_cast<long>(n);
}

/// One step of the joint (position, Jacobian) system from time t with step h.
/// When J is null only the position is advanced.
inline void flow_step(const VectorField& b, double t, double h, Scheme scheme, Vec& x, Mat* J) {
  if (scheme == Scheme::RK4) {
    Vec k1 = b(t, x);
    Vec x2 = x + 0.5 * h * k1;
    Vec k2 = b(t + 0.5 * h, x2);
    Vec x3 = x + 0.5 * h * k2;
    Vec k3 = b(t + 0.5 * h, x3);
    Vec x4 = x + h * k3;
    Vec k4 = b(t + h, x4);
    if (J) {
      Mat K1 = b.jacobian(t, x) * (*J);
      Mat K2 = b.jacobian(t + 0.5 * h, x2) * ((*J) + 0.5 * h * K1);
      Mat K3 = b.jacobian(t + 0.5 * h, x3) * ((*J) + 0.5 * h * K2);
      Mat K4 = b.jacobian(t + h, x4) * ((*J) + h * K3);
      *J += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    }
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  } else {
    // explicit midpoint
    Vec k1 = b(t, x);
    Vec xm = x + 0.5 * h * k1;
    Vec k2 = b(t + 0.5 * h, xm);
    if (J) {
      Mat K1 = b.jacobian(t, x) * (*J);
      Mat K2 = b.jacobian(t + 0.5 * h, xm) * ((*J) + 0.5 * h * K1);
      *J += h * K2;
    }
    x += h * k2;
  }
}

inline void check_finite(const Vec& x, const Mat* J, double t) {
  if (!x.allFinite() || (J && !J->allFinite()))
    throw IntegrationError("non-finite flow state at t=" + std::to_string(t));
}

}  // namespace detail

/// Integrates dX/ds = b(s, X) from s = t0 to s = t1 starting at x0. Negative
/// spans step backwards with a negated step.
inline FlowSample integrate(const VectorField& b, double t0, double t1, const Vec& x0,
                            const IntegratorConfig& cfg, bool with_jacobian = true) {
  require_dim(static_cast<int>(x0.size()), b.dim(), "integrate");
  const int d = b.dim();
  const double span = t1 - t0;
  const long n = detail::step_count(span, cfg);
  FlowSample s;
  s.start = x0;
  s.t = span;
  Vec x = x0;
  Mat J = Mat::Identity(d, d);
  if (n > 0) {
    const double h = span / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      detail::flow_step(b, t0 + k * h, h, cfg.scheme, x, with_jacobian ? &J : nullptr);
      detail::check_finite(x, with_jacobian ? &J : nullptr, t0 + (k + 1) * h);
    }
  }
  s.endpoint = x;
  s.jacobian = J;
  s.det_j = J.determinant();
  s.density = 1.0 / s.det_j;
  return s;
}

/// X_t(x0) with Jacobian, starting from time 0.
inline FlowSample advance(const VectorField& b, double t, const Vec& x0,
                          const IntegratorConfig& cfg = {}) {
  return integrate(b, 0.0, t, x0, cfg, true);
}

/// Position-only X_t(x0).
inline Vec flow_point(const VectorField& b, double t, const Vec& x0,
                      const IntegratorConfig& cfg = {}) {
  return integrate(b, 0.0, t, x0, cfg, false).endpoint;
}

/// Integrates once from x0 and records the state at each requested time.
/// `times` must be monotone in one direction starting from t0 (0 allowed).
inline std::vector<FlowSample> integrate_recording(const VectorField& b, double t0,
                                                   const std::vector<double>& times,
                                                   const Vec& x0, const IntegratorConfig& cfg,
                                                   bool with_jacobian = true) {
  const int d = b.dim();
  std::vector<FlowSample> out;
  out.reserve(times.size());
  Vec x = x0;
  Mat J = Mat::Identity(d, d);
  double tc = t0;
  for (double target : times) {
    const long n = detail::step_count(target - tc, cfg);
    if (n > 0) {
      const double h = (target - tc) / static_cast<double>(n);
      for (long k = 0; k < n; ++k) {
        detail::flow_step(b, tc + k * h, h, cfg.scheme, x, with_jacobian ? &J : nullptr);
        detail::check_finite(x, with_jacobian ? &J : nullptr, tc + (k + 1) * h);
      }
    }
    tc = target;
    FlowSample s;
    s.start = x0;
    s.t = target - t0;
    s.endpoint = x;
    s.jacobian = J;
    s.det_j = J.determinant();
    s.density = 1.0 / s.det_j;
    out.push_back(std::move(s));
  }
  return out;
}

/// rho(t, x): backtrack to x0 = X_{-t}(x), then integrate forward with the
/// variational equation and return 1/det J.
inline double density_at(const VectorField& b, double t, const Vec& x,
                         const IntegratorConfig& cfg = {}) {
  Vec x0 = integrate(b, t, 0.0, x, cfg, false).endpoint;
  return integrate(b, 0.0, t, x0, cfg, true).density;
}

/// max over samples of |X_t(X_s(x)) - X_{t+s}(x)|.
inline double semigroup_defect(const VectorField& b, double t, double s,
                               const std::vector<Vec>& points, const IntegratorConfig& cfg = {}) {
  double worst = 0.0;
  for (const auto& x : points) {
    // X_s first (from time 0), then X_t starting from time s.
    Vec xs = integrate(b, 0.0, s, x, cfg, false).endpoint;
    Vec xts = integrate(b, s, s + t, xs, cfg, false).endpoint;
    Vec direct = integrate(b, 0.0, t + s, x, cfg, false).endpoint;
    worst = std::max(worst, (xts - direct).norm());
  }
  return worst;
}

/// Estimates sup |div b| at the given points.
inline double max_abs_divergence(const VectorField& b, const std::vector<Vec>& points,
                                 double t = 0.0) {
  double m = 0.0;
  for (const auto& x : points) m = std::max(m, std::abs(divergence(b, t, x)));
  return m;
}

}  // namespace geotr
