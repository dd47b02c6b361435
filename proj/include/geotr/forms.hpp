/// @file forms.hpp
/// @brief Compactly supported test functions and 1-forms: polynomial
/// coefficients times a C-infinity plateau bump, with exact derivatives.
#pragma once

#include "geotr/core.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace geotr {

struct Monomial {
  double coef = 0.0;
  std::array<int, 3> exp{0, 0, 0};
};

/// Sum of monomials in (x, y, z).
struct Polynomial {
  std::vector<Monomial> terms;

  static Polynomial constant(double c) { return Polynomial{{{c, {0, 0, 0}}}}; }

  int degree() const {
    int d = 0;
    for (const auto& m : terms) d = std::max(d, m.exp[0] + m.exp[1] + m.exp[2]);
    return d;
  }

  double operator()(const Vec& x) const {
    double s = 0.0;
    for (const auto& m : terms) {
      double v = m.coef;
      for (int a = 0; a < x.size(); ++a) v *= ipow(x[a], m.exp[a]);
      s += v;
    }
    return s;
  }

  Vec gradient(const Vec& x) const {
    Vec g = Vec::Zero(x.size());
    for (const auto& m : terms) {
      for (int a = 0; a < x.size(); ++a) {
        if (m.exp[a] == 0) continue;
        double v = m.coef * m.exp[a];
        for (int b = 0; b < x.size(); ++b) v *= ipow(x[b], b == a ? m.exp[b] - 1 : m.exp[b]);
        g[a] += v;
      }
    }
    return g;
  }

  static double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
  }
};

/// Radial plateau bump: 1 for |x-c| <= r_in, 0 for |x-c| >= r_out, C^inf in
/// between (ratio of exp(-1/u) cutoffs).
struct Bump {
  Vec center;
  double r_in = 0.0;
  double r_out = 1.0;

  double operator()(const Vec& x) const {
    double s = param(x);
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    double a = g(1.0 - s), b = g(s);
    return a / (a + b);
  }

  Vec gradient(const Vec& x) const {
    Vec d = x - center;
    double r = d.norm();
    double s = (r - r_in) / (r_out - r_in);
    if (s <= 0.0 || s >= 1.0 || r == 0.0) return Vec::Zero(x.size());
    double a = g(1.0 - s), b = g(s);
    double dphi_ds = -(a * b) * (1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s)) / ((a + b) * (a + b));
    return (dphi_ds / (r_out - r_in) / r) * d;
  }

  bool supports(const Vec& x) const { return (x - center).norm() < r_out; }

 private:
  double param(const Vec& x) const { return ((x - center).norm() - r_in) / (r_out - r_in); }
  static double g(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
};

/// Compactly supported smooth function f = p * phi.
struct TestForm0 {
  Polynomial poly;
  Bump bump;

  double operator()(const Vec& x) const { return poly(x) * bump(x); }
  Vec gradient(const Vec& x) const { return bump(x) * poly.gradient(x) + poly(x) * bump.gradient(x); }
};

/// Compactly supported 1-form omega = sum_i a_i dx^i with proxy vector
/// a = phi * (alpha_1, ..., alpha_d).
struct TestForm1 {
  int dim = 2;
  std::vector<Polynomial> coeffs;
  Bump bump;
  std::string label;

  /// Proxy vector a(x).
  Vec operator()(const Vec& x) const {
    double phi = bump(x);
    Vec a(dim);
    for (int i = 0; i < dim; ++i) a[i] = phi == 0.0 ? 0.0 : phi * coeffs[i](x);
    return a;
  }

  /// Da(i, j) = d a_i / d x_j.
  Mat gradient(const Vec& x) const {
    Mat D = Mat::Zero(dim, dim);
    double phi = bump(x);
    Vec gphi = bump.gradient(x);
    if (phi == 0.0 && gphi.squaredNorm() == 0.0) return D;
    for (int i = 0; i < dim; ++i) {
      Vec row = phi * coeffs[i].gradient(x) + coeffs[i](x) * gphi;
      D.row(i) = row.transpose();
    }
    return D;
  }

  /// d(omega)(u, w) = sum_{i,j} d_j a_i (u_j w_i - u_i w_j).
  static double d_omega(const Mat& Da, const Vec& u, const Vec& w) {
    return w.dot(Da * u) - u.dot(Da * w);
  }

  double d_omega(const Vec& x, const Vec& u, const Vec& w) const { return d_omega(gradient(x), u, w); }

  /// Interior product omega(b) at x and its gradient d(omega(b)) given b's value and Jacobian.
  Vec grad_contraction(const Vec& x, const Vec& b, const Mat& Db) const {
    return gradient(x).transpose() * b + Db.transpose() * (*this)(x);
  }
};

namespace detail {

inline Polynomial poly(std::initializer_list<Monomial> ms) { return Polynomial{std::vector<Monomial>(ms)}; }

inline std::vector<std::vector<Polynomial>> catalog_patterns(int dim) {
  if (dim == 2) {
    return {
        {poly({{1.0, {0, 0, 0}}}), Polynomial{}},
        {Polynomial{}, poly({{1.0, {0, 0, 0}}})},
        {poly({{-1.0, {0, 1, 0}}}), poly({{1.0, {1, 0, 0}}})},
        {poly({{1.0, {1, 1, 0}}}), poly({{1.0, {2, 0, 0}}, {-1.0, {0, 2, 0}}, {1.0, {0, 0, 0}}})},
        {poly({{1.0, {0, 3, 0}}, {-1.0, {1, 0, 0}}}), poly({{1.0, {4, 0, 0}}, {1.0, {0, 1, 0}}})},
    };
  }
  return {
      {poly({{1.0, {0, 0, 0}}}), Polynomial{}, Polynomial{}},
      {Polynomial{}, poly({{1.0, {0, 0, 0}}}), poly({{1.0, {0, 0, 0}}})},
      {poly({{-1.0, {0, 1, 0}}}), poly({{1.0, {1, 0, 0}}}), poly({{1.0, {0, 0, 1}}})},
      {poly({{1.0, {1, 1, 0}}}), poly({{1.0, {2, 0, 0}}, {-1.0, {0, 0, 2}}, {1.0, {0, 0, 0}}}),
       poly({{1.0, {0, 1, 1}}})},
      {poly({{1.0, {0, 3, 0}}, {-1.0, {1, 0, 0}}}), poly({{1.0, {4, 0, 0}}, {1.0, {0, 0, 1}}}),
       poly({{1.0, {1, 0, 2}}})},
  };
}

}  // namespace detail

/// Fixed battery of 25 forms (5 bump centres x 5 coefficient patterns) used
/// as the weak-star proximity proxy. Centres sit within 0.5*scale of
/// `origin`; each bump is 1 up to 0.5*scale and vanishes beyond 2*scale.
inline std::vector<TestForm1> form_catalog(int dim, double scale = 1.0, const Vec* origin = nullptr) {
  if (dim != 2 && dim != 3) throw DimensionError("form catalog: dimension must be 2 or 3");
  Vec o = origin ? *origin : Vec::Zero(dim);
  std::vector<Vec> centers;
  centers.push_back(o);
  for (int k = 0; k < 4; ++k) {
    Vec c = o;
    if (dim == 2) {
      c[k / 2] += (k % 2 == 0 ? 0.5 : -0.5) * scale;
    } else {
      static const int axis[4] = {0, 0, 1, 2};
      static const double sgn[4] = {0.5, -0.5, 0.5, 0.5};
      c[axis[k]] += sgn[k] * scale;
    }
    centers.push_back(c);
  }
  auto patterns = detail::catalog_patterns(dim);
  std::vector<TestForm1> out;
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
      TestForm1 f;
      f.dim = dim;
      f.coeffs = patterns[pi];
      f.bump = Bump{centers[ci], 0.5 * scale, 2.0 * scale};
      f.label = "c" + std::to_string(ci) + "p" + std::to_string(pi);
      out.push_back(std::move(f));
    }
  }
  return out;
}

/// Smooth time weight psi in C^inf_c((a,b)): exp(1 - 1/(1-u^2)) with u the
/// affine image of t in (-1,1); psi peaks at 1 in the middle.
struct TimeBump {
  double a = 0.05;
  double b = 0.95;

  double operator()(double t) const {
    double u = param(t);
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  }
  double derivative(double t) const {
    double u = param(t);
    if (std::abs(u) >= 1.0) return 0.0;
    double q = 1.0 - u * u;
    return (*this)(t) * (-2.0 * u / (q * q)) * (2.0 / (b - a));
  }

 private:
  double param(double t) const { return (2.0 * t - a - b) / (b - a); }
};

}  // namespace geotr
