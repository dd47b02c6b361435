/// @file fields.hpp
/// @brief Vector fields on R^2/R^3 (closed form or periodic grid samples) and
/// the pointwise differential operators built on them.
#pragma once

#include "geotr/core.hpp"
#include "geotr/expr.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace geotr {

enum class Interp { Linear, Cubic };

/// Smooth compactly supported window chi(x) = (1 - |x-c|^2/R^2)^4 on the ball
/// of radius R, zero outside. C^3 across the sphere |x-c| = R.
struct Window {
  Vec center;
  double radius = 1.0;

  double operator()(const Vec& x) const {
    double q = 1.0 - (x - center).squaredNorm() / (radius * radius);
    if (q <= 0.0) return 0.0;
    double q2 = q * q;
    return q2 * q2;
  }

  Vec gradient(const Vec& x) const {
    Vec d = x - center;
    double q = 1.0 - d.squaredNorm() / (radius * radius);
    if (q <= 0.0) return Vec::Zero(x.size());
    // d/dx (q^4) = 4 q^3 * (-2 d / R^2)
    return (-8.0 * q * q * q / (radius * radius)) * d;
  }
};

/// Periodic (or bounded) node-sampled vector field. Samples are point-major:
/// samples[idx*dim + c] with idx = Box::index.
struct GridData {
  Box box;
  std::vector<double> samples;
  Interp order = Interp::Linear;
  bool periodic = true;
};

class VectorField {
 public:
  using EvalFn = std::function<Vec(double, const Vec&)>;
  using JacFn = std::function<Mat(double, const Vec&)>;

  struct Metadata {
    std::string name;
    std::optional<double> sup_bound;   // declared ||f||_inf
    std::optional<double> lipschitz;   // declared Lipschitz constant
    std::optional<double> div_bound;   // declared ||div f||_inf
  };

  VectorField() = default;

  static VectorField analytic(int dim, EvalFn f, JacFn jac = {},
                              bool time_dependent = false, Metadata meta = {}) {
    return VectorField(std::make_shared<const Impl>(
        Impl{dim, AnalyticRep{std::move(f), std::move(jac), time_dependent}, std::move(meta)}));
  }

  /// One expression per component; optional dim*dim Jacobian expressions in
  /// row-major order (entry (i,j) = d f_i / d x_j).
  static VectorField from_expressions(std::vector<FieldExpr> comps,
                                      std::vector<FieldExpr> jac = {},
                                      Metadata meta = {}) {
    const int dim = static_cast<int>(comps.size());
    if (dim < 2 || dim > 3) throw DimensionError("expression field must have 2 or 3 components");
    for (const auto& e : comps)
      if (e.spatial_arity() > dim)
        throw DimensionError("expression uses a coordinate beyond the field dimension");
    if (!jac.empty() && static_cast<int>(jac.size()) != dim * dim)
      throw DimensionError("Jacobian expressions must have dim*dim entries");
    bool td = false;
    for (const auto& e : comps) td = td || e.depends_on_time();
    EvalFn f = [comps, dim](double t, const Vec& x) {
      double env[4] = {0.0, 0.0, 0.0, t};
      for (int a = 0; a < dim; ++a) env[a] = x[a];
      Vec out(dim);
      for (int i = 0; i < dim; ++i) out[i] = comps[i].eval(env);
      return out;
    };
    JacFn jf;
    if (!jac.empty()) {
      jf = [jac, dim](double t, const Vec& x) {
        double env[4] = {0.0, 0.0, 0.0, t};
        for (int a = 0; a < dim; ++a) env[a] = x[a];
        Mat m(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) m(i, j) = jac[i * dim + j].eval(env);
        return m;
      };
    }
    return analytic(dim, std::move(f), std::move(jf), td, std::move(meta));
  }

  static VectorField from_grid(GridData g, Metadata meta = {}) {
    if (g.samples.size() != g.box.num_nodes() * g.box.dim)
      throw DimensionError("grid samples do not match box resolution");
    for (int a = 0; a < g.box.dim; ++a) {
      int need = g.order == Interp::Cubic ? 4 : 2;
      if (g.box.n[a] < need) throw ConfigError("grid resolution too small for interpolation order");
    }
    const int dim = g.box.dim;
    return VectorField(std::make_shared<const Impl>(Impl{dim, std::move(g), std::move(meta)}));
  }

  int dim() const { return impl_->dim; }
  bool valid() const { return static_cast<bool>(impl_); }
  const Metadata& metadata() const { return impl_->meta; }
  const std::string& name() const { return impl_->meta.name; }

  bool is_grid() const { return std::holds_alternative<GridData>(impl_->rep); }
  const GridData* grid() const { return std::get_if<GridData>(&impl_->rep); }

  bool is_autonomous() const {
    if (auto* a = std::get_if<AnalyticRep>(&impl_->rep)) return !a->time_dependent;
    return true;
  }

  bool has_analytic_jacobian() const {
    if (auto* a = std::get_if<AnalyticRep>(&impl_->rep)) return static_cast<bool>(a->jac);
    return true;  // grid: exact derivative of the interpolant
  }

  Vec operator()(double t, const Vec& x) const {
    require_dim(static_cast<int>(x.size()), dim(), "evaluate");
    if (auto* a = std::get_if<AnalyticRep>(&impl_->rep)) return a->f(t, x);
    return grid_eval(std::get<GridData>(impl_->rep), x, nullptr);
  }

  /// Analytic Jacobian if present, exact interpolant derivative for grid
  /// fields, central differences otherwise.
  Mat jacobian(double t, const Vec& x) const {
    require_dim(static_cast<int>(x.size()), dim(), "jacobian");
    if (auto* a = std::get_if<AnalyticRep>(&impl_->rep)) {
      if (a->jac) return a->jac(t, x);
      return fd_jacobian(t, x);
    }
    Mat J(dim(), dim());
    grid_eval(std::get<GridData>(impl_->rep), x, &J);
    return J;
  }

  /// Central-difference Jacobian with per-axis step max(1e-5, 1e-5*|x_a|).
  Mat fd_jacobian(double t, const Vec& x) const {
    const int d = dim();
    Mat J(d, d);
    for (int a = 0; a < d; ++a) {
      double h = std::max(1e-5, 1e-5 * std::abs(x[a]));
      Vec xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      J.col(a) = ((*this)(t, xp) - (*this)(t, xm)) / (2.0 * h);
    }
    return J;
  }

  VectorField with_metadata(Metadata meta) const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->meta = std::move(meta);
    return VectorField(std::move(impl));
  }

 private:
  struct AnalyticRep {
    EvalFn f;
    JacFn jac;
    bool time_dependent = false;
  };
  struct Impl {
    int dim = 2;
    std::variant<AnalyticRep, GridData> rep;
    Metadata meta;
  };

  explicit VectorField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  // Per-axis interpolation stencil: node offsets, weights and d/du weights.
  struct AxisStencil {
    int count = 2;
    int idx[4]{};
    double w[4]{};
    double dw[4]{};
  };

  static int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
  }

  static AxisStencil axis_stencil(const GridData& g, int a, double coord) {
    const int n = g.box.n[a];
    const double h = g.box.h(a);
    double u = (coord - g.box.lo[a]) / h;
    AxisStencil s;
    if (!g.periodic) {
      // Nodes 0..n-1 span [lo, lo+(n-1)h].
      const double eps = 1e-12 * n;
      if (u < -eps || u > (n - 1) + eps)
        throw DomainError("grid field queried outside its box");
      u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    }
    int i0 = static_cast<int>(std::floor(u));
    if (!g.periodic && i0 >= n - 1) i0 = n - 2;
    double f = u - i0;
    auto node = [&](int i) {
      if (g.periodic) return wrap(i, n);
      return std::clamp(i, 0, n - 1);
    };
    if (g.order == Interp::Linear) {
      s.count = 2;
      s.idx[0] = node(i0);
      s.idx[1] = node(i0 + 1);
      s.w[0] = 1.0 - f;
      s.w[1] = f;
      s.dw[0] = -1.0 / h;
      s.dw[1] = 1.0 / h;
    } else {
      // Catmull-Rom (cubic Hermite with central-difference slopes).
      s.count = 4;
      for (int k = 0; k < 4; ++k) s.idx[k] = node(i0 - 1 + k);
      const double f2 = f * f, f3 = f2 * f;
      s.w[0] = 0.5 * (-f3 + 2 * f2 - f);
      s.w[1] = 0.5 * (3 * f3 - 5 * f2 + 2);
      s.w[2] = 0.5 * (-3 * f3 + 4 * f2 + f);
      s.w[3] = 0.5 * (f3 - f2);
      s.dw[0] = 0.5 * (-3 * f2 + 4 * f - 1) / h;
      s.dw[1] = 0.5 * (9 * f2 - 10 * f) / h;
      s.dw[2] = 0.5 * (-9 * f2 + 8 * f + 1) / h;
      s.dw[3] = 0.5 * (3 * f2 - 2 * f) / h;
    }
    return s;
  }

  static Vec grid_eval(const GridData& g, const Vec& x, Mat* jac) {
    const int d = g.box.dim;
    AxisStencil st[3];
    for (int a = 0; a < d; ++a) st[a] = axis_stencil(g, a, x[a]);
    Vec out = Vec::Zero(d);
    if (jac) *jac = Mat::Zero(d, d);
    const int c0 = st[0].count, c1 = d > 1 ? st[1].count : 1, c2 = d > 2 ? st[2].count : 1;
    for (int k = 0; k < c2; ++k) {
      for (int j = 0; j < c1; ++j) {
        for (int i = 0; i < c0; ++i) {
          std::array<int, 3> ijk{st[0].idx[i], d > 1 ? st[1].idx[j] : 0, d > 2 ? st[2].idx[k] : 0};
          const double* s = &g.samples[g.box.index(ijk) * d];
          double wx = st[0].w[i], wy = d > 1 ? st[1].w[j] : 1.0, wz = d > 2 ? st[2].w[k] : 1.0;
          double w = wx * wy * wz;
          for (int c = 0; c < d; ++c) out[c] += w * s[c];
          if (jac) {
            double gw[3] = {st[0].dw[i] * wy * wz, d > 1 ? wx * st[1].dw[j] * wz : 0.0,
                            d > 2 ? wx * wy * st[2].dw[k] : 0.0};
            for (int c = 0; c < d; ++c)
              for (int a = 0; a < d; ++a) (*jac)(c, a) += gw[a] * s[c];
          }
        }
      }
    }
    return out;
  }

  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Pointwise operators

inline Vec evaluate(const VectorField& f, double t, const Vec& x) { return f(t, x); }
inline Mat jacobian(const VectorField& f, double t, const Vec& x) { return f.jacobian(t, x); }

inline double divergence(const VectorField& f, double t, const Vec& x) {
  return f.jacobian(t, x).trace();
}

inline Vec curl_from_jacobian(const Mat& J) {
  // J(i,j) = d f_i / d x_j
  return make_vec({J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)});
}

inline Vec curl3(const VectorField& f, double t, const Vec& x) {
  if (f.dim() != 3) throw DimensionError("curl3 requires a 3-dimensional field");
  return curl_from_jacobian(f.jacobian(t, x));
}

/// [b,v] = grad b . v - grad v . b, with (grad b . v)_i = sum_j d_j b_i v_j.
inline Vec lie_bracket(const VectorField& b, const VectorField& v, double t, const Vec& x) {
  require_dim(b.dim(), v.dim(), "lie_bracket");
  return b.jacobian(t, x) * v(t, x) - v.jacobian(t, x) * b(t, x);
}

/// chi * f with the product-rule Jacobian chi*Df + f (x) grad chi.
inline VectorField windowed(const VectorField& f, const Window& w) {
  require_dim(f.dim(), static_cast<int>(w.center.size()), "windowed");
  auto meta = f.metadata();
  meta.name = meta.name.empty() ? std::string("windowed") : meta.name + "_windowed";
  meta.div_bound.reset();
  return VectorField::analytic(
      f.dim(), [f, w](double t, const Vec& x) -> Vec { return w(x) * f(t, x); },
      [f, w](double t, const Vec& x) -> Mat {
        double chi = w(x);
        Vec g = w.gradient(x);
        Mat J = chi * f.jacobian(t, x);
        J.noalias() += f(t, x) * g.transpose();
        return J;
      },
      !f.is_autonomous(), meta);
}

/// Samples f(t, .) on the nodes of `box` and wraps the result as a grid field.
inline VectorField sample_on_grid(const VectorField& f, const Box& box, double t = 0.0,
                                  Interp order = Interp::Linear, bool periodic = true) {
  require_dim(f.dim(), box.dim, "sample_on_grid");
  GridData g;
  g.box = box;
  g.order = order;
  g.periodic = periodic;
  g.samples.resize(box.num_nodes() * box.dim);
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    Vec v = f(t, box.node(i));
    for (int c = 0; c < box.dim; ++c) g.samples[i * box.dim + c] = v[c];
  }
  auto meta = f.metadata();
  meta.name = meta.name + "_grid";
  return VectorField::from_grid(std::move(g), meta);
}

// ---------------------------------------------------------------------------
// Builtin catalog

/// Names accepted by builtin_field.
inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"constant", "rotation2d", "dilation",
                                              "shear2d",  "rotation3d", "abc_flow"};
  return names;
}

inline VectorField constant_field(const Vec& c) {
  VectorField::Metadata meta{"constant", c.norm(), 0.0, 0.0};
  const int d = static_cast<int>(c.size());
  return VectorField::analytic(
      d, [c](double, const Vec&) { return c; },
      [d](double, const Vec&) -> Mat { return Mat::Zero(d, d); }, false, meta);
}

/// Builtin by name. dim = 0 selects the natural dimension (2 for the planar
/// fields and `constant`/`dilation`, 3 for rotation3d and abc_flow).
inline VectorField builtin_field(std::string_view name, int dim = 0) {
  if (name == "constant") {
    if (dim == 0) dim = 2;
    return dim == 2 ? constant_field(make_vec({1.0, 0.5}))
                    : constant_field(make_vec({1.0, 0.5, 0.25}));
  }
  if (name == "rotation2d") {
    if (dim != 0 && dim != 2) throw DimensionError("rotation2d is planar");
    return VectorField::analytic(
        2, [](double, const Vec& x) { return make_vec({-x[1], x[0]}); },
        [](double, const Vec&) {
          Mat J(2, 2);
          J << 0, -1, 1, 0;
          return J;
        },
        false, {"rotation2d", std::nullopt, 1.0, 0.0});
  }
  if (name == "dilation") {
    if (dim == 0) dim = 2;
    if (dim != 2 && dim != 3) throw DimensionError("dilation: dimension must be 2 or 3");
    return VectorField::analytic(
        dim, [](double, const Vec& x) { return x; },
        [dim](double, const Vec&) -> Mat { return Mat::Identity(dim, dim); }, false,
        {"dilation", std::nullopt, 1.0, static_cast<double>(dim)});
  }
  if (name == "shear2d") {
    if (dim != 0 && dim != 2) throw DimensionError("shear2d is planar");
    return VectorField::analytic(
        2, [](double, const Vec& x) { return make_vec({x[1], 0.0}); },
        [](double, const Vec&) {
          Mat J(2, 2);
          J << 0, 1, 0, 0;
          return J;
        },
        false, {"shear2d", std::nullopt, 1.0, 0.0});
  }
  if (name == "rotation3d") {
    if (dim != 0 && dim != 3) throw DimensionError("rotation3d is 3-dimensional");
    return VectorField::analytic(
        3, [](double, const Vec& x) { return make_vec({-x[1], x[0], 0.0}); },
        [](double, const Vec&) {
          Mat J(3, 3);
          J << 0, -1, 0, 1, 0, 0, 0, 0, 0;
          return J;
        },
        false, {"rotation3d", std::nullopt, 1.0, 0.0});
  }
  if (name == "abc_flow") {
    if (dim != 0 && dim != 3) throw DimensionError("abc_flow is 3-dimensional");
    // A = B = C = 1: (sin z + cos y, sin x + cos z, sin y + cos x)
    return VectorField::analytic(
        3,
        [](double, const Vec& x) {
          return make_vec({std::sin(x[2]) + std::cos(x[1]), std::sin(x[0]) + std::cos(x[2]),
                           std::sin(x[1]) + std::cos(x[0])});
        },
        [](double, const Vec& x) {
          Mat J(3, 3);
          J << 0, -std::sin(x[1]), std::cos(x[2]),  //
              std::cos(x[0]), 0, -std::sin(x[2]),   //
              -std::sin(x[0]), std::cos(x[1]), 0;
          return J;
        },
        false, {"abc_flow", 2.0 * std::sqrt(3.0), std::sqrt(6.0), 0.0});
  }
  throw ConfigError("unknown builtin field '" + std::string(name) + "'");
}

/// Self-test: relative Frobenius error between the analytic and the
/// central-difference Jacobian at the given points. Returns the maximum.
inline double jacobian_self_test(const VectorField& f, const std::vector<Vec>& points,
                                 double t = 0.0) {
  double worst = 0.0;
  for (const auto& x : points) {
    Mat a = f.jacobian(t, x);
    Mat n = f.fd_jacobian(t, x);
    double scale = std::max(1.0, a.norm());
    worst = std::max(worst, (a - n).norm() / scale);
  }
  return worst;
}

}  // namespace geotr
