/// @file core.hpp
/// @brief Small-vector types, error hierarchy and the periodic box shared by
/// every geotr module.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geotr {

/// Vectors and matrices of dimension 2 or 3. The fixed maximum keeps them on
/// the stack; the runtime size carries the dimension.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec zero_vec(int dim) { return Vec::Zero(dim); }
inline Mat identity(int dim) { return Mat::Identity(dim, dim); }

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// Errors. Each maps onto one failure class of the CLI exit-code contract.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Query outside the domain of a non-periodic grid field.
struct DomainError : Error {
  using Error::Error;
};

/// Mismatched or unsupported dimension.
struct DimensionError : Error {
  using Error::Error;
};

/// Step budget exceeded or non-finite state while integrating a flow.
struct IntegrationError : Error {
  using Error::Error;
};

/// Bad solver or scenario configuration (CFL violation, missing keys, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// NaN/Inf detected inside an Eulerian time stepper.
struct InstabilityError : Error {
  InstabilityError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step(step) {}
  long step;
};

/// Expression syntax error; position is a 0-based character offset.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position(position) {}
  std::size_t position;
};

/// Violated mathematical precondition (e.g. non-solenoidal field where a
/// divergence-free one is required).
struct PreconditionError : Error {
  using Error::Error;
};

inline void require_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

/// Axis-aligned box [lo, lo + extent) with a uniform node lattice of
/// `n[axis]` points per axis. Nodes sit at lo + i*h, h = extent/n, which is
/// the natural lattice for periodic data.
struct Box {
  int dim = 2;
  Vec lo;
  Vec extent;
  std::array<int, 3> n{1, 1, 1};

  static Box cube(int dim, double lo, double hi, int res) {
    Box b;
    b.dim = dim;
    b.lo = Vec::Constant(dim, lo);
    b.extent = Vec::Constant(dim, hi - lo);
    b.n = {1, 1, 1};
    for (int a = 0; a < dim; ++a) b.n[a] = res;
    return b;
  }

  double h(int axis) const { return extent[axis] / n[axis]; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h(a);
    return v;
  }

  std::size_t num_nodes() const {
    std::size_t m = 1;
    for (int a = 0; a < dim; ++a) m *= static_cast<std::size_t>(n[a]);
    return m;
  }

  /// Linear index with axis 0 fastest: idx = i + n0*(j + n1*k).
  std::size_t index(const std::array<int, 3>& ijk) const {
    std::size_t idx = 0;
    for (int a = dim - 1; a >= 0; --a) idx = idx * n[a] + ijk[a];
    return idx;
  }

  std::array<int, 3> multi_index(std::size_t idx) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      ijk[a] = static_cast<int>(idx % n[a]);
      idx /= n[a];
    }
    return ijk;
  }

  Vec node(std::size_t idx) const {
    auto ijk = multi_index(idx);
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = lo[a] + ijk[a] * h(a);
    return x;
  }

  double min_h() const {
    double m = h(0);
    for (int a = 1; a < dim; ++a) m = std::min(m, h(a));
    return m;
  }

  Box with_resolution(int res) const {
    Box b = *this;
    for (int a = 0; a < dim; ++a) b.n[a] = res;
    return b;
  }
};

/// Gauss–Legendre nodes/weights on [0,1], 5 points (exact to degree 9).
struct GaussLegendre5 {
  static constexpr std::array<double, 5> nodes{
      0.04691007703066802, 0.23076534494715845, 0.5, 0.7692346550528415,
      0.9530899229693319};
  static constexpr std::array<double, 5> weights{
      0.11846344252809471, 0.2393143352496831, 0.2844444444444445,
      0.2393143352496831, 0.11846344252809471};
};

}  // namespace geotr
