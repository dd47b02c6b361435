#include "geotr/induction.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

using namespace geotr;
using test_support::random_points;

namespace {

VectorField expr_field3(const char* a, const char* b, const char* c) {
  return VectorField::from_expressions({parse_field_expr(a), parse_field_expr(b), parse_field_expr(c)});
}

// Divergence-free and periodic on [0, 2pi)^3.
VectorField periodic_b() { return expr_field3("sin(z)", "sin(x)", "sin(y)"); }

Box torus3(int res) { return Box::cube(3, 0.0, 2.0 * M_PI, res); }

VectorField e1() { return constant_field(make_vec({1.0, 0.0, 0.0})); }

VectorField rotated_e1(double t) { return constant_field(make_vec({std::cos(t), std::sin(t), 0.0})); }

std::vector<Vec> seeds() { return {make_vec({0.0, 0.3, 0.0}), make_vec({-0.2, -0.4, 0.1}), make_vec({0.1, 0.0, -0.3})}; }

}  // namespace

TEST(Induction, ZeroVelocityKeepsFieldFixed) {
  auto res = induction_solve(constant_field(make_vec({0.0, 0.0, 0.0})), periodic_b(), torus3(8), {0.0, 0.5});
  EXPECT_EQ(res.states.back().samples, res.states.front().samples);
}

TEST(Induction, ConstantVelocityTranslatesTheField) {
  Vec c = make_vec({0.6, -0.3, 0.2});
  const double t = 0.5;
  std::vector<double> err;
  for (int n : {16, 32}) {
    Box box = torus3(n);
    auto res = induction_solve(constant_field(c), periodic_b(), box, {t});
    std::vector<double> exact(box.num_nodes() * 3);
    for (std::size_t i = 0; i < box.num_nodes(); ++i) {
      Vec v = periodic_b()(0.0, box.node(i) - t * c);
      for (int a = 0; a < 3; ++a) exact[i * 3 + a] = v[a];
    }
    err.push_back(l2_difference(box, res.states.back().samples, exact));
    // discrete div of a central-difference curl vanishes
    for (double d : res.max_div) EXPECT_LE(d, 1e-12);
  }
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.3);
}

TEST(Induction, Errors) {
  Box box2 = Box::cube(2, 0.0, 1.0, 8);
  auto v2 = builtin_field("rotation2d");
  EXPECT_THROW(induction_solve(v2, v2, box2, {0.1}), DimensionError);
  EulerianConfig big;
  big.dt = 10.0;
  EXPECT_THROW(induction_solve(constant_field(make_vec({1.0, 0.0, 0.0})), periodic_b(), torus3(8), {1.0}, big),
               ConfigError);
}

TEST(Induction, FrozenFieldOfRotation) {
  const double t = 0.7;
  Box box = Box::cube(3, -1.0, 1.0, 6);
  auto s = frozen_field_samples(builtin_field("rotation3d"), e1(), box, t, {});
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    EXPECT_NEAR(s[i * 3], std::cos(t), 1e-10);
    EXPECT_NEAR(s[i * 3 + 1], std::sin(t), 1e-10);
    EXPECT_NEAR(s[i * 3 + 2], 0.0, 1e-12);
  }
}

TEST(FieldLines, UnitSpeedTraceOfConstantField) {
  LineTraceConfig cfg;
  cfg.length = 0.5;
  auto line = trace_field_line(constant_field(make_vec({3.0, 4.0, 0.0})), make_vec({0.0, 0.0, 0.0}), cfg);
  EXPECT_FALSE(line.truncated);
  EXPECT_NEAR((line.points.back() - make_vec({0.3, 0.4, 0.0})).norm(), 0.0, 1e-12);
}

TEST(FieldLines, TraceStopsAtRegionAndZeros) {
  LineTraceConfig cfg;
  cfg.length = 2.0;
  cfg.region = Box::cube(3, -0.5, 0.5, 4);
  auto line = trace_field_line(e1(), make_vec({0.0, 0.0, 0.0}), cfg);
  EXPECT_TRUE(line.truncated);
  EXPECT_LE(line.points.back()[0], 0.5 + cfg.ds);
  LineTraceConfig free;
  auto stopped = trace_field_line(constant_field(make_vec({0.0, 0.0, 0.0})), make_vec({0.0, 0.0, 0.0}), free);
  EXPECT_TRUE(stopped.truncated);
}

TEST(FrozenLines, ZeroVelocity) {
  auto rep = frozen_line_compare(constant_field(make_vec({0.0, 0.0, 0.0})), periodic_b(), periodic_b(), 0.5, seeds());
  // chord length of the traced line trails its arclength by O(ds^2)
  EXPECT_LE(rep.max_geometric, 1e-4);
  EXPECT_LE(rep.max_parametric, 1e-12);
}

TEST(FrozenLines, RotatedStraightLines) {
  const double t = 0.8;
  auto rep = frozen_line_compare(builtin_field("rotation3d"), e1(), rotated_e1(t), t, seeds());
  EXPECT_LE(rep.max_geometric, 1e-4);
  EXPECT_LE(rep.max_parametric, 1e-4);
  EXPECT_FALSE(rep.truncated);
}

TEST(FrozenLines, CompressibleFlowNeedsDensityRescaling) {
  const double t = 0.5;
  auto V = builtin_field("dilation", 3);
  // rho_t (J Bbar)(X_{-t} y) = e^{-3t} e^{t} e1
  auto Bt = constant_field(make_vec({std::exp(-2.0 * t), 0.0, 0.0}));
  auto raw = frozen_line_compare(V, e1(), Bt, t, seeds());
  FrozenLineConfig cfg;
  cfg.rescale_by_density = true;
  auto rescaled = frozen_line_compare(V, e1(), Bt, t, seeds(), cfg);
  EXPECT_GT(raw.max_parametric, 0.1);
  EXPECT_LE(rescaled.max_parametric, 1e-4);
  // directions are frozen either way
  EXPECT_LE(raw.max_geometric, 1e-4);
  EXPECT_LE(rescaled.max_geometric, 1e-4);
}

TEST(FrozenLines, TruncationIsReported) {
  FrozenLineConfig cfg;
  cfg.line.length = 3.0;
  cfg.line.region = Box::cube(3, -1.0, 1.0, 4);
  auto rep = frozen_line_compare(builtin_field("rotation3d"), e1(), rotated_e1(0.3), 0.3, seeds(), cfg);
  EXPECT_TRUE(rep.truncated);
  EXPECT_FALSE(rep.warnings.empty());
}
