#include "geotr/transport.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

using namespace geotr;
using test_support::random_points;

namespace {

VectorField expr_field(const char* a, const char* b) {
  return VectorField::from_expressions({parse_field_expr(a), parse_field_expr(b)});
}

Window unit_window() { return Window{make_vec({0.0, 0.0}), 1.5}; }
Box box2(int res) { return Box::cube(2, -2.0, 2.0, res); }

Box torus(int res) { return Box::cube(2, 0.0, 2.0 * M_PI, res); }

struct ZeroPsi {
  double operator()(double) const { return 0.0; }
  double derivative(double) const { return 0.0; }
};

CurveChain tilted_segment() { return CurveChain(2, {segment(make_vec({-0.5, -0.2}), make_vec({0.6, 0.3}))}); }

}  // namespace

TEST(Vae, LagrangianExamples) {
  auto pts = random_points(2, 20, 1, -1.0, 1.0);
  Vec c = make_vec({0.3, -0.8});
  auto v = vae_lagrangian(builtin_field("dilation", 2), constant_field(c), 0.7, pts);
  for (const auto& w : v) EXPECT_NEAR((w - std::exp(0.7) * c).norm(), 0.0, 1e-9);

  auto vbar = expr_field("sin(y)", "x*y");
  auto v0 = vae_lagrangian(builtin_field("shear2d"), vbar, 0.0, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(v0[i], vbar(0.0, pts[i]));

  auto vr = vae_lagrangian(builtin_field("rotation2d"), constant_field(make_vec({1.0, 0.0})), 1.1, pts);
  for (const auto& w : vr) EXPECT_NEAR((w - make_vec({std::cos(1.1), std::sin(1.1)})).norm(), 0.0, 1e-9);
}

TEST(Vae, EulerianZeroVelocityIsExact) {
  auto vbar = expr_field("sin(y)", "cos(x)*sin(x)");
  auto states = vae_eulerian(constant_field(make_vec({0.0, 0.0})), vbar, torus(16), {0.0, 0.5, 1.0});
  ASSERT_EQ(states.size(), 3u);
  for (const auto& s : states) EXPECT_EQ(s.samples, states[0].samples);
}

TEST(Vae, EulerianConstantAdvectionIsSecondOrder) {
  Vec c = make_vec({0.7, -0.4});
  auto vbar = expr_field("sin(y)", "cos(x)");
  const double t = 0.5;
  std::vector<double> err;
  for (int res : {32, 64}) {
    Box box = torus(res);
    auto s = vae_eulerian(constant_field(c), vbar, box, {t}).back();
    std::vector<double> exact(s.samples.size());
    for (std::size_t i = 0; i < box.num_nodes(); ++i) {
      Vec v = vbar(0.0, box.node(i) - t * c);
      exact[i * 2] = v[0];
      exact[i * 2 + 1] = v[1];
    }
    err.push_back(l2_difference(box, s.samples, exact));
  }
  EXPECT_LE(err[1], 5e-3);
  EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.3);
}

TEST(Vae, EulerianConvergesToLagrangian) {
  auto b = builtin_field("rotation2d");
  auto vbar = windowed(expr_field("sin(y)", "0"), unit_window());
  std::vector<double> err;
  for (int res : {64, 128}) {
    Box box = box2(res);
    auto s = vae_eulerian(b, vbar, box, {0.5}).back();
    err.push_back(l2_difference(box, s.samples, lagrangian_samples(b, vbar, box, 0.5, {}, false)));
  }
  double order = std::log2(err[0] / err[1]);
  EXPECT_GE(order, 1.7);
  EXPECT_LE(order, 2.3);
}

TEST(Vae, EulerianErrors) {
  auto vbar = expr_field("sin(y)", "cos(x)");
  EulerianConfig big;
  big.dt = 1.0;
  EXPECT_THROW(vae_eulerian(builtin_field("constant", 2), vbar, torus(16), {1.0}, big), ConfigError);
  auto nan_field = VectorField::analytic(2, [](double, const Vec&) { return make_vec({std::nan(""), 0.0}); });
  try {
    vae_eulerian(builtin_field("constant", 2), nan_field, torus(8), {1.0});
    FAIL() << "expected an instability";
  } catch (const InstabilityError& e) {
    EXPECT_EQ(e.step, 1);
  }
  auto unsteady = VectorField::from_expressions({parse_field_expr("t"), parse_field_expr("0")});
  EXPECT_THROW(vae_eulerian(unsteady, vbar, torus(8), {1.0}), ConfigError);
}

TEST(Gte, InitialTimeReturnsInitialCurrent) {
  Current T = tilted_segment();
  auto path = gte_solve(builtin_field("shear2d"), T, {0.0, 0.5});
  const auto& c0 = std::get<CurveChain>(path.currents[0]);
  EXPECT_EQ(c0.curves()[0].vertices, tilted_segment().curves()[0].vertices);
}

TEST(Gte, ConcentricCircleIsInvariantUnderRotation) {
  Current T = CurveChain(2, {circle(make_vec({0.0, 0.0}), 0.7, 4096)});
  auto path = gte_solve(builtin_field("rotation2d"), T, uniform_times(0.0, 1.0, 0.25));
  auto forms = form_catalog(2, 0.5);
  for (const auto& Tt : path.currents) EXPECT_LE(weak_star_distance(Tt, T, forms), 1e-6);
}

TEST(Gte, AcPathMatchesTransportedVectorTimesDensity) {
  auto b = expr_field("0.5*sin(y)+0.3*x", "0.4*cos(x)-0.2*y");
  auto vbar = expr_field("1", "x");
  Box box = box2(96);
  auto T = ACCurrent::from_field(vbar, box, unit_window());
  const double t = 0.4;
  auto pushed = std::get<ACCurrent>(gte_solve(b, Current(T), {0.0, t}).currents.back());
  // <(X_t)_* T, omega> = int (J w)(x) . omega(X_t x) dx by forward change of variables
  std::vector<std::pair<Vec, Vec>> images;  // (X_t x, J w(x))
  for (std::size_t i = 0; i < box.num_nodes(); ++i) {
    Vec wi = T.sample(i);
    if (wi.squaredNorm() == 0.0) continue;
    auto s = advance(b, t, box.node(i));
    images.emplace_back(s.endpoint, s.jacobian * wi);
  }
  for (const auto& w : form_catalog(2, 0.5)) {
    double forward = 0.0;
    for (const auto& [y, jw] : images) forward += jw.dot(w(y));
    forward *= box.cell_volume();
    EXPECT_NEAR(pair(pushed, w), forward, 1e-5) << w.label;
  }
}

TEST(Gte, WeakResidualExamples) {
  auto rot = builtin_field("rotation2d");
  Current circ = CurveChain(2, {circle(make_vec({0.0, 0.0}), 0.7, 4096)});
  auto constant = constant_path(circ, uniform_times(0.0, 1.0, 0.02));
  for (const auto& w : form_catalog(2, 0.5)) {
    EXPECT_NEAR(weak_residual(constant, rot, w), 0.0, 1e-6);
    EXPECT_EQ(weak_residual(constant, rot, w, ZeroPsi{}), 0.0);
  }
}

TEST(Gte, WeakResidualShrinksUnderTimeRefinement) {
  // linear velocity: pushed polygons are exact, so only the time quadrature remains
  auto b = builtin_field("shear2d");
  Current T = tilted_segment();
  auto coarse = gte_solve(b, T, uniform_times(0.0, 1.0, 1e-2));
  auto fine = gte_solve(b, T, uniform_times(0.0, 1.0, 5e-3));
  auto forms = form_catalog(2, 0.5);
  for (std::size_t k = 0; k < forms.size(); k += 3) {
    double rc = std::abs(weak_residual(coarse, b, forms[k]));
    double rf = std::abs(weak_residual(fine, b, forms[k]));
    EXPECT_LE(rc, 1e-4);
    EXPECT_LE(rf, 0.5 * rc + 1e-14);
  }
}

TEST(Gte, WeakResidualFloorFollowsChainRefinement) {
  // nonlinear velocity: the residual is dominated by the polyline representation
  auto b = expr_field("0.5*sin(y)+0.3*x", "0.4*cos(x)-0.2*y");
  Current T = tilted_segment();
  auto ts = uniform_times(0.0, 1.0, 1e-2);
  PushOptions tight;
  tight.refine_tol = 1e-5;
  auto loose_path = gte_solve(b, T, ts);
  auto tight_path = gte_solve(b, T, ts, {}, tight);
  auto forms = form_catalog(2, 0.5);
  double loose = 0.0, fine = 0.0;
  for (std::size_t k = 0; k < forms.size(); k += 3) {
    loose = std::max(loose, std::abs(weak_residual(loose_path, b, forms[k])));
    fine = std::max(fine, std::abs(weak_residual(tight_path, b, forms[k])));
  }
  EXPECT_LE(loose, 1e-4);
  EXPECT_LE(fine, 1e-6);
}

TEST(Gte, MassGrowthBound) {
  for (const char* name : {"shear2d", "dilation"}) {
    auto b = builtin_field(name);
    double lip = b.metadata().lipschitz.value();
    Current T = CurveChain(2, {segment(make_vec({-0.5, -0.2}), make_vec({0.6, 0.3})), circle(make_vec({0.2, 0.1}), 0.4, 64)});
    auto path = gte_solve(b, T, uniform_times(0.0, 1.0, 0.25));
    for (std::size_t k = 0; k < path.size(); ++k)
      EXPECT_LE(mass(path.currents[k]), std::exp(lip * path.times[k]) * mass(T) * (1.0 + 1e-4)) << name;
  }
}

TEST(Gte, BoundaryIsTransportedByDivergenceFreeFlow) {
  auto b = builtin_field("rotation2d");
  Box box = box2(96);
  auto T = ACCurrent::from_field(expr_field("x+1", "x*y"), box, unit_window());
  const double t = 0.6;
  auto pushed = pushforward(T, FlowMap{b, t});
  ZeroCurrent dT = boundary(T);
  TestForm0 f{Polynomial{{{1.0, {1, 1, 0}}, {0.5, {0, 2, 0}}, {0.2, {1, 0, 0}}}}, Bump{make_vec({0.2, 0.0}), 0.5, 2.0}};
  double transported = dT.pair([&](const Vec& p) { return f(flow_point(b, t, p)); });
  EXPECT_NEAR(pair_exact(pushed, f), transported, 1e-5);
}

TEST(Gte, SnapsNonUniformTimes) {
  auto path = gte_solve(builtin_field("shear2d"), Current(tilted_segment()), {0.0, 0.3, 1.0});
  EXPECT_TRUE(path.snap.snapped);
  EXPECT_NEAR(path.snap.max_shift, 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(path.times[1], 0.5);
  EXPECT_THROW(gte_solve(builtin_field("shear2d"), Current(tilted_segment()), {0.0, 0.0}), ConfigError);
}

TEST(Duhamel, ZeroSourceReducesToGte) {
  auto b = builtin_field("shear2d");
  Current T = tilted_segment();
  auto ts = uniform_times(0.0, 0.5, 0.1);
  auto d = duhamel_solve(b, T, constant_path(CurveChain(2), ts));
  auto g = gte_solve(b, T, ts);
  for (const auto& w : form_catalog(2, 0.5))
    for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_EQ(pair(d.currents[k], w), pair(g.currents[k], w));
}

TEST(Duhamel, ZeroVelocityIntegratesTheSource) {
  Current T = tilted_segment();
  Current R = CurveChain(2, {segment(make_vec({0.0, -0.5}), make_vec({0.2, 0.5}), 0.8)});
  auto ts = uniform_times(0.0, 0.5, 0.05);
  auto d = duhamel_solve(constant_field(make_vec({0.0, 0.0})), T, constant_path(R, ts));
  for (const auto& w : form_catalog(2, 0.5))
    for (std::size_t k = 0; k < ts.size(); ++k)
      EXPECT_NEAR(pair(d.currents[k], w), pair(T, w) + ts[k] * pair(R, w), 1e-8);
}

TEST(Duhamel, RotationMatchesFinerQuadrature) {
  auto b = builtin_field("rotation2d");
  Current T = tilted_segment();
  Current R = CurveChain(2, {segment(make_vec({0.3, -0.4}), make_vec({0.5, 0.6}))});
  const double t = 0.5;
  auto d = duhamel_solve(b, T, constant_path(R, uniform_times(0.0, t, 5e-3)));
  // constant source: int_0^t (X_{t-s})_* R ds = int_0^t (X_u)_* R du, on a 10x finer grid
  auto fine_ts = uniform_times(0.0, t, 5e-4);
  auto pushedR = gte_solve(b, R, fine_ts);
  auto wts = trapezoid_weights(fine_ts);
  Current Tt = pushforward(T, FlowMap{b, t});
  for (const auto& w : form_catalog(2, 0.5)) {
    double ref = pair(Tt, w);
    for (std::size_t k = 0; k < fine_ts.size(); ++k) ref += wts[k] * pair(pushedR.currents[k], w);
    EXPECT_NEAR(pair(d.currents.back(), w), ref, 1e-5) << w.label;
  }
}
