#include "geotr/flow.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

using namespace geotr;
using test_support::random_points;
using test_support::unit_circle;

namespace {

VectorField zero2() { return constant_field(make_vec({0.0, 0.0})); }

// Compressible, non-linear planar field used for the property checks.
VectorField wavy() {
  return VectorField::from_expressions({parse_field_expr("0.5*sin(x)+0.2*y"), parse_field_expr("0.3*cos(y)-0.1*x")});
}

}  // namespace

TEST(Flow, ZeroFieldIsIdentity) {
  for (double t : {-1.0, 0.0, 0.7}) {
    auto s = advance(zero2(), t, make_vec({0.3, -0.4}));
    EXPECT_EQ(s.endpoint, make_vec({0.3, -0.4}));
    EXPECT_EQ(s.jacobian, Mat::Identity(2, 2));
    EXPECT_EQ(s.density, 1.0);
  }
}

TEST(Flow, DilationClosedForm) {
  auto s = advance(builtin_field("dilation", 2), 1.0, make_vec({1.0, 0.0}));
  EXPECT_NEAR(s.endpoint[0], std::exp(1.0), 1e-8);
  EXPECT_NEAR(s.endpoint[1], 0.0, 1e-14);
  EXPECT_NEAR((s.jacobian - std::exp(1.0) * Mat::Identity(2, 2)).norm(), 0.0, 1e-8);
  EXPECT_NEAR(s.density, std::exp(-2.0), 1e-8);
}

TEST(Flow, QuarterRotation) {
  auto s = advance(builtin_field("rotation2d"), M_PI / 2, make_vec({1.0, 0.0}));
  EXPECT_NEAR(s.endpoint[0], 0.0, 1e-8);
  EXPECT_NEAR(s.endpoint[1], 1.0, 1e-8);
  EXPECT_NEAR(s.det_j, 1.0, 1e-8);
  EXPECT_NEAR(s.density, 1.0, 1e-8);
}

TEST(Flow, DensityExamples) {
  for (const auto& x : random_points(2, 20, 1)) EXPECT_NEAR(density_at(builtin_field("rotation2d"), 1.0, x), 1.0, 1e-6);
  for (const auto& x : random_points(3, 20, 2)) EXPECT_NEAR(density_at(builtin_field("abc_flow"), 1.0, x), 1.0, 1e-6);
  EXPECT_NEAR(density_at(builtin_field("dilation", 3), 0.5, make_vec({0.2, 0.1, -0.3})), std::exp(-1.5), 1e-6);
  EXPECT_EQ(density_at(wavy(), 0.0, make_vec({0.2, 0.1})), 1.0);
}

TEST(Flow, SemigroupExamples) {
  auto pts = unit_circle(100);
  EXPECT_EQ(semigroup_defect(zero2(), 0.4, 0.3, pts), 0.0);
  EXPECT_LE(semigroup_defect(builtin_field("constant", 2), 0.4, 0.3, pts), 1e-14);
  EXPECT_LE(semigroup_defect(builtin_field("rotation2d"), 0.3, 0.3, pts), 1e-8);
}

TEST(Flow, RecordingMatchesSeparateIntegrations) {
  auto b = wavy();
  Vec x0 = make_vec({0.4, -0.7});
  auto rec = integrate_recording(b, 0.0, {0.0, 0.25, 0.5, 1.0}, x0, {});
  ASSERT_EQ(rec.size(), 4u);
  EXPECT_EQ(rec[0].endpoint, x0);
  for (std::size_t k = 1; k < rec.size(); ++k) {
    auto s = advance(b, rec[k].t, x0);
    EXPECT_NEAR((rec[k].endpoint - s.endpoint).norm(), 0.0, 1e-12);
    EXPECT_NEAR(rec[k].density, s.density, 1e-12);
  }
}

TEST(Flow, Errors) {
  IntegratorConfig tight;
  tight.max_steps = 10;
  EXPECT_THROW(advance(wavy(), 1.0, make_vec({0.0, 0.0}), tight), IntegrationError);
  IntegratorConfig bad;
  bad.dt = 0.0;
  EXPECT_THROW(advance(wavy(), 1.0, make_vec({0.0, 0.0}), bad), ConfigError);
  auto blowup = VectorField::from_expressions({parse_field_expr("x^2"), parse_field_expr("0")});
  IntegratorConfig coarse;
  coarse.dt = 1e-2;
  EXPECT_THROW(advance(blowup, 3.0, make_vec({1.0, 0.0}), coarse), IntegrationError);
  EXPECT_THROW(advance(wavy(), 1.0, make_vec({0.0, 0.0, 0.0})), DimensionError);
}

TEST(Flow, Rk2IsSecondOrder) {
  IntegratorConfig a{1e-2, Scheme::RK2}, b{5e-3, Scheme::RK2};
  Vec x0 = make_vec({1.0, 0.0});
  Vec exact = make_vec({std::cos(1.0), std::sin(1.0)});
  double e1 = (flow_point(builtin_field("rotation2d"), 1.0, x0, a) - exact).norm();
  double e2 = (flow_point(builtin_field("rotation2d"), 1.0, x0, b) - exact).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
}

TEST(FlowProperty, BackwardUndoesForward) {
  for (const auto& name : builtin_names()) {
    auto b = builtin_field(name);
    for (const auto& x : random_points(b.dim(), 30, 3, -1.0, 1.0)) {
      Vec y = flow_point(b, 1.0, x);
      EXPECT_LE((flow_point(b, -1.0, y) - x).norm(), 1e-7) << name;
    }
  }
}

TEST(FlowProperty, DeterminantStaysPositive) {
  for (const auto& x : random_points(2, 100, 4)) {
    EXPECT_GT(advance(wavy(), 1.0, x).det_j, 0.0);
    EXPECT_GT(advance(wavy(), -1.0, x).det_j, 0.0);
  }
}

TEST(FlowProperty, VariationalJacobianMatchesFiniteDifferences) {
  const double eps = 1e-5;
  for (const auto& b : {wavy(), builtin_field("abc_flow")}) {
    for (const auto& x : random_points(b.dim(), 20, 5, -1.0, 1.0)) {
      auto s = advance(b, 0.8, x);
      Mat fd(b.dim(), b.dim());
      for (int a = 0; a < b.dim(); ++a) {
        Vec e = Vec::Zero(b.dim());
        e[a] = eps;
        fd.col(a) = (flow_point(b, 0.8, x + e) - flow_point(b, 0.8, x - e)) / (2 * eps);
      }
      EXPECT_LE((fd - s.jacobian).norm() / s.jacobian.norm(), 1e-4);
    }
  }
}

TEST(FlowProperty, DensityBoundsForEveryBuiltin) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (const auto& name : builtin_names()) {
    auto b = builtin_field(name);
    double div = b.metadata().div_bound.value();
    for (const auto& x : random_points(b.dim(), 1000, 7, -1.0, 1.0)) {
      double t = ut(rng);
      double rho = advance(b, t, x).density;
      EXPECT_GE(rho, std::exp(-div * t) - 1e-6) << name;
      EXPECT_LE(rho, std::exp(div * t) + 1e-6) << name;
    }
  }
}

TEST(FlowProperty, ContinuityEquationResidual) {
  auto b = wavy();
  const double h = 1e-4;
  for (double t : {0.3, 0.8}) {
    for (const auto& x : random_points(2, 10, 8, -1.0, 1.0)) {
      double dt_rho = (density_at(b, t + h, x) - density_at(b, t - h, x)) / (2 * h);
      double div_flux = 0.0;
      for (int a = 0; a < 2; ++a) {
        Vec e = Vec::Zero(2);
        e[a] = h;
        div_flux += (density_at(b, t, x + e) * b(t, x + e)[a] - density_at(b, t, x - e) * b(t, x - e)[a]) / (2 * h);
      }
      EXPECT_LE(std::abs(dt_rho + div_flux), 1e-3);
    }
  }
}
