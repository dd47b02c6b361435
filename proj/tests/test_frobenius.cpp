#include "geotr/frobenius.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

using namespace geotr;
using test_support::random_points;

namespace {

Box square(int res = 16) { return Box::cube(2, -1.0, 1.0, res); }

std::vector<Vec> samples(std::size_t n = 200) { return halton_points(square(), n); }

const std::vector<double> kTimes{0.25, 0.5, 1.0};

VectorField e1() { return constant_field(make_vec({1.0, 0.0})); }

}  // namespace

TEST(Halton, PointsFillTheBoxDeterministically) {
  Box box = Box::cube(3, -2.0, 1.0, 4);
  auto a = halton_points(box, 500), b = halton_points(box, 500);
  ASSERT_EQ(a.size(), 500u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(a[i][k], -2.0);
      EXPECT_LT(a[i][k], 1.0);
    }
  }
}

TEST(Commutator, RotationAndDilationCommute) {
  auto rep = commutator_defect(builtin_field("rotation2d"), builtin_field("dilation", 2), kTimes, kTimes, samples(), square());
  EXPECT_EQ(rep.pairs.size(), 9u);
  EXPECT_LE(rep.max_defect, 1e-7);
  EXPECT_LE(rep.bracket_residual, 1e-8);
  EXPECT_TRUE(rep.commute);
  EXPECT_TRUE(rep.non_concentrating);
  for (const auto& p : rep.pairs) {
    EXPECT_GE(p.mean_defect, 0.0);
    EXPECT_LE(p.mean_defect, p.max_defect);
  }
}

TEST(Commutator, FieldCommutesWithItself) {
  auto b = builtin_field("shear2d");
  auto rep = commutator_defect(b, b, kTimes, kTimes, samples(), square());
  EXPECT_LE(rep.max_defect, 1e-12);
  EXPECT_EQ(bracket_residual_norm(b, b, square()), 0.0);
}

TEST(Commutator, RotationAgainstTranslationClosedForm) {
  auto rep = commutator_defect(builtin_field("rotation2d"), e1(), kTimes, kTimes, samples(), square());
  EXPECT_FALSE(rep.commute);
  for (const auto& p : rep.pairs) {
    double exact = 2.0 * p.s * std::abs(std::sin(p.t / 2.0));
    EXPECT_NEAR(p.max_defect, exact, 1e-6);
    EXPECT_NEAR(p.mean_defect, exact, 1e-6);
  }
  EXPECT_NEAR(bracket_residual_norm(builtin_field("rotation2d"), e1(), square()), 1.0, 1e-14);
}

TEST(Commutator, RejectsUnsteadyFields) {
  auto unsteady = VectorField::from_expressions({parse_field_expr("t"), parse_field_expr("x")});
  EXPECT_THROW(commutator_defect(unsteady, e1(), kTimes, kTimes, samples(10), square()), ConfigError);
}

TEST(Commutator, ConcentrationBoundUsesDivergence) {
  // backward dilation compresses by e^{2s}
  auto [ratio, bound] = concentration_check(builtin_field("dilation", 2), -0.2, square(), {});
  EXPECT_NEAR(bound, std::exp(0.4), 1e-12);
  EXPECT_GT(ratio, 1.0);
  EXPECT_LE(ratio, bound * 1.35);
  auto [r0, b0] = concentration_check(builtin_field("rotation2d"), 0.0, square(), {});
  EXPECT_EQ(r0, 1.0);
  EXPECT_EQ(b0, 1.0);
}

TEST(FrobeniusProperty, SoundnessAndNegativeControlOverPlanarBuiltins) {
  std::vector<VectorField> fields{builtin_field("constant", 2), builtin_field("rotation2d"), builtin_field("dilation", 2),
                                  builtin_field("shear2d")};
  int commuting = 0, non_commuting = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      auto rep = commutator_defect(fields[i], fields[j], kTimes, kTimes, samples(), square());
      if (rep.bracket_residual <= 1e-8) {
        ++commuting;
        EXPECT_LE(rep.max_defect, 50 * 1e-8) << fields[i].name() << " / " << fields[j].name();
      } else {
        ++non_commuting;
        for (const auto& p : rep.pairs)
          EXPECT_GE(p.max_defect, 0.1 * p.t * p.s) << fields[i].name() << " / " << fields[j].name();
      }
    }
  }
  // rotation/dilation and dilation/shear commute; the other four pairs do not
  EXPECT_EQ(commuting, 2);
  EXPECT_EQ(non_commuting, 4);
}

TEST(Invariance, ConcentricCircle) {
  CurveChain T(2, {circle(make_vec({0.0, 0.0}), 0.6, 4096)});
  auto rep = invariance_defect(builtin_field("rotation2d"), T, {0.0, 0.5, 1.0}, form_catalog(2, 0.5), square());
  ASSERT_EQ(rep.distances.size(), 3u);
  EXPECT_EQ(rep.distances[0], 0.0);
  EXPECT_LE(rep.distances[1], 1e-6);
  EXPECT_LE(rep.distances[2], 1e-6);
  EXPECT_LE(rep.hypothesis_residual, 1e-6);
  EXPECT_EQ(rep.catalog_id, "catalog25");
}

TEST(Invariance, RadialSegmentIsNotInvariant) {
  CurveChain T(2, {segment(make_vec({0.0, 0.0}), make_vec({0.8, 0.0}))});
  auto rep = invariance_defect(builtin_field("rotation2d"), T, {0.25, 0.5, 1.0}, form_catalog(2, 0.5), square());
  EXPECT_GE(rep.hypothesis_residual, 0.1);
  EXPECT_GE(rep.distances.back(), 0.1);
  EXPECT_LT(rep.distances[0], rep.distances[1]);
  EXPECT_LT(rep.distances[1], rep.distances[2]);
}

TEST(Invariance, RequiresDivergenceFreeField) {
  CurveChain T(2, {segment(make_vec({0.0, 0.0}), make_vec({0.8, 0.0}))});
  EXPECT_THROW(invariance_defect(builtin_field("dilation", 2), T, {0.5}, form_catalog(2, 0.5), square()),
               PreconditionError);
}

TEST(LiftedFlow, TrivialCases) {
  CurveChain eta(2, {segment(make_vec({-0.3, 0.1}), make_vec({0.5, 0.4}), 2.0)});
  auto zero = lifted_pushforward_check(constant_field(make_vec({0.0, 0.0})), eta, 0.7, form_catalog(2, 0.5));
  EXPECT_LE(zero.pairing_mismatch, 1e-14);
  EXPECT_LE(zero.mass_mismatch, 1e-14);
  auto t0 = lifted_pushforward_check(builtin_field("shear2d"), eta, 0.0, form_catalog(2, 0.5));
  EXPECT_LE(t0.pairing_mismatch, 1e-14);
  EXPECT_LE(t0.mass_mismatch, 1e-14);
}

TEST(LiftedFlow, RotationIsAnIsometry) {
  CurveChain eta(2, {segment(make_vec({-0.3, 0.1}), make_vec({0.5, 0.4}), 2.0),
                     segment(make_vec({0.2, -0.6}), make_vec({0.1, 0.7}), 0.5)});
  auto rep = lifted_pushforward_check(builtin_field("rotation2d"), eta, 1.0, form_catalog(2, 0.5));
  EXPECT_LE(rep.pairing_mismatch, 1e-6);
  EXPECT_LE(rep.mass_mismatch, 1e-6);
  EXPECT_NEAR(rep.lifted_mass, eta.mass(), 1e-9);
}

TEST(LiftedFlow, DilationStretchesByE) {
  CurveChain eta(2, {segment(make_vec({0.0, 0.0}), make_vec({1.0, 0.0}))});
  auto rep = lifted_pushforward_check(builtin_field("dilation", 2), eta, 1.0, form_catalog(2, 0.5));
  EXPECT_NEAR(rep.lifted_mass, std::exp(1.0), 1e-5);
  EXPECT_NEAR(rep.jacobian_mass, std::exp(1.0), 1e-5);
  EXPECT_LE(rep.pairing_mismatch, 1e-6);
}

TEST(LiftedFlowProperty, LipschitzInSupNorm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8), jitter(-0.1, 0.1);
  for (const char* name : {"rotation2d", "dilation", "shear2d"}) {
    auto b = builtin_field(name);
    const double lip = b.metadata().lipschitz.value();
    for (int trial = 0; trial < 10; ++trial) {
      // two curves parametrised on the same 33 nodes
      std::vector<Vec> g, h;
      Vec p = make_vec({u(rng), u(rng)}), q = make_vec({u(rng), u(rng)});
      for (int k = 0; k <= 32; ++k) {
        Vec x = p + (k / 32.0) * (q - p) + make_vec({0.1 * std::sin(k * 0.3), 0.0});
        g.push_back(x);
        h.push_back(x + make_vec({jitter(rng), jitter(rng)}));
      }
      const double t = 0.6;
      double before = 0.0, after = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        before = std::max(before, (g[k] - h[k]).norm());
        after = std::max(after, (flow_point(b, t, g[k]) - flow_point(b, t, h[k])).norm());
      }
      EXPECT_LE(after, std::exp(lip * t) * before + 1e-12) << name;
    }
  }
}
