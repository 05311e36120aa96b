#include <cmath>

#include <gtest/gtest.h>

#include "finmet/operators.hpp"
#include "finmet/parse.hpp"
#include "support/fixtures.hpp"
#include "support/random_expr.hpp"

using namespace finmet;
using namespace finmet::testing;

namespace {

std::vector<Point> samples_for(const Spray& s, int count = 20) {
  SamplingConfig cfg;
  cfg.count = count;
  return draw_samples(s.dim(), cfg, s.coefficients(), s.params()).points;
}

EnergyCandidate energy(const char* src) { return EnergyCandidate::parse(src, 2); }

double component(const Residual& r, std::size_t sample, std::size_t c) { return r.per_sample[sample].components[c]; }

}  // namespace

TEST(Pc, HomogeneousEnergiesVanish) {
  const std::vector<Point> pts = samples_for(flat_spray());
  EXPECT_LE(residual_Pc(energy("0.5*(y1^2 + y2^2)"), pts).max_relative(), 1e-15);
  EXPECT_LE(residual_Pc(energy("y1^3/y2"), pts).max_relative(), 1e-13);
}

TEST(Pc, InhomogeneousEnergy) {
  const std::vector<Point> p{Point({0.0, 0.0}, {1.0, 1.0})};
  const auto r = residual_Pc(energy("y1^2 + y1"), p);
  EXPECT_NEAR(std::fabs(component(r, 0, 0)), 1.0, 1e-15);
}

TEST(Pc, SingularSampleIsFlagged) {
  const std::vector<Point> p{Point({0.0, 0.0}, {1.0, 0.0}), Point({0.0, 0.0}, {1.0, 1.0})};
  const auto r = residual_Pc(energy("y1^3/y2"), p);
  EXPECT_EQ(r.singular_count(), 1);
  EXPECT_FALSE(r.per_sample[0].ok());
  EXPECT_TRUE(r.per_sample[1].ok());
  EXPECT_FALSE(r.within(1e-6));
}

TEST(Pe, FlatEuclidean) {
  const SprayContext ctx(flat_spray());
  EXPECT_EQ(residual_Pe(energy("0.5*(y1^2 + y2^2)"), ctx, samples_for(ctx.spray)).max_abs(), 0.0);
}

TEST(Pe, ConformalMetricSolves) {
  const SprayContext ctx(conformal_exp_spray());
  const auto E = energy(conformal_exp_energy());
  const auto r = residual_Pe(E, ctx, samples_for(ctx.spray));
  EXPECT_EQ(r.per_sample.size(), 20u);
  EXPECT_LE(r.max_relative(), 1e-10);
}

TEST(Pe, FlatWithBaseDependence) {
  // w_1 = y1 * d2E/dx1dy1 - dE/dx1 = 2 y1^2 - y1^2
  const SprayContext ctx(flat_spray());
  const std::vector<Point> p{Point({0.3, -0.2}, {1.0, 0.0})};
  const auto r = residual_Pe(energy("x1*y1^2"), ctx, p);
  EXPECT_NEAR(component(r, 0, 0), 1.0, 1e-14);
  EXPECT_NEAR(component(r, 0, 1), 0.0, 1e-14);
}

TEST(Dh, Examples) {
  const SprayContext flat(flat_spray());
  const auto pts = samples_for(flat.spray);
  EXPECT_EQ(residual_dh(energy("y1^4/y2^2 + sin(y1/y2)*y2^2"), flat, pts).max_abs(), 0.0);
  const auto r = residual_dh(energy("x1*y1^2"), flat, pts);
  for (std::size_t s = 0; s < pts.size(); ++s) EXPECT_NEAR(component(r, s, 0), pts[s].y[0] * pts[s].y[0], 1e-14);

  const SprayContext conf(conformal_exp_spray());
  EXPECT_LE(residual_dh(energy(conformal_exp_energy()), conf, samples_for(conf.spray)).max_relative(), 1e-10);
}

TEST(DR, FlatVanishes) {
  const SprayContext ctx(flat_spray());
  const auto pts = samples_for(ctx.spray);
  const auto E = energy("0.5*(y1^2 + y2^2) + x1*y2^2");
  EXPECT_EQ(residual_dR_curvature(E, ctx, pts).max_abs(), 0.0);
  EXPECT_EQ(residual_dR_berwald(E, ctx, pts).max_abs(), 0.0);
}

TEST(DR, CurvatureVariantVanishesForHorizontalEnergy) {
  const SprayContext ctx(conformal_exp_spray());
  const auto r = residual_dR_curvature(energy(conformal_exp_energy()), ctx, samples_for(ctx.spray));
  EXPECT_EQ(r.labels.size(), 1u);
  EXPECT_LE(r.max_relative(), 1e-10);
}

TEST(DR, BerwaldVariantMonomialHandContraction) {
  // f^l = c_l y2^3 / y1  =>  B^l_222 = -3 c_l / y1, contracted with dE/dy^l = y^l.
  const double a = 1.0, b = 1.0;
  const SprayContext ctx(monomial_spray(3, 3, a, b));
  const std::vector<Point> p{Point({0.0, 0.0}, {1.0, 1.0})};
  const auto r = residual_dR_berwald(energy("0.5*(y1^2 + y2^2)"), ctx, p);
  const double y1 = 1.0, y2 = 1.0;
  EXPECT_NEAR(component(r, 0, 7), -3 * a / y1 * y1 - 3 * b / y1 * y2, 1e-12);
  EXPECT_GT(r.max_abs(), 1.0);
}

TEST(Pg, Examples) {
  const SprayContext flat(flat_spray());
  const auto pts = samples_for(flat.spray);
  EXPECT_EQ(residual_Pg(energy("0.5*(y1^2 + y2^2)"), flat, pts).max_abs(), 0.0);
  const auto r = residual_Pg(energy("0.5*sqrt(y1^4 + y2^4) + x1*y1^2"), flat, pts);
  // dg_11/dx1 = 2 from the x1*y1^2 term
  for (std::size_t s = 0; s < pts.size(); ++s) EXPECT_NEAR(component(r, s, 0), 2.0, 1e-12);

  const SprayContext conf(conformal_exp_spray());
  EXPECT_LE(residual_Pg(energy(conformal_exp_energy()), conf, samples_for(conf.spray)).max_relative(), 1e-9);
}

TEST(Pg, SymmetricInLastTwoIndices) {
  ExprGenerator gen(2, 11);
  for (const auto& s : {monomial_spray(3, 3), radical_profile_spray(1, 1, 1), conformal_exp_spray()}) {
    const SprayContext ctx(s);
    const auto pts = samples_for(s, 10);
    for (int trial = 0; trial < 5; ++trial) {
      const EnergyCandidate E(gen.polynomial(4, 3), 2);
      const auto r = residual_Pg(E, ctx, pts);
      for (const auto& ps : r.per_sample) {
        ASSERT_TRUE(ps.ok());
        for (int i = 0; i < 2; ++i) {
          const double a = ps.components[static_cast<std::size_t>(i * 4 + 1)];
          const double b = ps.components[static_cast<std::size_t>(i * 4 + 2)];
          EXPECT_LE(std::fabs(a - b), 1e-10 * (1 + ps.max_abs));
        }
      }
    }
  }
}

TEST(Identity, FlatGapIsZero) {
  const SprayContext ctx(flat_spray());
  const auto E = energy("x1*y1^2 + x2^2*y1*y2 + exp(x1)*y2^2");
  EXPECT_EQ(check_reduction_identity(E, ctx, samples_for(ctx.spray)).max_abs(), 0.0);
}

TEST(Identity, HoldsForRandomEnergies) {
  ExprGenerator gen(2, 3);
  for (const auto& s : {monomial_spray(3, 3), monomial_spray(3, 5, 2.0, -1.0), radical_profile_spray(1, 1, 1),
                        lifted_direction_spray()}) {
    const SprayContext ctx(s);
    const auto pts = samples_for(s);
    for (int trial = 0; trial < 5; ++trial) {
      const EnergyCandidate E(gen.polynomial(5, 3) + parse("x1*y1^2*y2", 2), 2);
      const auto gap = check_reduction_identity(E, ctx, pts);
      EXPECT_EQ(gap.singular_count(), 0);
      EXPECT_LE(gap.max_relative(), 1e-8) << E.energy().to_string();
      // the identity is not vacuous: P_g itself is generically nonzero
      EXPECT_GT(residual_Pg(E, ctx, pts).max_abs(), 1e-6);
    }
  }
  const SprayContext conf(conformal_exp_spray());
  EXPECT_LE(check_reduction_identity(energy(conformal_exp_energy()), conf, samples_for(conf.spray)).max_relative(),
            1e-8);
}

TEST(Reduction, EulerLagrangeSplitsIntoHorizontalPart) {
  // w_i = d/dy^i (S E) - 2 h_i(E) for every E, so d_h E = 0 forces w = 0.
  ExprGenerator gen(2, 5);
  for (const auto& s : {monomial_spray(3, 4), radical_profile_spray(2, 0.5, 3), conformal_exp_spray()}) {
    const SprayContext ctx(s);
    const auto pts = samples_for(s, 10);
    const auto S = canonical_fields(s).spray;
    for (int trial = 0; trial < 4; ++trial) {
      const EnergyCandidate E(gen.polynomial(4, 3), 2);
      const auto pe = residual_Pe(E, ctx, pts);
      const auto dh = residual_dh(E, ctx, pts);
      const Expression SE = S.apply(E.energy());
      for (std::size_t k = 0; k < pts.size(); ++k) {
        for (int i = 0; i < 2; ++i) {
          const double expect = evaluate(differentiate(SE, Coordinate::y(i + 1)), pts[k]) -
                                2 * component(dh, k, static_cast<std::size_t>(i));
          EXPECT_NEAR(component(pe, k, static_cast<std::size_t>(i)), expect,
                      1e-9 * (1 + std::fabs(expect)));
        }
      }
    }
  }
}

TEST(Reduction, PerturbationMovesBothResidualsTogether) {
  const SprayContext ctx(conformal_exp_spray());
  const auto pts = samples_for(ctx.spray);
  const Expression base = parse(conformal_exp_energy(), 2);
  const Expression bump = parse("y1^3/y2", 2);
  std::vector<double> ratios;
  for (double delta : {1e-1, 1e-3, 1e-5}) {
    const EnergyCandidate E(base + Expression::constant(delta) * bump, 2);
    EXPECT_LE(residual_Pc(E, pts).max_relative(), 1e-12);
    const double pe = residual_Pe(E, ctx, pts).max_abs();
    const double dh = residual_dh(E, ctx, pts).max_abs();
    EXPECT_GT(pe, 0.0);
    EXPECT_GT(dh, 0.0);
    ratios.push_back(pe / dh);
  }
  for (double r : ratios) EXPECT_NEAR(r / ratios.front(), 1.0, 1e-4);
}

TEST(Reduction, LandsbergFromHorizontalAndBerwald) {
  // Quadratic spray: B = 0, so d_h E = 0 alone must give P_g = 0.
  const SprayContext ctx(conformal_exp_spray());
  const auto pts = samples_for(ctx.spray);
  const auto E = energy(conformal_exp_energy());
  EXPECT_LE(residual_dh(E, ctx, pts).max_relative(), 1e-10);
  EXPECT_EQ(residual_dR_berwald(E, ctx, pts).max_abs(), 0.0);
  EXPECT_LE(residual_Pg(E, ctx, pts).max_relative(), 1e-9);
}

TEST(FundamentalTensor, Examples) {
  const Point origin({0.0, 0.0}, {1.0, 2.0});
  const auto id = fundamental_tensor(energy("0.5*(y1^2 + y2^2)"), origin);
  EXPECT_TRUE(id.g.isIdentity(1e-15));
  EXPECT_TRUE(id.positive_definite);
  const auto lor = fundamental_tensor(energy("0.5*(y1^2 - y2^2)"), origin);
  EXPECT_NEAR(lor.g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(lor.g(1, 1), -1.0, 1e-15);
  EXPECT_FALSE(lor.positive_definite);
  EXPECT_NEAR(lor.min_eigenvalue, -1.0, 1e-15);
  const auto conf = fundamental_tensor(energy(conformal_exp_energy()), origin);
  EXPECT_TRUE(conf.g.isIdentity(1e-15));
  EXPECT_TRUE(conf.positive_definite);
}
