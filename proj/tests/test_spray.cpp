#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "finmet/parse.hpp"
#include "finmet/sampling.hpp"
#include "finmet/spray.hpp"
#include "support/fixtures.hpp"

using namespace finmet;
using namespace finmet::testing;

namespace {

std::vector<Point> samples_for(const Spray& s, int count = 20) {
  SamplingConfig cfg;
  cfg.count = count;
  return draw_samples(s.dim(), cfg, s.coefficients(), s.params()).points;
}

std::vector<Spray> fixture_sprays() {
  return {flat_spray(),          radical_profile_spray(1, 1, 1), radical_profile_spray(2, 0.5, 3),
          monomial_spray(3, 3),  monomial_spray(3, 4),           monomial_spray(3, 5, 2.0, -1.0),
          lifted_direction_spray(), conformal_exp_spray()};
}

// Finite-difference derivative of a field component along slot b.
double fd(const Expression& e, const Point& p, int slot, const ParamMap& params) {
  const double h = 1e-5;
  Point a = p, c = p;
  const int n = p.dim();
  auto& va = slot < n ? a.x : a.y;
  auto& vc = slot < n ? c.x : c.y;
  va[static_cast<std::size_t>(slot % n)] += h;
  vc[static_cast<std::size_t>(slot % n)] -= h;
  return (evaluate(e, a, params) - evaluate(e, c, params)) / (2 * h);
}

}  // namespace

TEST(Connection, FlatSprayIsTrivial) {
  const auto c = connection(flat_spray());
  for (const auto& g : c.gamma) EXPECT_TRUE(g.is_zero());
  for (const auto& g : c.gamma_deriv) EXPECT_TRUE(g.is_zero());
}

TEST(Connection, MonomialSprayHandDerivative) {
  // f1 = a y1^(2-t) y2^t  =>  Gamma^1_1 = -1/2 a (2-t) y1^(1-t) y2^t
  const int t = 3;
  const double a = 1.7;
  const auto c = connection(monomial_spray(t, 3, a, 1.0));
  for (const auto& p : samples_for(monomial_spray(t, 3, a, 1.0), 5)) {
    const double y1 = p.y[0], y2 = p.y[1];
    const double expect = -0.5 * a * (2 - t) * std::pow(y1, 1 - t) * std::pow(y2, t);
    EXPECT_NEAR(evaluate(c.at(0, 0), p), expect, 1e-13 * (1 + std::fabs(expect)));
  }
}

TEST(Connection, QuadraticSprayGivesLinearConnection) {
  // f^i = -gamma^i_jk(x) y^j y^k with gamma^1_11 = x1, gamma^1_12 = 2, gamma^2_22 = sin(x2)
  const Spray s = Spray::parse(2, {"-(x1*y1^2 + 4*y1*y2)", "-sin(x2)*y2^2"});
  const auto c = connection(s);
  EXPECT_EQ(c.at(0, 0), parse("x1*y1 + 2*y2", 2));
  EXPECT_EQ(c.at(0, 1), parse("2*y1", 2));
  EXPECT_EQ(c.at(1, 1), parse("sin(x2)*y2", 2));
  EXPECT_TRUE(c.at(1, 0).is_zero());
}

TEST(HorizontalFrame, FlatAndMonomial) {
  const auto flat = horizontal_frame(flat_spray());
  EXPECT_EQ(flat[0].components()[0], Expression::constant(1.0));
  for (std::size_t a = 1; a < 4; ++a) EXPECT_TRUE(flat[0][a].is_zero());

  // f^a = y2^3/y1: df^a/dy1 = -1 at y = (1,1), so Gamma^a_1 = 1/2 and the
  // fiber part of h_1 = d/dx1 - Gamma^a_1 d/dy^a is (-1/2, -1/2).
  const auto h = horizontal_frame(monomial_spray(3, 3));
  const Eigen::VectorXd v = h[0].evaluate(Point({0.0, 0.0}, {1.0, 1.0}));
  EXPECT_DOUBLE_EQ(v(0), 1.0);
  EXPECT_DOUBLE_EQ(v(1), 0.0);
  EXPECT_DOUBLE_EQ(v(2), -0.5);
  EXPECT_DOUBLE_EQ(v(3), -0.5);
}

TEST(HorizontalFrame, BaseComponentsAreKroneckerRows) {
  for (const auto& s : fixture_sprays()) {
    const auto h = horizontal_frame(s);
    for (int i = 0; i < s.dim(); ++i) {
      for (int k = 0; k < s.dim(); ++k) {
        EXPECT_EQ(h[i].x(k), Expression::constant(i == k ? 1.0 : 0.0));
      }
    }
  }
}

TEST(Berwald, QuadraticSpraysAreFlat) {
  const Spray s = Spray::parse(2, {"-(x1*y1^2 + 4*y1*y2)", "-sin(x2)*y2^2"});
  EXPECT_TRUE(berwald_curvature(s, samples_for(s)).berwald_flat);
  EXPECT_TRUE(berwald_curvature(conformal_exp_spray(), {}).berwald_flat);
  const auto flat = berwald_curvature(flat_spray(), {});
  EXPECT_TRUE(flat.berwald_flat);
  for (const auto& b : flat.components) EXPECT_TRUE(b.is_zero());
}

TEST(Berwald, MonomialHandValue) {
  const double a = 2.5;
  const Spray s = monomial_spray(3, 3, a, 1.0);
  const auto B = berwald_curvature(s, samples_for(s, 3));
  EXPECT_FALSE(B.berwald_flat);
  for (const auto& p : samples_for(s, 5)) {
    EXPECT_NEAR(evaluate(B.at(0, 1, 1, 1), p), -3.0 * a / p.y[0], 1e-12);
  }
  EXPECT_EQ(B.image_fields().size(), 4u);
}

TEST(Berwald, TotalSymmetryAndContraction) {
  for (const auto& s : fixture_sprays()) {
    const auto pts = samples_for(s, 6);
    const auto B = berwald_curvature(s, pts);
    const int n = s.dim();
    for (const auto& p : pts) {
      for (int l = 0; l < n; ++l) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            double contraction = 0.0;
            for (int k = 0; k < n; ++k) {
              const double bijk = evaluate(B.at(l, i, j, k), p);
              for (const auto& perm : {B.at(l, j, i, k), B.at(l, k, j, i), B.at(l, i, k, j)}) {
                EXPECT_NEAR(evaluate(perm, p), bijk, 1e-10 * (1 + std::fabs(bijk)));
              }
              contraction += p.y[k] * evaluate(B.at(l, k, i, j), p);
            }
            EXPECT_NEAR(contraction, 0.0, 1e-9);
          }
        }
      }
    }
  }
}

TEST(Connection, SymmetryAndEulerRelation) {
  for (const auto& s : fixture_sprays()) {
    const auto c = connection(s);
    const int n = s.dim();
    for (const auto& p : samples_for(s, 6)) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double euler = 0.0;
          for (int k = 0; k < n; ++k) {
            const double gjk = evaluate(c.at(i, j, k), p);
            EXPECT_NEAR(evaluate(c.at(i, k, j), p), gjk, 1e-10 * (1 + std::fabs(gjk)));
            euler += p.y[k] * gjk;
          }
          const double g = evaluate(c.at(i, j), p);
          EXPECT_NEAR(euler, g, 1e-10 * (1 + std::fabs(g)));
        }
      }
    }
  }
}

TEST(CurvatureVectors, FlatIsZero) {
  for (const auto& cv : curvature_vectors(flat_spray())) EXPECT_TRUE(cv.field.is_zero());
}

TEST(CurvatureVectors, RadicalProfileMatchesFiniteDifferenceBracket) {
  const Spray s = radical_profile_spray(1, 1, 1);
  const Point p({0.0, 0.0}, {1.0, 1.0});
  const auto cv = curvature_vectors(s, std::vector<Point>{p});
  ASSERT_EQ(cv.size(), 1u);
  EXPECT_TRUE(cv[0].field.is_vertical());
  const Eigen::VectorXd symbolic = cv[0].field.evaluate(p);

  const auto h = horizontal_frame(s);
  const Eigen::VectorXd h1 = h[0].evaluate(p), h2 = h[1].evaluate(p);
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      oracle(a) += h1(b) * fd(h[1][a], p, b, {}) - h2(b) * fd(h[0][a], p, b, {});
    }
  }
  EXPECT_GT(symbolic.norm(), 1e-3);
  EXPECT_LT((symbolic - oracle).norm(), 1e-6 * (1 + oracle.norm()));
}

TEST(CanonicalFields, ShapeAndHorizontalSpray) {
  const auto [C, S] = canonical_fields(flat_spray());
  EXPECT_EQ(C, VectorField({Expression(), Expression(), Expression::y(1), Expression::y(2)}));
  EXPECT_EQ(S, VectorField({Expression::y(1), Expression::y(2), Expression(), Expression()}));

  for (const auto& s : fixture_sprays()) {
    const auto fields = canonical_fields(s);
    const auto h = horizontal_frame(s);
    for (const auto& p : samples_for(s, 5)) {
      Eigen::VectorXd diff = fields.spray.evaluate(p);
      for (int i = 0; i < s.dim(); ++i) diff -= p.y[i] * h[i].evaluate(p);
      EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(CanonicalFields, HorizontalFrameCommutesWithLiouville) {
  for (const auto& s : fixture_sprays()) {
    const VectorField C = liouville_field(s.dim());
    const auto h = horizontal_frame(s);
    for (const auto& p : samples_for(s, 20)) {
      for (const auto& hi : h) {
        EXPECT_LE(lie_bracket(hi, C).evaluate(p).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(Homogeneity, Residuals) {
  const auto flat = validate_homogeneity(flat_spray(), samples_for(flat_spray()));
  EXPECT_TRUE(flat.pass);
  EXPECT_EQ(flat.max_residual, 0.0);

  const Spray radical = radical_profile_spray(1, 1, 1);
  const auto r = validate_homogeneity(radical, samples_for(radical));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-12);

  const Spray cubic = Spray::parse(2, {"y1^3", "0"});
  const auto bad = validate_homogeneity(cubic, std::vector<Point>{Point({0.0, 0.0}, {1.0, 0.0})});
  EXPECT_FALSE(bad.pass);
  EXPECT_DOUBLE_EQ(*bad.residual[0], 1.0);
}

TEST(Homogeneity, SingularSamplesAreFlagged) {
  const Spray s = monomial_spray(3, 3);
  const auto r = validate_homogeneity(s, std::vector<Point>{Point({0.0, 0.0}, {0.0, 1.0}), Point({0.0, 0.0}, {1.0, 1.0})});
  EXPECT_FALSE(r.residual[0].has_value());
  EXPECT_EQ(r.singular.size(), 1u);
  EXPECT_TRUE(r.pass);
}

TEST(ConformalFixture, MatchesChristoffelOracle) {
  // gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk) for g = exp(2 x1) I,
  // metric derivatives taken by central differences.
  auto metric = [](double x1, double) { return std::exp(2 * x1); };
  const Spray s = conformal_exp_spray();
  for (const auto& p : samples_for(s, 10)) {
    const double h = 1e-6;
    const double g = metric(p.x[0], p.x[1]);
    const double dg[2] = {(metric(p.x[0] + h, p.x[1]) - metric(p.x[0] - h, p.x[1])) / (2 * h),
                          (metric(p.x[0], p.x[1] + h) - metric(p.x[0], p.x[1] - h)) / (2 * h)};
    for (int i = 0; i < 2; ++i) {
      double fi = 0.0;
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          const double gamma = 0.5 / g * ((i == k ? dg[j] : 0.0) + (i == j ? dg[k] : 0.0) - (j == k ? dg[i] : 0.0));
          fi -= gamma * p.y[j] * p.y[k];
        }
      }
      EXPECT_NEAR(evaluate(s.f(i), p), fi, 1e-8);
    }
  }
}

TEST(Sampling, DeterministicAndInsideBox) {
  const Spray s = monomial_spray(3, 4);
  SamplingConfig cfg;
  const auto a = draw_samples(2, cfg, s.coefficients());
  const auto b = draw_samples(2, cfg, s.coefficients());
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].y, b.points[i].y);
    for (double v : a.points[i].y) EXPECT_TRUE(v >= 0.5 && v <= 2.0);
    for (double v : a.points[i].x) EXPECT_TRUE(v >= -1.0 && v <= 1.0);
  }
  const auto fib = draw_fibered_samples(2, cfg, 3, 4, s.coefficients());
  EXPECT_EQ(fib.size(), 12u);
  EXPECT_EQ(fib.fiber_count(), 3);
  EXPECT_EQ(fib.points[0].x, fib.points[3].x);
  EXPECT_NE(fib.points[0].y, fib.points[1].y);
}

TEST(Sampling, ExhaustionNearSingularLocus) {
  // 1/y1 with y1 confined to a tiny interval around 0
  SamplingConfig cfg;
  cfg.y = {-1e-4, 1e-4};
  cfg.max_rejections = 50;
  const std::vector<Expression> guards{parse("1/y1", 2)};
  EXPECT_THROW(draw_samples(2, cfg, guards), SamplingExhausted);
}
