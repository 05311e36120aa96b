#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "finmet/expr.hpp"
#include "finmet/parse.hpp"
#include "support/random_expr.hpp"

using namespace finmet;
using finmet::testing::central_difference;
using finmet::testing::ExprGenerator;

namespace {

const Point kOrigin11({0.0, 0.0}, {1.0, 1.0});

}  // namespace

TEST(Parse, SumOfSquares) {
  Expression e = parse("y1^2 + y2^2", 2);
  ASSERT_EQ(e.kind(), NodeKind::sum);
  ASSERT_EQ(e.children().size(), 2u);
  EXPECT_EQ(e.children()[0], pow(Expression::y(1), 2));
  EXPECT_EQ(e.children()[1], pow(Expression::y(2), 2));
  EXPECT_EQ(e.to_string(), "y1^2 + y2^2");
}

TEST(Parse, ProfileFunctionWithParameters) {
  Expression e = parse("a*sqrt((y2/y1)^2 + b*(y2/y1) + c)", 2, {"a", "b", "c"});
  const ParamMap params{{"a", 1.0}, {"b", 1.0}, {"c", 1.0}};
  EXPECT_NEAR(evaluate(e, kOrigin11, params), std::sqrt(3.0), 1e-15);
  EXPECT_TRUE(depends_on(e, Coordinate::y(1)));
  EXPECT_FALSE(depends_on(e, Coordinate::x(1)));
}

TEST(Parse, IndexOutOfRange) {
  try {
    parse("y3", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.kind(), ParseError::Kind::index_out_of_range);
    EXPECT_EQ(err.position(), 0u);
  }
}

TEST(Parse, UnknownIdentifierAndSyntax) {
  try {
    parse("y1 + q", 2);
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.kind(), ParseError::Kind::unknown_identifier);
    EXPECT_EQ(err.position(), 5u);
  }
  try {
    parse("y1 + * y2", 2);
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.kind(), ParseError::Kind::syntax);
    EXPECT_EQ(err.position(), 5u);
  }
  EXPECT_THROW(parse("(y1 + y2", 2), ParseError);
  EXPECT_THROW(parse("y1^(1/3)", 2), ParseError);
  EXPECT_THROW(parse("z1", 2), ParseError);
}

TEST(Parse, PowerBindsTighterThanUnaryMinus) {
  const Point p({0.0, 0.0}, {3.0, 1.0});
  EXPECT_DOUBLE_EQ(evaluate(parse("-y1^2", 2), p), -9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse("y1^(-1)", 2), p), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(evaluate(parse("y1^(3/2)", 2), p), std::pow(3.0, 1.5));
  EXPECT_DOUBLE_EQ(evaluate(parse("2^3*y2 - 1e-1", 2), p), 8.0 - 0.1);
}

TEST(Differentiate, Elementary) {
  EXPECT_EQ(differentiate(parse("y1^2", 2), Coordinate::y(1)), parse("2*y1", 2));
  EXPECT_TRUE(differentiate(parse("y1*y2", 2), Coordinate::x(1)).is_zero());
  EXPECT_EQ(differentiate(parse("x1*exp(x1)", 1), Coordinate::x(1)), parse("exp(x1) + x1*exp(x1)", 1));
}

TEST(Differentiate, RadicalProfileMatchesFiniteDifference) {
  const ParamMap params{{"a", 1.5}};
  Expression e = parse("a*y1^2*sqrt((y2/y1)^2)", 2, {"a"});
  Expression d = differentiate(e, Coordinate::y(2));
  const Point p({0.0, 0.0}, {1.0, 2.0});
  const double oracle = central_difference(e, p, Coordinate::y(2), 1e-6, params);
  EXPECT_NEAR(evaluate(d, p, params), oracle, 1e-6);
}

TEST(Differentiate, AbsIsGuardedOnTheKink) {
  Expression d = differentiate(parse("abs(y1 - y2)", 2), Coordinate::y(1));
  EXPECT_DOUBLE_EQ(evaluate(d, Point({0.0, 0.0}, {2.0, 1.0})), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(d, Point({0.0, 0.0}, {1.0, 2.0})), -1.0);
  EXPECT_THROW(evaluate(d, kOrigin11), SingularEvaluation);
  // second derivative vanishes away from the kink
  EXPECT_TRUE(differentiate(d, Coordinate::y(1)).is_zero());
}

TEST(Evaluate, Basic) {
  EXPECT_DOUBLE_EQ(evaluate(parse("y1^2+y2^2", 2), Point({0.0, 0.0}, {3.0, 4.0})), 25.0);
}

TEST(Evaluate, SingularDivision) {
  try {
    evaluate(parse("y2/y1", 2), Point({0.0, 0.0}, {0.0, 1.0}));
    FAIL();
  } catch (const SingularEvaluation& err) {
    EXPECT_EQ(err.subterm(), "1/y1");
    EXPECT_EQ(err.point().y[1], 1.0);
  }
  EXPECT_THROW(evaluate(parse("log(y1 - 2)", 2), kOrigin11), SingularEvaluation);
  EXPECT_THROW(evaluate(parse("sqrt(y1 - 2)", 2), kOrigin11), SingularEvaluation);
}

TEST(Evaluate, UnboundParameterAndSlitBundle) {
  EXPECT_THROW(evaluate(parse("a*y1", 2, {"a"}), kOrigin11), UnboundParameter);
  EXPECT_THROW(Point({0.0}, {0.0}), std::invalid_argument);
}

TEST(Simplify, LocalRewrites) {
  EXPECT_EQ(parse("0*y1 + 1*y2", 2), Expression::y(2));
  EXPECT_EQ(parse("y1*y1", 2), pow(Expression::y(1), 2));
  EXPECT_TRUE(parse("(y1+y2) - (y1+y2)", 2).is_zero());
  EXPECT_TRUE(parse("2*(y1+y2) - 2*y1 - 2*y2", 2).is_zero());
  EXPECT_EQ(parse("sqrt(y1)*sqrt(y1)", 2), Expression::y(1));
  EXPECT_EQ(parse("(y1^2)^3/y1^6", 2), Expression::constant(1.0));
  Expression e = parse("x1*(y1+1)^2*y2/y2", 2);
  EXPECT_EQ(simplify(e), e);
  EXPECT_EQ(simplify(simplify(e)), simplify(e));
}

TEST(Simplify, SubstituteFoldsParameters) {
  Expression e = parse("a*y1 + b*y1^2", 2, {"a", "b"});
  EXPECT_EQ(substitute(e, {{"a", 2.0}, {"b", 0.0}}), parse("2*y1", 2));
}

TEST(Print, RoundTripPreservesValue) {
  ExprGenerator gen(2, 7);
  for (int trial = 0; trial < 300; ++trial) {
    Expression e = gen.smooth(4);
    Expression back = parse(e.to_string(), 2);
    const Point p = gen.point();
    const double v = evaluate(e, p);
    EXPECT_NEAR(evaluate(back, p), v, 1e-12 * (1.0 + std::fabs(v))) << e.to_string();
  }
}

TEST(Property, DerivativeMatchesCentralDifference) {
  ExprGenerator gen(2, 2024);
  int checked = 0;
  while (checked < 1000) {
    Expression e = gen.smooth(3);
    const Point p = gen.point();
    const Coordinate v = Coordinate::from_slot(static_cast<int>(gen.rng()() % 4), 2);
    const double exact = evaluate(differentiate(e, v), p);
    const double h = 1e-5;
    const double fd = central_difference(e, p, v, h);
    EXPECT_LE(std::fabs(exact - fd), 1e-5 * (1.0 + std::fabs(exact))) << e.to_string() << " d/d" << v.name();
    ++checked;
  }
}

TEST(Property, SimplifyPreservesValue) {
  ExprGenerator gen(2, 99);
  for (int trial = 0; trial < 500; ++trial) {
    Expression e = gen.smooth(4);
    const Point p = gen.point();
    const double v = evaluate(e, p);
    EXPECT_LE(std::fabs(evaluate(simplify(e), p) - v), 1e-12 * (1.0 + std::fabs(v)));
    EXPECT_EQ(simplify(simplify(e)), simplify(e));
  }
}

TEST(Property, MixedPartialsCommute) {
  ExprGenerator gen(2, 31);
  for (int trial = 0; trial < 300; ++trial) {
    Expression e = gen.smooth(3);
    const Point p = gen.point();
    const Coordinate u = Coordinate::from_slot(static_cast<int>(gen.rng()() % 4), 2);
    const Coordinate v = Coordinate::from_slot(static_cast<int>(gen.rng()() % 4), 2);
    const double uv = evaluate(differentiate(differentiate(e, u), v), p);
    const double vu = evaluate(differentiate(differentiate(e, v), u), p);
    EXPECT_LE(std::fabs(uv - vu), 1e-10 * (1.0 + std::fabs(uv)));
  }
}

TEST(Concurrency, ConcurrentConstructionIsConsistent) {
  std::vector<Expression> results(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&results, t] {
      Expression e = parse("a*sqrt((y2/y1)^2 + b*(y2/y1) + c)*y1^2", 2, {"a", "b", "c"});
      for (int k = 0; k < 3; ++k) e = differentiate(e, Coordinate::y(1 + k % 2));
      results[t] = e;
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& r : results) EXPECT_EQ(r, results[0]);
}
