#pragma once

// Symbolic expressions over the induced coordinates (x^1..x^n, y^1..y^n) of a
// tangent bundle.  Expressions are immutable handles into a process-wide
// hash-consed DAG: two structurally equal expressions share one node, so
// equality is a pointer comparison and repeated subterms produced by iterated
// differentiation are stored once.
//
// Every constructor canonicalizes locally (constant folding, flattening,
// coefficient collection, 0/1 identities).  No factoring or radical denesting
// is attempted.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finmet {

enum class CoordKind : std::uint8_t { base, fiber };

/// One of the induced coordinates x^i (base) or y^i (fiber), 1-based.
struct Coordinate {
  CoordKind kind = CoordKind::base;
  int index = 1;

  static Coordinate x(int i) { return {CoordKind::base, i}; }
  static Coordinate y(int i) { return {CoordKind::fiber, i}; }

  /// Slot in the flattened (x^1..x^n, y^1..y^n) ordering, 0-based.
  int slot(int dim) const { return kind == CoordKind::base ? index - 1 : dim + index - 1; }
  static Coordinate from_slot(int slot, int dim) {
    return slot < dim ? x(slot + 1) : y(slot - dim + 1);
  }

  std::string name() const;
  auto operator<=>(const Coordinate&) const = default;
};

/// Exponent of a power node.  Denominators are restricted to 1 or 2.
struct Rational {
  int num = 1;
  int den = 1;

  Rational() = default;
  Rational(int n) : num(n), den(1) {}  // NOLINT(google-explicit-constructor)
  Rational(int n, int d);

  bool is_integer() const { return den == 1; }
  double value() const { return static_cast<double>(num) / den; }
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b) = default;
};

enum class Func : std::uint8_t { exp, log, sin, cos, abs };

std::string_view func_name(Func f);

enum class NodeKind : std::uint8_t { constant, coordinate, parameter, power, product, sum, function };

namespace detail {
struct Node;
}

using ParamMap = std::map<std::string, double, std::less<>>;

class Expression {
 public:
  /// The constant 0.
  Expression();

  static Expression constant(double value);
  static Expression coordinate(Coordinate c);
  static Expression parameter(std::string_view name);
  static Expression x(int i) { return coordinate(Coordinate::x(i)); }
  static Expression y(int i) { return coordinate(Coordinate::y(i)); }

  NodeKind kind() const;
  bool is_constant() const { return kind() == NodeKind::constant; }
  bool is_zero() const;
  bool is_one() const;

  /// Constant value (constant nodes), numeric coefficient (product nodes) or
  /// constant term (sum nodes).
  double value() const;
  Coordinate coord() const;
  const std::string& param_name() const;
  Rational exponent() const;
  Func func() const;
  std::span<const Expression> children() const;

  /// Number of distinct DAG nodes reachable from this expression.
  std::size_t dag_size() const;

  std::string to_string() const;

  friend bool operator==(Expression a, Expression b) { return a.node_ == b.node_; }
  friend std::strong_ordering operator<=>(Expression a, Expression b);
  std::size_t hash() const;

  const detail::Node* node() const { return node_; }
  explicit Expression(const detail::Node* node) : node_(node) {}

 private:
  const detail::Node* node_;
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression operator-(Expression a);
inline Expression operator*(double c, Expression e) { return Expression::constant(c) * e; }
inline Expression operator+(Expression e, double c) { return e + Expression::constant(c); }

Expression pow(Expression base, Rational exponent);
Expression sqrt(Expression e);
Expression apply(Func f, Expression arg);
Expression exp(Expression e);
Expression log(Expression e);
Expression sin(Expression e);
Expression cos(Expression e);
Expression abs(Expression e);

Expression sum(std::span<const Expression> terms);
Expression product(std::span<const Expression> factors);

/// Exact partial derivative, returned in canonical form.
Expression differentiate(Expression e, Coordinate v);

/// Rebuilds the expression bottom-up through the canonicalizing constructors.
Expression simplify(Expression e);

/// Replaces bound parameters by constants; unbound parameters are kept.
Expression substitute(Expression e, const ParamMap& params);

/// True iff the expression mentions the coordinate.
bool depends_on(Expression e, Coordinate v);

/// A point of the slit tangent bundle in induced coordinates.
struct Point {
  std::vector<double> x;
  std::vector<double> y;

  Point() = default;
  Point(std::vector<double> base, std::vector<double> fiber);

  int dim() const { return static_cast<int>(x.size()); }
  double operator[](Coordinate c) const;
  std::string to_string() const;
};

class SingularEvaluation : public std::runtime_error {
 public:
  SingularEvaluation(std::string subterm, const Point& point, std::string_view reason);

  const std::string& subterm() const { return subterm_; }
  const Point& point() const { return point_; }

 private:
  std::string subterm_;
  Point point_;
};

class UnboundParameter : public std::runtime_error {
 public:
  explicit UnboundParameter(const std::string& name)
      : std::runtime_error("unbound parameter '" + name + "'") {}
};

/// Evaluates at a point.  Throws SingularEvaluation on division by zero, even
/// roots or logarithms of non-positive values, and non-finite results.
double evaluate(Expression e, const Point& p, const ParamMap& params = {});

/// Evaluates several expressions at one point, sharing work across the DAG.
std::vector<double> evaluate_all(std::span<const Expression> es, const Point& p,
                                 const ParamMap& params = {});

/// Number of nodes currently interned in the process-wide table.
std::size_t interned_node_count();

}  // namespace finmet

template <>
struct std::hash<finmet::Expression> {
  std::size_t operator()(const finmet::Expression& e) const noexcept { return e.hash(); }
};
