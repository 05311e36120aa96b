#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finmet/expr.hpp"

namespace finmet {

/// A vector field on TM, components ordered (d/dx^1..d/dx^n, d/dy^1..d/dy^n).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<Expression> components);

  static VectorField zero(int dim);
  /// Field with the given fiber components and vanishing base components.
  static VectorField vertical(std::span<const Expression> fiber);

  int dim() const { return static_cast<int>(components_.size()) / 2; }
  const std::vector<Expression>& components() const { return components_; }
  const Expression& operator[](std::size_t a) const { return components_[a]; }
  const Expression& x(int i) const { return components_[static_cast<std::size_t>(i)]; }
  const Expression& y(int i) const { return components_[static_cast<std::size_t>(dim() + i)]; }

  bool is_zero() const;
  /// Base components are identically zero.
  bool is_vertical() const;

  Eigen::VectorXd evaluate(const Point& p, const ParamMap& params = {}) const;
  /// Applies the field as a derivation to a function.
  Expression apply(Expression f) const;
  VectorField scaled(Expression factor) const;

  std::string to_string() const;

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  std::vector<Expression> components_;
};

/// Lie bracket [X, Y]^a = X^b dY^a/du^b - Y^b dX^a/du^b over u = (x, y).
VectorField lie_bracket(const VectorField& X, const VectorField& Y);

}  // namespace finmet
