#include "finmet/vector_field.hpp"

#include <algorithm>
#include <stdexcept>

namespace finmet {

VectorField::VectorField(std::vector<Expression> components) : components_(std::move(components)) {
  if (components_.empty() || components_.size() % 2 != 0) {
    throw std::invalid_argument("vector field needs 2n components");
  }
}

VectorField VectorField::zero(int dim) { return VectorField(std::vector<Expression>(static_cast<std::size_t>(2 * dim))); }

VectorField VectorField::vertical(std::span<const Expression> fiber) {
  std::vector<Expression> comps(fiber.size());
  comps.insert(comps.end(), fiber.begin(), fiber.end());
  return VectorField(std::move(comps));
}

bool VectorField::is_zero() const {
  return std::all_of(components_.begin(), components_.end(), [](const Expression& e) { return e.is_zero(); });
}

bool VectorField::is_vertical() const {
  return std::all_of(components_.begin(), components_.begin() + dim(), [](const Expression& e) { return e.is_zero(); });
}

Eigen::VectorXd VectorField::evaluate(const Point& p, const ParamMap& params) const {
  const auto values = evaluate_all(components_, p, params);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Expression VectorField::apply(Expression f) const {
  const int n = dim();
  std::vector<Expression> terms;
  terms.reserve(components_.size());
  for (int a = 0; a < 2 * n; ++a) {
    const Expression& c = components_[static_cast<std::size_t>(a)];
    if (c.is_zero()) continue;
    terms.push_back(c * differentiate(f, Coordinate::from_slot(a, n)));
  }
  return sum(terms);
}

VectorField VectorField::scaled(Expression factor) const {
  std::vector<Expression> out;
  out.reserve(components_.size());
  for (const auto& c : components_) out.push_back(factor * c);
  return VectorField(std::move(out));
}

std::string VectorField::to_string() const {
  const int n = dim();
  std::string s;
  for (int a = 0; a < 2 * n; ++a) {
    const Expression& c = components_[static_cast<std::size_t>(a)];
    if (c.is_zero()) continue;
    if (!s.empty()) s += " + ";
    s += "(" + c.to_string() + ")*d/d" + Coordinate::from_slot(a, n).name();
  }
  return s.empty() ? "0" : s;
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  if (X.dim() != Y.dim()) throw std::invalid_argument("lie_bracket: dimension mismatch");
  const int n = X.dim();
  std::vector<Expression> out;
  out.reserve(static_cast<std::size_t>(2 * n));
  for (int a = 0; a < 2 * n; ++a) out.push_back(X.apply(Y[static_cast<std::size_t>(a)]) - Y.apply(X[static_cast<std::size_t>(a)]));
  return VectorField(std::move(out));
}

}  // namespace finmet
