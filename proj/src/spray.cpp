#include "finmet/spray.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "finmet/parse.hpp"

namespace finmet {

Spray::Spray(std::vector<Expression> coefficients, ParamMap params) : params_(std::move(params)) {
  if (coefficients.size() < 2) throw std::invalid_argument("spray: dimension must be at least 2");
  f_.reserve(coefficients.size());
  for (auto& c : coefficients) f_.push_back(substitute(c, params_));
}

Spray Spray::parse(int dim, const std::vector<std::string>& sources, const ParamMap& params) {
  if (static_cast<int>(sources.size()) != dim) {
    throw std::invalid_argument("spray: expected " + std::to_string(dim) + " coefficients, got " +
                                std::to_string(sources.size()));
  }
  std::vector<std::string> names;
  for (const auto& [name, value] : params) names.push_back(name);
  std::vector<Expression> f;
  for (const auto& src : sources) f.push_back(finmet::parse(src, dim, names));
  return Spray(std::move(f), params);
}

ConnectionData connection(const Spray& spray) {
  const int n = spray.dim();
  ConnectionData c;
  c.dim = n;
  c.gamma.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) c.gamma.push_back(-0.5 * differentiate(spray.f(i), Coordinate::y(j + 1)));
  }
  c.gamma_deriv.reserve(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) c.gamma_deriv.push_back(differentiate(c.at(i, j), Coordinate::y(k + 1)));
    }
  }
  return c;
}

std::vector<VectorField> horizontal_frame(const ConnectionData& conn) {
  const int n = conn.dim;
  std::vector<VectorField> frame;
  frame.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<Expression> comps(static_cast<std::size_t>(2 * n));
    comps[static_cast<std::size_t>(i)] = Expression::constant(1.0);
    for (int a = 0; a < n; ++a) comps[static_cast<std::size_t>(n + a)] = -conn.at(a, i);
    frame.emplace_back(std::move(comps));
  }
  return frame;
}

std::vector<VectorField> horizontal_frame(const Spray& spray) { return horizontal_frame(connection(spray)); }

std::vector<std::array<int, 3>> BerwaldCurvature::image_indices() const {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      for (int k = j; k < dim; ++k) out.push_back({i, j, k});
    }
  }
  return out;
}

std::vector<VectorField> BerwaldCurvature::image_fields() const {
  std::vector<VectorField> out;
  for (const auto& [i, j, k] : image_indices()) {
    std::vector<Expression> fiber;
    for (int l = 0; l < dim; ++l) fiber.push_back(at(l, i, j, k));
    out.push_back(VectorField::vertical(fiber));
  }
  return out;
}

BerwaldCurvature berwald_curvature(const Spray& spray, std::span<const Point> samples, double flat_tol) {
  const int n = spray.dim();
  BerwaldCurvature b;
  b.dim = n;
  b.components.reserve(static_cast<std::size_t>(n * n * n * n));
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      const Expression fi = differentiate(spray.f(l), Coordinate::y(i + 1));
      for (int j = 0; j < n; ++j) {
        const Expression fij = differentiate(fi, Coordinate::y(j + 1));
        for (int k = 0; k < n; ++k) b.components.push_back(-0.5 * differentiate(fij, Coordinate::y(k + 1)));
      }
    }
  }
  const bool symbolic_zero =
      std::all_of(b.components.begin(), b.components.end(), [](const Expression& e) { return e.is_zero(); });
  if (symbolic_zero) {
    b.berwald_flat = true;
    return b;
  }
  for (const auto& p : samples) {
    for (double v : evaluate_all(b.components, p, spray.params())) b.max_abs = std::max(b.max_abs, std::fabs(v));
  }
  b.berwald_flat = !samples.empty() && b.max_abs <= flat_tol;
  return b;
}

std::vector<CurvatureVector> curvature_vectors(const Spray& spray, std::span<const Point> samples) {
  const int n = spray.dim();
  const auto frame = horizontal_frame(spray);
  std::vector<CurvatureVector> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      VectorField br = lie_bracket(frame[static_cast<std::size_t>(i)], frame[static_cast<std::size_t>(j)]);
      if (!br.is_vertical()) {
        for (const auto& p : samples) {
          const Eigen::VectorXd v = br.evaluate(p, spray.params());
          if (v.head(n).cwiseAbs().maxCoeff() > 1e-10) {
            throw std::logic_error("curvature bracket [h" + std::to_string(i + 1) + ",h" + std::to_string(j + 1) +
                                   "] has a base component at " + p.to_string());
          }
        }
      }
      out.push_back({i, j, std::move(br)});
    }
  }
  return out;
}

VectorField liouville_field(int dim) {
  std::vector<Expression> fiber;
  for (int i = 1; i <= dim; ++i) fiber.push_back(Expression::y(i));
  return VectorField::vertical(fiber);
}

CanonicalFields canonical_fields(const Spray& spray) {
  const int n = spray.dim();
  std::vector<Expression> s;
  for (int i = 1; i <= n; ++i) s.push_back(Expression::y(i));
  for (int i = 0; i < n; ++i) s.push_back(spray.f(i));
  return {liouville_field(n), VectorField(std::move(s))};
}

HomogeneityReport validate_homogeneity(const Spray& spray, std::span<const Point> samples, double rel_tol) {
  const int n = spray.dim();
  const VectorField C = liouville_field(n);
  std::vector<Expression> defect;
  for (int i = 0; i < n; ++i) defect.push_back(C.apply(spray.f(i)) - 2.0 * spray.f(i));
  std::vector<Expression> all = defect;
  all.insert(all.end(), spray.coefficients().begin(), spray.coefficients().end());

  HomogeneityReport r;
  bool ok = true;
  std::size_t evaluated = 0;
  for (const auto& p : samples) {
    try {
      const auto v = evaluate_all(all, p, spray.params());
      double res = 0.0, scale = 0.0;
      for (int i = 0; i < n; ++i) {
        res = std::max(res, std::fabs(v[static_cast<std::size_t>(i)]));
        scale = std::max(scale, std::fabs(v[static_cast<std::size_t>(n + i)]));
      }
      r.residual.emplace_back(res);
      r.scale.push_back(scale);
      r.max_residual = std::max(r.max_residual, res);
      ok = ok && res <= rel_tol * (1.0 + scale);
      ++evaluated;
    } catch (const SingularEvaluation& err) {
      r.residual.emplace_back(std::nullopt);
      r.scale.push_back(0.0);
      r.singular.emplace_back(err.what());
    }
  }
  r.pass = ok && evaluated > 0;
  return r;
}

}  // namespace finmet
