#pragma once

// Sprays S = y^i d/dx^i + f^i(x,y) d/dy^i and the objects they induce: the
// nonlinear connection, its horizontal frame, curvature brackets and the
// Berwald curvature.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finmet/expr.hpp"
#include "finmet/vector_field.hpp"

namespace finmet {

class Spray {
 public:
  /// Parameters are bound to their values at construction.
  Spray(std::vector<Expression> coefficients, ParamMap params = {});

  static Spray parse(int dim, const std::vector<std::string>& sources, const ParamMap& params = {});

  int dim() const { return static_cast<int>(f_.size()); }
  const Expression& f(int i) const { return f_[static_cast<std::size_t>(i)]; }
  const std::vector<Expression>& coefficients() const { return f_; }
  const ParamMap& params() const { return params_; }

 private:
  std::vector<Expression> f_;
  ParamMap params_;
};

/// Gamma^i_j = -1/2 df^i/dy^j and Gamma^i_jk = dGamma^i_j/dy^k, indices 0-based.
struct ConnectionData {
  int dim = 0;
  std::vector<Expression> gamma;        // n*n, row-major (i, j)
  std::vector<Expression> gamma_deriv;  // n*n*n, (i, j, k)

  const Expression& at(int i, int j) const { return gamma[static_cast<std::size_t>(i * dim + j)]; }
  const Expression& at(int i, int j, int k) const {
    return gamma_deriv[static_cast<std::size_t>((i * dim + j) * dim + k)];
  }
};

ConnectionData connection(const Spray& spray);

/// h_i = d/dx^i - Gamma^a_i d/dy^a.
std::vector<VectorField> horizontal_frame(const ConnectionData& conn);
std::vector<VectorField> horizontal_frame(const Spray& spray);

/// B^l_ijk = -1/2 d^3 f^l / dy^i dy^j dy^k.
struct BerwaldCurvature {
  int dim = 0;
  std::vector<Expression> components;  // n^4, (l, i, j, k)
  bool berwald_flat = false;
  /// Largest |B| over samples (0 when every component simplified to 0).
  double max_abs = 0.0;

  const Expression& at(int l, int i, int j, int k) const {
    return components[static_cast<std::size_t>(((l * dim + i) * dim + j) * dim + k)];
  }
  /// The vertical fields B(., i, j, k) for i <= j <= k; they span Im B.
  std::vector<VectorField> image_fields() const;
  std::vector<std::array<int, 3>> image_indices() const;
};

/// Flatness is decided symbolically, or numerically below `flat_tol` at samples.
BerwaldCurvature berwald_curvature(const Spray& spray, std::span<const Point> samples, double flat_tol = 1e-12);

struct CurvatureVector {
  int i = 0;
  int j = 0;
  VectorField field;  // [h_i, h_j]
};

/// The brackets [h_i, h_j] for i < j.  Throws std::logic_error if a base
/// component fails to vanish at a sample beyond 1e-10.
std::vector<CurvatureVector> curvature_vectors(const Spray& spray, std::span<const Point> samples = {});

struct CanonicalFields {
  VectorField liouville;  // C = y^i d/dy^i
  VectorField spray;      // S = y^i d/dx^i + f^i d/dy^i
};

CanonicalFields canonical_fields(const Spray& spray);
VectorField liouville_field(int dim);

struct HomogeneityReport {
  /// max_i |y^j df^i/dy^j - 2 f^i| per sample; empty when evaluation was singular.
  std::vector<std::optional<double>> residual;
  /// max_i |f^i| per sample (scale of the tolerance).
  std::vector<double> scale;
  std::vector<std::string> singular;  // diagnostics for flagged samples
  bool pass = false;
  double max_residual = 0.0;
};

HomogeneityReport validate_homogeneity(const Spray& spray, std::span<const Point> samples, double rel_tol = 1e-9);

}  // namespace finmet
