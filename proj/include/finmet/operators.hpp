#pragma once

// Variational operators evaluated on a candidate energy E = F^2/2 at sample
// points: homogeneity (P_c), the Euler-Lagrange form (P_e), the horizontal
// differential d_h, the curvature compatibilities d_R, and the metric
// compatibility P_g of the fundamental tensor.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finmet/expr.hpp"
#include "finmet/spray.hpp"

namespace finmet {

/// A candidate energy together with its symbolic derivatives up to the
/// orders the operators need.  Parameters are bound at construction.
class EnergyCandidate {
 public:
  EnergyCandidate(Expression energy, int dim, const ParamMap& params = {}, std::string domain_note = {});
  static EnergyCandidate parse(std::string_view source, int dim, const ParamMap& params = {},
                               std::string domain_note = {});

  int dim() const { return dim_; }
  const Expression& energy() const { return e_; }
  const std::string& domain_note() const { return note_; }

  // 0-based indices throughout.
  const Expression& dx(int i) const { return dx_[idx(i)]; }
  const Expression& dy(int i) const { return dy_[idx(i)]; }
  const Expression& dyy(int i, int j) const { return dyy_[idx(i, j)]; }
  /// d^2E / dx^i dy^j
  const Expression& dxy(int i, int j) const { return dxy_[idx(i, j)]; }
  const Expression& dyyy(int i, int j, int k) const { return dyyy_[idx(i, j, k)]; }
  /// d^3E / dx^i dy^j dy^k
  const Expression& dxyy(int i, int j, int k) const { return dxyy_[idx(i, j, k)]; }

 private:
  std::size_t idx(int i) const { return static_cast<std::size_t>(i); }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i * dim_ + j); }
  std::size_t idx(int i, int j, int k) const { return static_cast<std::size_t>((i * dim_ + j) * dim_ + k); }

  int dim_;
  Expression e_;
  std::string note_;
  std::vector<Expression> dx_, dy_, dyy_, dxy_, dyyy_, dxyy_;
};

/// Symbolic objects of a spray reused across operator evaluations.
struct SprayContext {
  Spray spray;
  ConnectionData connection;
  std::vector<VectorField> frame;
  std::vector<CurvatureVector> curvature;
  BerwaldCurvature berwald;

  explicit SprayContext(Spray s);
  int dim() const { return spray.dim(); }
};

struct SampleResidual {
  std::vector<double> components;  // empty when evaluation was singular
  double max_abs = 0.0;
  /// max_abs / (1 + |E| + |grad E|) at the sample.
  double relative = 0.0;
  std::string singular;  // diagnostic when evaluation failed

  bool ok() const { return singular.empty(); }
};

struct Residual {
  std::string op;
  std::vector<std::string> labels;  // one per component
  std::vector<SampleResidual> per_sample;

  double max_abs() const;
  double max_relative() const;
  int singular_count() const;
  /// Every sample evaluated and its relative residual is at most rel_tol.
  bool within(double rel_tol) const;
};

/// |y^i dE/dy^i - 2E|.
Residual residual_Pc(const EnergyCandidate& E, std::span<const Point> samples);
/// w_i = y^j d2E/dx^j dy^i + f^j d2E/dy^j dy^i - dE/dx^i.
Residual residual_Pe(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);
/// h_i(E) = dE/dx^i - Gamma^a_i dE/dy^a.
Residual residual_dh(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);
/// dE([h_i, h_j]) for i < j.
Residual residual_dR_curvature(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);
/// B^l_ijk dE/dy^l over all (i, j, k).
Residual residual_dR_berwald(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);
/// dg_jk/dx^i - Gamma^l_i dg_jk/dy^l - Gamma^l_ik g_lj - Gamma^l_ij g_lk over all (i, j, k),
/// with g_jk = d2E/dy^j dy^k.
Residual residual_Pg(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);
/// P_g(i,j,k) - d2(h_i E)/dy^j dy^k - B^l_ijk dE/dy^l over all (i, j, k).  The
/// middle term is differentiated from h_i(E) symbolically, independently of
/// the expansion used by residual_Pg.
Residual check_reduction_identity(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples);

struct FundamentalTensor {
  Eigen::MatrixXd g;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool positive_definite = false;  // min eigenvalue > 1e-10
};

/// g_ij = d2E/dy^i dy^j at p.  Throws SingularEvaluation.
FundamentalTensor fundamental_tensor(const EnergyCandidate& E, const Point& p);

}  // namespace finmet
