#pragma once

// Second-order jets of a function on TM at a point, the linear system the
// first prolongation of the homogeneity and annihilation equations imposes on
// them, and a search for a datum whose fiber Hessian is positive definite.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finmet/distribution.hpp"
#include "finmet/expr.hpp"
#include "finmet/operators.hpp"

namespace finmet {

/// Layout of a flattened 2-jet:
///   s | s_i (x) | s_i (y) | s_ij (x,x; i<=j) | s_ij (x^i, y^j; all) | s_ij (y,y; i<=j)
struct JetLayout {
  int n = 0;

  explicit JetLayout(int dim) : n(dim) {}
  int size() const { return 1 + 2 * n + n * (n + 1) / 2 + n * n + n * (n + 1) / 2; }
  int value() const { return 0; }
  /// First derivative along slot a of (x^1..x^n, y^1..y^n).
  int first(int a) const { return 1 + a; }
  /// Second derivative along slots a and b (order irrelevant).
  int second(int a, int b) const;
  /// Offset of the (y,y) block.
  int fiber_block() const { return 1 + 2 * n + n * (n + 1) / 2 + n * n; }
  /// True for entries that are off-diagonal members of a symmetric block.
  bool off_diagonal_symmetric(int index) const;
};

struct JetCoordinates {
  double s = 0.0;
  Eigen::VectorXd sx, sy;           // first derivatives
  Eigen::MatrixXd sxx, sxy, syy;    // sxy(i, j) = d2/dx^i dy^j

  int dim() const { return static_cast<int>(sx.size()); }
  static JetCoordinates zero(int dim);
  Eigen::VectorXd flatten() const;
  static JetCoordinates unflatten(int dim, const Eigen::VectorXd& v);
};

/// 2-jet of E at p.
JetCoordinates energy_jet(const EnergyCandidate& E, const Point& p);

enum class RowKind { homogeneity, homogeneity_prolonged, generator, generator_prolonged };

struct RowTag {
  RowKind kind = RowKind::homogeneity;
  std::string generator;  // origin of the generator for generator rows
  int direction = -1;     // prolongation slot, -1 otherwise

  std::string to_string() const;
};

struct JetSystem {
  Point point;
  int dim = 0;
  /// Rows scaled to unit Euclidean norm; all right-hand sides are zero.
  Eigen::MatrixXd matrix;
  std::vector<RowTag> rows;
  /// Rows the generators would contribute without span reduction.
  int unreduced_rows = 0;
  std::vector<std::string> generators_used;

  /// max_r |row_r . s| / |s| (0 for the zero jet).
  double residual(const JetCoordinates& jet) const;
};

struct JetConfig {
  bool span_reduce = true;
  double reduce_tol = 1e-10;
};

/// Rows: y^i s_i(y) - 2 s = 0; its derivatives along every x^j and y^j; for
/// each generator W, W^a s_a = 0 and its derivatives along every slot.
JetSystem assemble_jet_system(const Spray& spray, const DistributionReport& report, const Point& v,
                              const JetConfig& config = {});

struct PdConfig {
  int max_iters = 10000;
  double ridge = 1e-6;
  double tol = 1e-9;
};

struct PdResult {
  bool found = false;
  /// On success: a jet with s_yy largest eigenvalue 1, min eigenvalue >= ridge.
  std::optional<JetCoordinates> jet;
  double residual = 0.0;        // constraint residual of the best iterate
  double min_eigenvalue = 0.0;  // of its fiber block, scaled so the largest is 1
  double cone_gap = 0.0;        // distance between the last iterate pair
  int iterations = 0;
  int kernel_dim = 0;
  std::string diagnostic;
};

/// Alternating projection between the kernel of the system and the cone of
/// jets whose fiber block dominates the identity.  A failure means no datum
/// was found, not that none exists.
PdResult pd_feasibility(const JetSystem& system, const PdConfig& config = {});

}  // namespace finmet
