#pragma once

// Distributions spanned by vector fields and their iterated Lie brackets,
// examined numerically at sample points.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "finmet/sampling.hpp"
#include "finmet/spray.hpp"
#include "finmet/vector_field.hpp"

namespace finmet {

/// Number of singular values above rel_tol * sigma_max (0 for a zero matrix).
int numeric_rank(const Eigen::MatrixXd& columns, double rel_tol);
int numeric_rank(std::span<const VectorField> fields, const Point& p, double rel_tol, const ParamMap& params = {});

struct Generator {
  VectorField field;
  int depth = 0;       // 0 for seeds, k for k-fold brackets
  std::string origin;  // e.g. "h1", "B(1,1,2)", "[h1,B(1,1,1)]"
};

struct SaturationConfig {
  int max_depth = 4;
  double rank_tol = 1e-8;
};

struct VerticalLiftWitness {
  /// Normalized symbolic witness, when a single vertical generator realizes it.
  std::optional<VectorField> field;
  std::string source;  // origin of that generator
  /// Bracket depth of the generators needed to find the witness.
  int depth = 0;
  /// Smallest dimension of the fiber-wise intersection over base points.
  int intersection_dim = 0;
  /// Per base point: the base coordinates and the fiber direction, scaled so
  /// that component `normalized_slot` equals 1.
  std::vector<std::vector<double>> base_points;
  std::vector<std::vector<double>> directions;
  int normalized_slot = 0;
};

struct DistributionReport {
  int dim = 0;
  std::vector<Generator> generators;
  std::vector<int> rank_per_sample;
  std::optional<int> stable_rank;  // empty when the rank varies across samples
  int bracket_depth_used = 0;
  bool saturated = false;
  /// Minimum rank over samples after each round (index 0: seeds).
  std::vector<int> min_rank_history;
  std::vector<int> max_rank_history;
  std::vector<double> c_membership;  // relative residual of C per sample
  std::optional<VerticalLiftWitness> vertical_lift;
  SaturationConfig config;
  std::vector<std::string> warnings;

  std::vector<VectorField> fields() const;
};

/// Seeds of the holonomy distribution: the horizontal frame h_1..h_n.
std::vector<Generator> holonomy_seeds(const Spray& spray);
/// Seeds of the Landsberg distribution: the horizontal frame and Im B.
std::vector<Generator> landsberg_seeds(const Spray& spray, const BerwaldCurvature& berwald);

/// Appends brackets of generator pairs, in lexicographic pair order, whenever
/// the bracket raises the numeric rank at some sample.  Rounds stop when no
/// bracket raises the rank, when the rank is 2n at every sample, or at
/// max_depth.  Also records the Liouville-field membership residuals.
DistributionReport saturate(std::span<const Generator> seeds, const SampleSet& samples,
                            const SaturationConfig& config = {}, const ParamMap& params = {});

/// Relative least-squares residual |X - P X| / |X| of X(p) against the span of
/// the report's generators (0 when X(p) = 0).
std::vector<double> contains(const VectorField& X, const DistributionReport& report, const SampleSet& samples,
                             const ParamMap& params = {});

inline bool all_within(std::span<const double> residuals, double tol) {
  for (double r : residuals) {
    if (!(r <= tol)) return false;
  }
  return true;
}

/// Looks for a vertical lift Z^v of a base vector field inside the
/// distribution: at every base point of the fibered sample set, the vertical
/// part of the distribution is intersected across the fiber; the search runs
/// over generators of increasing bracket depth and returns the first
/// non-trivial intersection found at every base point.
std::optional<VerticalLiftWitness> vertical_lift_witness(const DistributionReport& report, const SampleSet& fibered,
                                                         double tol = 1e-7, const ParamMap& params = {});

}  // namespace finmet
