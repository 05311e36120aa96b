#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "finmet/expr.hpp"

namespace finmet {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct SamplingConfig {
  int count = 20;
  std::uint64_t seed = 42;
  Interval x{-1.0, 1.0};
  Interval y{0.5, 2.0};
  /// Points whose neighbours at this distance (along every coordinate axis)
  /// hit a singularity of a guard expression are rejected.
  double exclusion_radius = 1e-3;
  int max_rejections = 1000;
};

/// Sample points of the slit tangent bundle.  `fiber` is empty for
/// independent draws; for fibered sets it gives the base-point group of each
/// point, and points within a group share x exactly.
struct SampleSet {
  std::vector<Point> points;
  std::vector<int> fiber;
  std::uint64_t seed = 0;
  Interval x_box;
  Interval y_box;
  double exclusion_radius = 0.0;
  int rejections = 0;

  std::size_t size() const { return points.size(); }
  int fiber_count() const;
};

class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True iff every guard evaluates finitely at p and at p +- r e_a for each axis
/// a, without jumping by more than 1 + |g(p)| across those neighbours.
bool admissible(const Point& p, std::span<const Expression> guards, const ParamMap& params, double radius);

/// Uniform draws in the box with rejection near singular loci.
SampleSet draw_samples(int dim, const SamplingConfig& config, std::span<const Expression> guards,
                       const ParamMap& params = {});

/// `bases` base points, each with `per_fiber` fiber points.
SampleSet draw_fibered_samples(int dim, const SamplingConfig& config, int bases, int per_fiber,
                               std::span<const Expression> guards, const ParamMap& params = {});

}  // namespace finmet
