#include "finmet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace finmet {

namespace {

// std::uniform_real_distribution is implementation-defined; reports must be
// reproducible across standard libraries, so map the raw 64-bit draw directly.
double uniform(std::mt19937_64& rng, Interval box) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return box.lo + (box.hi - box.lo) * u;
}

std::vector<double> draw(std::mt19937_64& rng, int dim, Interval box) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& c : v) c = uniform(rng, box);
  return v;
}

std::optional<std::vector<double>> values_at(const Point& p, std::span<const Expression> guards,
                                             const ParamMap& params) {
  try {
    auto v = evaluate_all(guards, p, params);
    if (!std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); })) return std::nullopt;
    return v;
  } catch (const SingularEvaluation&) {
    return std::nullopt;
  }
}

[[noreturn]] void exhausted(int rejections) {
  throw SamplingExhausted("sampling exhausted after " + std::to_string(rejections) +
                          " rejections near singular loci");
}

}  // namespace

int SampleSet::fiber_count() const {
  if (fiber.empty()) return 0;
  return *std::max_element(fiber.begin(), fiber.end()) + 1;
}

bool admissible(const Point& p, std::span<const Expression> guards, const ParamMap& params, double radius) {
  if (std::all_of(p.y.begin(), p.y.end(), [](double v) { return v == 0.0; })) return false;
  const auto centre = values_at(p, guards, params);
  if (!centre) return false;
  if (radius <= 0.0) return true;
  for (int a = 0; a < 2 * p.dim(); ++a) {
    for (double sign : {-1.0, 1.0}) {
      Point q = p;
      auto& v = a < p.dim() ? q.x : q.y;
      v[static_cast<std::size_t>(a % p.dim())] += sign * radius;
      if (std::all_of(q.y.begin(), q.y.end(), [](double c) { return c == 0.0; })) return false;
      const auto near = values_at(q, guards, params);
      if (!near) return false;
      // A pole within the radius shows up as a jump comparable to the value itself.
      for (std::size_t g = 0; g < near->size(); ++g) {
        if (std::fabs((*near)[g] - (*centre)[g]) > 1.0 + std::fabs((*centre)[g])) return false;
      }
    }
  }
  return true;
}

SampleSet draw_samples(int dim, const SamplingConfig& config, std::span<const Expression> guards,
                       const ParamMap& params) {
  SampleSet s;
  s.seed = config.seed;
  s.x_box = config.x;
  s.y_box = config.y;
  s.exclusion_radius = config.exclusion_radius;
  std::mt19937_64 rng(config.seed);
  while (static_cast<int>(s.points.size()) < config.count) {
    std::vector<double> x = draw(rng, dim, config.x);
    std::vector<double> y = draw(rng, dim, config.y);
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
      if (++s.rejections > config.max_rejections) exhausted(s.rejections);
      continue;
    }
    Point p(std::move(x), std::move(y));
    if (!admissible(p, guards, params, config.exclusion_radius)) {
      if (++s.rejections > config.max_rejections) exhausted(s.rejections);
      continue;
    }
    s.points.push_back(std::move(p));
  }
  return s;
}

SampleSet draw_fibered_samples(int dim, const SamplingConfig& config, int bases, int per_fiber,
                               std::span<const Expression> guards, const ParamMap& params) {
  SampleSet s;
  s.seed = config.seed;
  s.x_box = config.x;
  s.y_box = config.y;
  s.exclusion_radius = config.exclusion_radius;
  // separate stream so fibered sets do not replay the independent draws
  std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
  for (int b = 0; b < bases; ++b) {
    const std::vector<double> x = draw(rng, dim, config.x);
    int got = 0;
    while (got < per_fiber) {
      std::vector<double> y = draw(rng, dim, config.y);
      if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
        if (++s.rejections > config.max_rejections) exhausted(s.rejections);
        continue;
      }
      Point p(x, std::move(y));
      if (!admissible(p, guards, params, config.exclusion_radius)) {
        if (++s.rejections > config.max_rejections) exhausted(s.rejections);
        continue;
      }
      s.points.push_back(std::move(p));
      s.fiber.push_back(b);
      ++got;
    }
  }
  return s;
}

}  // namespace finmet
