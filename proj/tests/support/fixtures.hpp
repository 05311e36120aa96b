#pragma once

// Spray fixtures shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "finmet/sampling.hpp"
#include "finmet/spray.hpp"

namespace finmet::testing {

inline Spray flat_spray(int dim = 2) { return Spray::parse(dim, std::vector<std::string>(dim, "0")); }

/// x1'' = x1'^2 p(x2'/x1'), x2'' = x1' x2' p(x2'/x1') with p(t) = a sqrt(t^2 + b t + c).
inline Spray radical_profile_spray(double a, double b, double c) {
  const std::string profile = "a*sqrt((y2/y1)^2 + b*(y2/y1) + c)";
  return Spray::parse(2, {"y1^2*" + profile, "y1*y2*" + profile}, {{"a", a}, {"b", b}, {"c", c}});
}

/// x1'' = a x1'^(2-t) x2'^t, x2'' = b x1'^(2-s) x2'^s.
inline Spray monomial_spray(int t, int s, double a = 1.0, double b = 1.0) {
  auto mono = [](int k) {
    return "y1^(" + std::to_string(2 - k) + ")*y2^(" + std::to_string(k) + ")";
  };
  return Spray::parse(2, {"a*" + mono(t), "b*" + mono(s)}, {{"a", a}, {"b", b}});
}

/// x^i'' = lambda_i(x) f(x, x') with lambda = (1, x1), f = y1 sqrt(y1^2 + y2^2).
inline Spray lifted_direction_spray() {
  return Spray::parse(2, {"y1*sqrt(y1^2 + y2^2)", "x1*y1*sqrt(y1^2 + y2^2)"});
}

/// Geodesic spray of the conformally flat metric exp(2 x1) (dx1^2 + dx2^2);
/// coefficients frozen from the Christoffel symbols gamma^1_11 = 1,
/// gamma^1_22 = -1, gamma^2_12 = gamma^2_21 = 1.
inline Spray conformal_exp_spray() { return Spray::parse(2, {"y2^2 - y1^2", "-2*y1*y2"}); }
inline const char* conformal_exp_energy() { return "0.5*exp(2*x1)*(y1^2 + y2^2)"; }

inline SamplingConfig default_sampling() { return SamplingConfig{}; }

}  // namespace finmet::testing
