#pragma once

// Spray input documents and analysis reports (JSON).

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "finmet/sampling.hpp"
#include "finmet/spray.hpp"
#include "finmet/verdict.hpp"

namespace finmet {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double rank_rel = 1e-8;
  double residual = 1e-9;
  double jet_ridge = 1e-6;
  double membership = 1e-6;

  bool operator==(const Tolerances&) const = default;
};

struct SpraySpec {
  int dim = 0;
  std::vector<std::string> spray;
  ParamMap params;
  SamplingConfig sampling;
  Tolerances tolerances;
  std::optional<std::string> energy;
};

bool operator==(const SpraySpec& a, const SpraySpec& b);

/// Validates keys, types and that every expression parses.  Throws SpecError.
SpraySpec parse_spec(const nlohmann::json& doc);
SpraySpec load_spec(const std::filesystem::path& path);
/// Normalized echo with all defaults filled in.
nlohmann::json spec_to_json(const SpraySpec& spec);
/// FNV-1a of the compact echo, as 16 hex digits.
std::string config_hash(const SpraySpec& spec);

Spray build_spray(const SpraySpec& spec);
AnalysisConfig analysis_config(const SpraySpec& spec);

nlohmann::json analyze_report(const SpraySpec& spec);
nlohmann::json energy_report(const SpraySpec& spec);
nlohmann::json distribution_report(const SpraySpec& spec, Question which);
nlohmann::json jet_report(const SpraySpec& spec, const Point& point);

/// "x1,..,xn;y1,..,yn".  Throws SpecError.
Point parse_point(const std::string& text, int dim);

/// Pretty-printed with a trailing newline.
std::string dump(const nlohmann::json& report);

}  // namespace finmet
