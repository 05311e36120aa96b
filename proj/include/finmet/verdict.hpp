#pragma once

// The analysis pipeline: homogeneity, Berwald flatness, the holonomy and
// Landsberg distributions, their obstruction tests, symbol dimensions and the
// jet-level positive-definiteness search, combined into one verdict per
// question.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finmet/distribution.hpp"
#include "finmet/jets.hpp"
#include "finmet/sampling.hpp"
#include "finmet/spray.hpp"

namespace finmet {

enum class Question { finsler, landsberg };
enum class Outcome { obstructed, necessary_conditions_pass, inconclusive };

const char* to_string(Question q);
const char* to_string(Outcome o);

struct FiredTest {
  std::string name;    // e.g. "rank L = 2n"
  std::string anchor;  // the statement the test applies
  std::vector<std::pair<std::string, double>> evidence;
};

struct SpencerDims {
  int k = 0;
  int dim_g1 = 0;
  int dim_g2 = 0;
  std::string diagnostic;  // set when k lies outside [1, n]
};

/// (k - 1, k (k - 1) / 2).
std::pair<int, int> spencer_dims(int k);
SpencerDims spencer_dims(int k, int n);

struct JetCheck {
  Point point;
  bool found = false;
  double residual = 0.0;
  double min_eigenvalue = 0.0;
  int rows = 0;
  int kernel_dim = 0;
  int iterations = 0;
};

struct Verdict {
  Question question = Question::finsler;
  Outcome outcome = Outcome::inconclusive;
  std::vector<FiredTest> fired;
  std::optional<SpencerDims> spencer;
  std::vector<JetCheck> jets;
  std::vector<std::string> notes;
};

struct AnalysisConfig {
  SamplingConfig sampling;
  SaturationConfig saturation;
  /// C counts as a member where its relative residual is at most this.
  double membership_tol = 1e-6;
  /// Share of samples at which a pointwise obstruction must hold to fire.
  double obstruction_share = 0.95;
  double homogeneity_tol = 1e-9;
  double berwald_flat_tol = 1e-10;
  double witness_tol = 1e-7;
  int witness_bases = 4;
  int witness_per_fiber = 4;
  JetConfig jet;
  PdConfig pd;
};

struct Analysis {
  SampleSet samples;
  SampleSet fibered;
  HomogeneityReport homogeneity;
  BerwaldCurvature berwald;
  std::optional<DistributionReport> holonomy;
  std::optional<DistributionReport> landsberg;
  Verdict finsler;
  Verdict landsberg_verdict;
};

/// Runs the full pipeline.  Throws SamplingExhausted when no admissible
/// samples can be drawn; every other failure becomes an inconclusive verdict
/// with a note.
Analysis analyze(const Spray& spray, const AnalysisConfig& config = {});

/// Guards used to keep samples away from singular loci.
std::vector<Expression> sampling_guards(const Spray& spray);

}  // namespace finmet
