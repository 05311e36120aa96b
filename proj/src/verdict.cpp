#include "finmet/verdict.hpp"

#include <algorithm>
#include <cmath>

namespace finmet {

namespace {

struct DistributionTests {
  std::vector<FiredTest> fired;
  bool c_absent_everywhere = false;  // C residual above tolerance at every sample
  bool constant_rank = false;
};

double share(const std::vector<int>& ranks, int value) {
  if (ranks.empty()) return 0.0;
  const auto hits = std::count(ranks.begin(), ranks.end(), value);
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

DistributionTests run_tests(const DistributionReport& rep, const AnalysisConfig& cfg, const std::string& label) {
  DistributionTests t;
  const int full = 2 * rep.dim;
  t.constant_rank = rep.stable_rank.has_value();

  const auto& cm = rep.c_membership;
  const auto members = std::count_if(cm.begin(), cm.end(), [&](double r) { return r <= cfg.membership_tol; });
  const double c_share = cm.empty() ? 0.0 : static_cast<double>(members) / static_cast<double>(cm.size());
  t.c_absent_everywhere = members == 0 && !cm.empty();
  if (!cm.empty() && c_share >= cfg.obstruction_share) {
    t.fired.push_back({"C in " + label,
                       "if the Liouville field lies in the distribution, every solution has dE = 0",
                       {{"max_residual", *std::max_element(cm.begin(), cm.end())},
                        {"sample_share", c_share},
                        {"tolerance", cfg.membership_tol}}});
  }

  const double full_share = share(rep.rank_per_sample, full);
  if (full_share >= cfg.obstruction_share) {
    t.fired.push_back({"rank " + label + " = 2n",
                       "if the distribution has rank 2n, only constants are annihilated by it",
                       {{"rank", static_cast<double>(full)},
                        {"sample_share", full_share},
                        {"bracket_depth", static_cast<double>(rep.bracket_depth_used)}}});
  }

  if (rep.vertical_lift) {
    const auto& w = *rep.vertical_lift;
    std::vector<std::pair<std::string, double>> ev{{"depth", static_cast<double>(w.depth)},
                                                   {"intersection_dim", static_cast<double>(w.intersection_dim)},
                                                   {"base_points", static_cast<double>(w.base_points.size())}};
    if (!w.directions.empty()) {
      for (std::size_t k = 0; k < w.directions.front().size(); ++k) {
        ev.emplace_back("direction_y" + std::to_string(k + 1), w.directions.front()[k]);
      }
    }
    t.fired.push_back({"vertical lift in " + label,
                       "a vertical lift of a non-zero vector field in the distribution makes g_E degenerate",
                       std::move(ev)});
  }
  return t;
}

Verdict decide(Question q, const Spray& spray, const DistributionReport& rep, const SampleSet& samples,
               const AnalysisConfig& cfg, const std::string& label) {
  Verdict v;
  v.question = q;
  const int n = spray.dim();
  auto tests = run_tests(rep, cfg, label);
  v.fired = std::move(tests.fired);
  for (const auto& w : rep.warnings) v.notes.push_back(label + ": " + w);

  if (rep.stable_rank) v.spencer = spencer_dims(2 * n - *rep.stable_rank, n);

  if (!v.fired.empty()) {
    v.outcome = Outcome::obstructed;
    return v;
  }
  if (!tests.constant_rank) {
    v.outcome = Outcome::inconclusive;
    v.notes.push_back("rank of " + label + " varies across samples");
    return v;
  }
  if (!rep.saturated) {
    v.outcome = Outcome::inconclusive;
    v.notes.push_back(label + " not saturated within the bracket depth limit");
    return v;
  }
  if (!tests.c_absent_everywhere) {
    v.outcome = Outcome::inconclusive;
    v.notes.push_back("Liouville field within tolerance of " + label + " at some samples");
    return v;
  }

  int found = 0;
  for (const auto& p : samples.points) {
    const auto sys = assemble_jet_system(spray, rep, p, cfg.jet);
    const auto pd = pd_feasibility(sys, cfg.pd);
    JetCheck jc;
    jc.point = p;
    jc.found = pd.found;
    jc.residual = pd.residual;
    jc.min_eigenvalue = pd.min_eigenvalue;
    jc.rows = static_cast<int>(sys.matrix.rows());
    jc.kernel_dim = pd.kernel_dim;
    jc.iterations = pd.iterations;
    v.jets.push_back(std::move(jc));
    if (pd.found) ++found;
  }
  if (found == static_cast<int>(samples.size()) && found > 0) {
    v.outcome = Outcome::necessary_conditions_pass;
    v.notes.push_back("positive definite 2-jet found at every sample; existence near each point is not certified");
  } else {
    v.outcome = Outcome::inconclusive;
    v.notes.push_back("no PD datum found (search incomplete) at " + std::to_string(samples.size() - static_cast<std::size_t>(found)) +
                      " of " + std::to_string(samples.size()) + " samples");
  }
  return v;
}

Verdict inconclusive(Question q, std::string note) {
  Verdict v;
  v.question = q;
  v.outcome = Outcome::inconclusive;
  v.notes.push_back(std::move(note));
  return v;
}

}  // namespace

const char* to_string(Question q) { return q == Question::finsler ? "finsler" : "landsberg"; }

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::obstructed: return "obstructed";
    case Outcome::necessary_conditions_pass: return "necessary-conditions-pass";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

std::pair<int, int> spencer_dims(int k) { return {k - 1, k * (k - 1) / 2}; }

SpencerDims spencer_dims(int k, int n) {
  SpencerDims d;
  d.k = k;
  std::tie(d.dim_g1, d.dim_g2) = spencer_dims(k);
  if (k < 1 || k > n) {
    d.diagnostic = "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]";
  }
  return d;
}

std::vector<Expression> sampling_guards(const Spray& spray) {
  std::vector<Expression> g = spray.coefficients();
  const auto conn = connection(spray);
  g.insert(g.end(), conn.gamma.begin(), conn.gamma.end());
  g.insert(g.end(), conn.gamma_deriv.begin(), conn.gamma_deriv.end());
  const auto b = berwald_curvature(spray, {});
  g.insert(g.end(), b.components.begin(), b.components.end());
  std::erase_if(g, [](const Expression& e) { return e.kind() == NodeKind::constant; });
  return g;
}

Analysis analyze(const Spray& spray, const AnalysisConfig& config) {
  Analysis a;
  const int n = spray.dim();
  const auto guards = sampling_guards(spray);
  a.samples = draw_samples(n, config.sampling, guards, spray.params());
  a.fibered = draw_fibered_samples(n, config.sampling, config.witness_bases, config.witness_per_fiber, guards,
                                   spray.params());

  a.homogeneity = validate_homogeneity(spray, a.samples.points, config.homogeneity_tol);
  if (!a.homogeneity.pass) {
    const std::string note = "spray is not positively homogeneous of degree 2 (max residual " +
                             std::to_string(a.homogeneity.max_residual) + ")";
    a.finsler = inconclusive(Question::finsler, note);
    a.landsberg_verdict = inconclusive(Question::landsberg, note);
    return a;
  }

  a.berwald = berwald_curvature(spray, a.samples.points, config.berwald_flat_tol);

  try {
    a.holonomy = saturate(holonomy_seeds(spray), a.samples, config.saturation, spray.params());
    a.holonomy->vertical_lift = vertical_lift_witness(*a.holonomy, a.fibered, config.witness_tol, spray.params());
    a.finsler = decide(Question::finsler, spray, *a.holonomy, a.samples, config, "H");
  } catch (const SingularEvaluation& e) {
    a.finsler = inconclusive(Question::finsler, std::string("singular evaluation in holonomy stage: ") + e.what());
  }

  if (a.berwald.berwald_flat) {
    a.landsberg_verdict = a.finsler;
    a.landsberg_verdict.question = Question::landsberg;
    a.landsberg_verdict.notes.push_back("Berwald curvature vanishes: the Landsberg question coincides with the Finsler one");
    return a;
  }

  try {
    a.landsberg = saturate(landsberg_seeds(spray, a.berwald), a.samples, config.saturation, spray.params());
    a.landsberg->vertical_lift = vertical_lift_witness(*a.landsberg, a.fibered, config.witness_tol, spray.params());
    a.landsberg_verdict = decide(Question::landsberg, spray, *a.landsberg, a.samples, config, "L");
  } catch (const SingularEvaluation& e) {
    a.landsberg_verdict =
        inconclusive(Question::landsberg, std::string("singular evaluation in Landsberg stage: ") + e.what());
  }
  // Landsberg metrics are Finsler metrics.
  if (a.finsler.outcome == Outcome::obstructed && a.landsberg_verdict.outcome != Outcome::obstructed) {
    a.landsberg_verdict.notes.push_back("Finsler question obstructed, which also excludes Landsberg metrics");
    a.landsberg_verdict.outcome = Outcome::obstructed;
    for (const auto& f : a.finsler.fired) a.landsberg_verdict.fired.push_back(f);
  }
  return a;
}

}  // namespace finmet
