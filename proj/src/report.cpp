#include "finmet/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "finmet/jets.hpp"
#include "finmet/operators.hpp"
#include "finmet/parse.hpp"

namespace finmet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw SpecError("spec: " + msg); }

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end()) {
      fail("unknown key \"" + k + "\" in " + where);
    }
  }
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(what + " must be a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& what) {
  const double d = number(v, what);
  if (!(d > 0.0)) fail(what + " must be positive");
  return d;
}

Interval interval(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2) fail(what + " must be [lo, hi]");
  Interval i{number(v[0], what + "[0]"), number(v[1], what + "[1]")};
  if (!(i.lo < i.hi)) fail(what + " must satisfy lo < hi");
  return i;
}

std::vector<std::string> param_names(const ParamMap& params) {
  std::vector<std::string> names;
  for (const auto& [name, value] : params) names.push_back(name);
  return names;
}

Expression parse_or_fail(const std::string& src, int dim, const ParamMap& params, const std::string& what) {
  try {
    return parse(src, dim, param_names(params));
  } catch (const ParseError& e) {
    fail(what + ": " + e.what());
  }
}

json point_json(const Point& p) { return {{"x", p.x}, {"y", p.y}}; }

json evidence_json(const std::vector<std::pair<std::string, double>>& ev) {
  json out = json::object();
  for (const auto& [k, v] : ev) out[k] = v;
  return out;
}

json verdict_json(const Verdict& v) {
  json fired = json::array();
  for (const auto& f : v.fired) fired.push_back({{"test", f.name}, {"anchor", f.anchor}, {"evidence", evidence_json(f.evidence)}});
  json out{{"question", to_string(v.question)}, {"outcome", to_string(v.outcome)}, {"fired_tests", fired}};
  if (v.spencer) {
    out["spencer"] = {{"k", v.spencer->k}, {"dim_g1", v.spencer->dim_g1}, {"dim_g2", v.spencer->dim_g2}};
    if (!v.spencer->diagnostic.empty()) out["spencer"]["diagnostic"] = v.spencer->diagnostic;
  } else {
    out["spencer"] = nullptr;
  }
  if (!v.jets.empty()) {
    int found = 0;
    double worst_residual = 0.0;
    double least_eig = std::numeric_limits<double>::infinity();
    for (const auto& j : v.jets) {
      found += j.found ? 1 : 0;
      worst_residual = std::max(worst_residual, j.residual);
      least_eig = std::min(least_eig, j.min_eigenvalue);
    }
    out["jets"] = {{"checked", v.jets.size()},
                   {"pd_found", found},
                   {"max_residual", worst_residual},
                   {"min_fiber_eigenvalue", least_eig},
                   {"rows", v.jets.front().rows},
                   {"kernel_dim", v.jets.front().kernel_dim}};
  } else {
    out["jets"] = nullptr;
  }
  out["notes"] = v.notes;
  return out;
}

json witness_json(const std::optional<VerticalLiftWitness>& w) {
  if (!w) return nullptr;
  json dirs = json::array();
  for (std::size_t k = 0; k < w->directions.size(); ++k) {
    dirs.push_back({{"x", w->base_points[k]}, {"direction", w->directions[k]}});
  }
  json out{{"depth", w->depth},
           {"intersection_dim", w->intersection_dim},
           {"normalized_slot", "y" + std::to_string(w->normalized_slot + 1)},
           {"per_base_point", dirs}};
  if (w->field) {
    out["field"] = w->field->to_string();
    out["source"] = w->source;
  } else {
    out["field"] = nullptr;
  }
  return out;
}

json distribution_json(const DistributionReport& r) {
  json gens = json::array();
  for (const auto& g : r.generators) gens.push_back({{"origin", g.origin}, {"depth", g.depth}, {"field", g.field.to_string()}});
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (double c : r.c_membership) {
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  json out{{"generators", gens},
           {"rank_per_sample", r.rank_per_sample},
           {"stable_rank", r.stable_rank ? json(*r.stable_rank) : json(nullptr)},
           {"bracket_depth_used", r.bracket_depth_used},
           {"saturated", r.saturated},
           {"min_rank_history", r.min_rank_history},
           {"max_rank_history", r.max_rank_history},
           {"c_membership", {{"min_residual", r.c_membership.empty() ? json(nullptr) : json(cmin)},
                             {"max_residual", r.c_membership.empty() ? json(nullptr) : json(cmax)}}},
           {"vertical_lift", witness_json(r.vertical_lift)},
           {"warnings", r.warnings}};
  return out;
}

json residual_json(const Residual& r, double tol) {
  json samples = json::array();
  for (const auto& s : r.per_sample) {
    if (s.ok()) {
      samples.push_back({{"max_abs", s.max_abs}, {"relative", s.relative}});
    } else {
      samples.push_back({{"singular", s.singular}});
    }
  }
  return {{"operator", r.op},
          {"components", r.labels},
          {"max_abs", r.max_abs()},
          {"max_relative", r.max_relative()},
          {"singular_samples", r.singular_count()},
          {"within_tolerance", r.within(tol)},
          {"per_sample", samples}};
}

json samples_json(const SampleSet& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(point_json(p));
  return {{"count", s.size()}, {"seed", s.seed}, {"rejections", s.rejections}, {"points", pts}};
}

json header(const SpraySpec& spec, const char* command) {
  return {{"schema_version", kSchemaVersion},
          {"tool", {{"name", "finmet"}, {"version", kVersion}, {"command", command}}},
          {"config_hash", config_hash(spec)},
          {"spec", spec_to_json(spec)}};
}

std::vector<Expression> energy_guards(const Spray& spray, const EnergyCandidate& E) {
  auto g = sampling_guards(spray);
  g.push_back(E.energy());
  for (int i = 0; i < E.dim(); ++i) {
    for (int j = 0; j < E.dim(); ++j) g.push_back(E.dyy(i, j));
  }
  std::erase_if(g, [](const Expression& e) { return e.kind() == NodeKind::constant; });
  return g;
}

}  // namespace

bool operator==(const SpraySpec& a, const SpraySpec& b) {
  auto same_sampling = [](const SamplingConfig& p, const SamplingConfig& q) {
    return p.count == q.count && p.seed == q.seed && p.x.lo == q.x.lo && p.x.hi == q.x.hi && p.y.lo == q.y.lo &&
           p.y.hi == q.y.hi && p.exclusion_radius == q.exclusion_radius && p.max_rejections == q.max_rejections;
  };
  return a.dim == b.dim && a.spray == b.spray && a.params == b.params && same_sampling(a.sampling, b.sampling) &&
         a.tolerances == b.tolerances && a.energy == b.energy;
}

SpraySpec parse_spec(const json& doc) {
  if (!doc.is_object()) fail("document must be an object");
  only_keys(doc, {"dim", "spray", "params", "samples", "tolerances", "energy"}, "spec");
  SpraySpec spec;

  const json* dim = member(doc, "dim");
  if (!dim || !dim->is_number_integer()) fail("\"dim\" must be an integer");
  spec.dim = dim->get<int>();
  if (spec.dim < 2) fail("\"dim\" must be at least 2");

  const json* spray = member(doc, "spray");
  if (!spray || !spray->is_array()) fail("\"spray\" must be an array of strings");
  for (const auto& e : *spray) {
    if (!e.is_string()) fail("\"spray\" entries must be strings");
    spec.spray.push_back(e.get<std::string>());
  }
  if (static_cast<int>(spec.spray.size()) != spec.dim) {
    fail("\"spray\" has " + std::to_string(spec.spray.size()) + " entries, expected " + std::to_string(spec.dim));
  }

  if (const json* params = member(doc, "params")) {
    if (!params->is_object()) fail("\"params\" must be a map of numbers");
    for (const auto& [k, v] : params->items()) spec.params[k] = number(v, "param \"" + k + "\"");
  }

  if (const json* s = member(doc, "samples")) {
    if (!s->is_object()) fail("\"samples\" must be an object");
    only_keys(*s, {"count", "seed", "box", "exclusion_radius", "max_rejections"}, "samples");
    if (const json* c = member(*s, "count")) {
      if (!c->is_number_integer() || c->get<long long>() < 1) fail("samples.count must be a positive integer");
      spec.sampling.count = c->get<int>();
    }
    if (const json* c = member(*s, "seed")) {
      if (!c->is_number_integer() || c->get<long long>() < 0) fail("samples.seed must be a non-negative integer");
      spec.sampling.seed = c->get<std::uint64_t>();
    }
    if (const json* b = member(*s, "box")) {
      if (!b->is_object()) fail("samples.box must be an object");
      only_keys(*b, {"x", "y"}, "samples.box");
      if (const json* x = member(*b, "x")) spec.sampling.x = interval(*x, "samples.box.x");
      if (const json* y = member(*b, "y")) spec.sampling.y = interval(*y, "samples.box.y");
    }
    if (const json* r = member(*s, "exclusion_radius")) {
      spec.sampling.exclusion_radius = number(*r, "samples.exclusion_radius");
      if (spec.sampling.exclusion_radius < 0.0) fail("samples.exclusion_radius must be non-negative");
    }
    if (const json* m = member(*s, "max_rejections")) {
      if (!m->is_number_integer() || m->get<long long>() < 0) fail("samples.max_rejections must be a non-negative integer");
      spec.sampling.max_rejections = m->get<int>();
    }
  }

  if (const json* t = member(doc, "tolerances")) {
    if (!t->is_object()) fail("\"tolerances\" must be an object");
    only_keys(*t, {"rank_rel", "residual", "jet_ridge", "membership"}, "tolerances");
    if (const json* v = member(*t, "rank_rel")) spec.tolerances.rank_rel = positive(*v, "tolerances.rank_rel");
    if (const json* v = member(*t, "residual")) spec.tolerances.residual = positive(*v, "tolerances.residual");
    if (const json* v = member(*t, "jet_ridge")) spec.tolerances.jet_ridge = positive(*v, "tolerances.jet_ridge");
    if (const json* v = member(*t, "membership")) spec.tolerances.membership = positive(*v, "tolerances.membership");
  }

  if (const json* e = member(doc, "energy")) {
    if (!e->is_string()) fail("\"energy\" must be a string");
    spec.energy = e->get<std::string>();
  }

  for (int i = 0; i < spec.dim; ++i) {
    parse_or_fail(spec.spray[static_cast<std::size_t>(i)], spec.dim, spec.params, "spray[" + std::to_string(i) + "]");
  }
  if (spec.energy) parse_or_fail(*spec.energy, spec.dim, spec.params, "energy");
  return spec;
}

SpraySpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed document: ") + e.what());
  }
  return parse_spec(doc);
}

json spec_to_json(const SpraySpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : spec.params) params[k] = v;
  json out{{"dim", spec.dim},
           {"spray", spec.spray},
           {"params", params},
           {"samples",
            {{"count", spec.sampling.count},
             {"seed", spec.sampling.seed},
             {"box", {{"x", {spec.sampling.x.lo, spec.sampling.x.hi}}, {"y", {spec.sampling.y.lo, spec.sampling.y.hi}}}},
             {"exclusion_radius", spec.sampling.exclusion_radius},
             {"max_rejections", spec.sampling.max_rejections}}},
           {"tolerances",
            {{"rank_rel", spec.tolerances.rank_rel},
             {"residual", spec.tolerances.residual},
             {"jet_ridge", spec.tolerances.jet_ridge},
             {"membership", spec.tolerances.membership}}}};
  if (spec.energy) out["energy"] = *spec.energy;
  return out;
}

std::string config_hash(const SpraySpec& spec) {
  const std::string text = spec_to_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Spray build_spray(const SpraySpec& spec) {
  std::vector<Expression> f;
  for (std::size_t i = 0; i < spec.spray.size(); ++i) {
    f.push_back(parse_or_fail(spec.spray[i], spec.dim, spec.params, "spray[" + std::to_string(i) + "]"));
  }
  return Spray(std::move(f), spec.params);
}

AnalysisConfig analysis_config(const SpraySpec& spec) {
  AnalysisConfig cfg;
  cfg.sampling = spec.sampling;
  cfg.saturation.rank_tol = spec.tolerances.rank_rel;
  cfg.membership_tol = spec.tolerances.membership;
  cfg.pd.ridge = spec.tolerances.jet_ridge;
  return cfg;
}

json analyze_report(const SpraySpec& spec) {
  const Spray spray = build_spray(spec);
  const Analysis a = analyze(spray, analysis_config(spec));
  json out = header(spec, "analyze");
  out["samples"] = samples_json(a.samples);
  json singular = json::array();
  for (const auto& s : a.homogeneity.singular) singular.push_back(s);
  out["homogeneity"] = {{"pass", a.homogeneity.pass}, {"max_residual", a.homogeneity.max_residual}, {"singular", singular}};
  out["berwald"] = {{"flat", a.berwald.berwald_flat}, {"max_abs", a.berwald.max_abs}};
  out["holonomy"] = a.holonomy ? distribution_json(*a.holonomy) : json(nullptr);
  out["landsberg"] = a.landsberg ? distribution_json(*a.landsberg) : json(nullptr);
  out["verdicts"] = {{"finsler", verdict_json(a.finsler)}, {"landsberg", verdict_json(a.landsberg_verdict)}};
  if (spec.energy) out["energy"] = energy_report(spec)["residuals"];
  return out;
}

json energy_report(const SpraySpec& spec) {
  if (!spec.energy) fail("check-energy needs an \"energy\" entry");
  const Spray spray = build_spray(spec);
  const EnergyCandidate E(parse_or_fail(*spec.energy, spec.dim, spec.params, "energy"), spec.dim, spec.params);
  const SampleSet samples = draw_samples(spec.dim, spec.sampling, energy_guards(spray, E), spray.params());
  const SprayContext ctx(spray);
  const double tol = spec.tolerances.residual;

  json res;
  res["P_c"] = residual_json(residual_Pc(E, samples.points), tol);
  res["P_e"] = residual_json(residual_Pe(E, ctx, samples.points), tol);
  res["d_h"] = residual_json(residual_dh(E, ctx, samples.points), tol);
  res["d_R"] = residual_json(residual_dR_curvature(E, ctx, samples.points), tol);
  res["d_R_berwald"] = residual_json(residual_dR_berwald(E, ctx, samples.points), tol);
  res["P_g"] = residual_json(residual_Pg(E, ctx, samples.points), tol);
  res["P_g_identity_gap"] = residual_json(check_reduction_identity(E, ctx, samples.points), 1e-8);

  json tensors = json::array();
  bool pd_everywhere = true;
  for (const auto& p : samples.points) {
    try {
      const auto g = fundamental_tensor(E, p);
      pd_everywhere = pd_everywhere && g.positive_definite;
      tensors.push_back({{"min_eigenvalue", g.min_eigenvalue}, {"max_eigenvalue", g.max_eigenvalue},
                         {"positive_definite", g.positive_definite}});
    } catch (const SingularEvaluation& e) {
      pd_everywhere = false;
      tensors.push_back({{"singular", e.what()}});
    }
  }
  json out = header(spec, "check-energy");
  out["samples"] = samples_json(samples);
  out["residuals"] = res;
  out["residuals"]["fundamental_tensor"] = {{"positive_definite_everywhere", pd_everywhere}, {"per_sample", tensors}};
  return out;
}

json distribution_report(const SpraySpec& spec, Question which) {
  const Spray spray = build_spray(spec);
  const AnalysisConfig cfg = analysis_config(spec);
  const auto guards = sampling_guards(spray);
  const SampleSet samples = draw_samples(spec.dim, cfg.sampling, guards, spray.params());
  const SampleSet fibered =
      draw_fibered_samples(spec.dim, cfg.sampling, cfg.witness_bases, cfg.witness_per_fiber, guards, spray.params());
  const auto seeds = which == Question::finsler
                         ? holonomy_seeds(spray)
                         : landsberg_seeds(spray, berwald_curvature(spray, samples.points, cfg.berwald_flat_tol));
  DistributionReport rep = saturate(seeds, samples, cfg.saturation, spray.params());
  rep.vertical_lift = vertical_lift_witness(rep, fibered, cfg.witness_tol, spray.params());
  json out = header(spec, "distribution");
  out["which"] = which == Question::finsler ? "holonomy" : "landsberg";
  out["samples"] = samples_json(samples);
  out["distribution"] = distribution_json(rep);
  return out;
}

json jet_report(const SpraySpec& spec, const Point& point) {
  const Spray spray = build_spray(spec);
  const AnalysisConfig cfg = analysis_config(spec);
  const SampleSet samples = draw_samples(spec.dim, cfg.sampling, sampling_guards(spray), spray.params());
  json out = header(spec, "jet");
  out["point"] = point_json(point);
  json systems = json::object();
  const auto berwald = berwald_curvature(spray, samples.points, cfg.berwald_flat_tol);
  for (const Question q : {Question::finsler, Question::landsberg}) {
    const auto seeds = q == Question::finsler ? holonomy_seeds(spray) : landsberg_seeds(spray, berwald);
    const DistributionReport rep = saturate(seeds, samples, cfg.saturation, spray.params());
    const JetSystem sys = assemble_jet_system(spray, rep, point, cfg.jet);
    const PdResult pd = pd_feasibility(sys, cfg.pd);
    json rows = json::array();
    for (const auto& t : sys.rows) rows.push_back(t.to_string());
    json entry{{"rows", sys.matrix.rows()},
               {"unreduced_rows", sys.unreduced_rows},
               {"generators_used", sys.generators_used},
               {"row_tags", rows},
               {"kernel_dim", pd.kernel_dim},
               {"pd_found", pd.found},
               {"residual", pd.residual},
               {"min_fiber_eigenvalue", pd.min_eigenvalue},
               {"iterations", pd.iterations}};
    if (pd.jet) {
      const Eigen::VectorXd v = pd.jet->flatten();
      entry["jet"] = std::vector<double>(v.data(), v.data() + v.size());
    } else {
      entry["jet"] = nullptr;
      entry["diagnostic"] = pd.diagnostic;
    }
    systems[q == Question::finsler ? "holonomy" : "landsberg"] = entry;
  }
  out["systems"] = systems;
  return out;
}

Point parse_point(const std::string& text, int dim) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) fail("point must look like \"x1,..,xn;y1,..,yn\"");
  auto numbers = [&](std::string_view part) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= part.size()) {
      const auto comma = part.find(',', pos);
      std::string_view tok = part.substr(pos, comma == std::string_view::npos ? part.size() - pos : comma - pos);
      while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
      while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        fail("bad number \"" + std::string(tok) + "\" in point");
      }
      out.push_back(v);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  };
  const std::string_view all(text);
  auto x = numbers(all.substr(0, semi));
  auto y = numbers(all.substr(semi + 1));
  if (static_cast<int>(x.size()) != dim || static_cast<int>(y.size()) != dim) {
    fail("point needs " + std::to_string(dim) + " base and " + std::to_string(dim) + " fiber coordinates");
  }
  try {
    return Point(std::move(x), std::move(y));
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

std::string dump(const json& report) { return report.dump(2) + "\n"; }

}  // namespace finmet
