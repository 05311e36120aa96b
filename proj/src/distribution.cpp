#include "finmet/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "finmet/spray.hpp"

namespace finmet {

namespace {

Eigen::MatrixXd columns_at(std::span<const Generator> gens, const std::vector<std::size_t>& which, int dim,
                           const Point& p, const ParamMap& params) {
  Eigen::MatrixXd m(2 * dim, static_cast<Eigen::Index>(which.size()));
  for (std::size_t c = 0; c < which.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = gens[which[c]].field.evaluate(p, params);
  return m;
}

Eigen::MatrixXd columns_at(std::span<const Generator> gens, int dim, const Point& p, const ParamMap& params) {
  std::vector<std::size_t> all(gens.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return columns_at(gens, all, dim, p, params);
}

Eigen::MatrixXd append_column(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  Eigen::MatrixXd out(m.rows(), m.cols() + 1);
  out.leftCols(m.cols()) = m;
  out.col(m.cols()) = v;
  return out;
}

/// Orthonormal basis of the column space, singular values cut at `abs_tol`.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& m, double abs_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > abs_tol) ++r;
  return svd.matrixU().leftCols(r);
}

bool full_everywhere(const std::vector<int>& ranks, int full) {
  return std::all_of(ranks.begin(), ranks.end(), [full](int r) { return r == full; });
}

}  // namespace

int numeric_rank(const Eigen::MatrixXd& columns, double rel_tol) {
  if (columns.cols() == 0 || columns.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

int numeric_rank(std::span<const VectorField> fields, const Point& p, double rel_tol, const ParamMap& params) {
  if (fields.empty()) return 0;
  Eigen::MatrixXd m(2 * fields.front().dim(), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t c = 0; c < fields.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = fields[c].evaluate(p, params);
  return numeric_rank(m, rel_tol);
}

std::vector<Generator> holonomy_seeds(const Spray& spray) {
  std::vector<Generator> out;
  const auto frame = horizontal_frame(spray);
  for (std::size_t i = 0; i < frame.size(); ++i) out.push_back({frame[i], 0, "h" + std::to_string(i + 1)});
  return out;
}

std::vector<Generator> landsberg_seeds(const Spray& spray, const BerwaldCurvature& berwald) {
  auto out = holonomy_seeds(spray);
  const auto fields = berwald.image_fields();
  const auto idx = berwald.image_indices();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k].is_zero()) continue;
    out.push_back({fields[k], 0,
                   "B(" + std::to_string(idx[k][0] + 1) + "," + std::to_string(idx[k][1] + 1) + "," +
                       std::to_string(idx[k][2] + 1) + ")"});
  }
  return out;
}

std::vector<VectorField> DistributionReport::fields() const {
  std::vector<VectorField> out;
  out.reserve(generators.size());
  for (const auto& g : generators) out.push_back(g.field);
  return out;
}

DistributionReport saturate(std::span<const Generator> seeds, const SampleSet& samples, const SaturationConfig& config,
                            const ParamMap& params) {
  if (seeds.empty()) throw std::invalid_argument("saturate: no seed generators");
  DistributionReport rep;
  rep.dim = seeds.front().field.dim();
  rep.config = config;
  const int n = rep.dim;
  const int full = 2 * n;
  rep.generators.assign(seeds.begin(), seeds.end());

  const std::size_t ns = samples.size();
  std::vector<Eigen::MatrixXd> cols(ns);
  rep.rank_per_sample.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    cols[s] = columns_at(rep.generators, n, samples.points[s], params);
    rep.rank_per_sample[s] = numeric_rank(cols[s], config.rank_tol);
  }
  auto record_history = [&] {
    const auto [lo, hi] = std::minmax_element(rep.rank_per_sample.begin(), rep.rank_per_sample.end());
    rep.min_rank_history.push_back(ns ? *lo : 0);
    rep.max_rank_history.push_back(ns ? *hi : 0);
  };
  record_history();

  // Evaluates a candidate bracket; returns false (with a warning) if singular.
  auto evaluate_candidate = [&](const VectorField& z, const std::string& origin, std::vector<Eigen::VectorXd>& out) {
    out.resize(ns);
    try {
      for (std::size_t s = 0; s < ns; ++s) out[s] = z.evaluate(samples.points[s], params);
    } catch (const SingularEvaluation& err) {
      rep.warnings.push_back("bracket " + origin + " skipped: " + err.what());
      return false;
    }
    return true;
  };
  auto raises_rank = [&](const std::vector<Eigen::VectorXd>& values) {
    for (std::size_t s = 0; s < ns; ++s) {
      if (rep.rank_per_sample[s] == full) continue;
      if (numeric_rank(append_column(cols[s], values[s]), config.rank_tol) > rep.rank_per_sample[s]) return true;
    }
    return false;
  };

  bool added_last = false;
  int round = 0;
  for (round = 1; round <= config.max_depth; ++round) {
    if (full_everywhere(rep.rank_per_sample, full)) break;
    const std::size_t existing = rep.generators.size();
    added_last = false;
    for (std::size_t i = 0; i < existing && !full_everywhere(rep.rank_per_sample, full); ++i) {
      for (std::size_t j = i + 1; j < existing; ++j) {
        const Generator& gi = rep.generators[i];
        const Generator& gj = rep.generators[j];
        if (gi.depth < round - 1 && gj.depth < round - 1) continue;
        VectorField z = lie_bracket(gi.field, gj.field);
        if (z.is_zero()) continue;
        std::string origin = "[" + gi.origin + "," + gj.origin + "]";
        std::vector<Eigen::VectorXd> values;
        if (!evaluate_candidate(z, origin, values)) continue;
        if (!raises_rank(values)) continue;
        for (std::size_t s = 0; s < ns; ++s) {
          cols[s] = append_column(cols[s], values[s]);
          rep.rank_per_sample[s] = numeric_rank(cols[s], config.rank_tol);
        }
        rep.generators.push_back({std::move(z), round, std::move(origin)});
        added_last = true;
        if (full_everywhere(rep.rank_per_sample, full)) break;
      }
    }
    record_history();
    if (!added_last) break;
    rep.bracket_depth_used = round;
  }

  if (full_everywhere(rep.rank_per_sample, full) || !added_last) {
    rep.saturated = true;
  } else {
    // Depth cap reached while still growing: check whether the last
    // generation's brackets stay inside the span.
    bool grows = false;
    const std::size_t existing = rep.generators.size();
    for (std::size_t i = 0; i < existing && !grows; ++i) {
      for (std::size_t j = i + 1; j < existing && !grows; ++j) {
        if (rep.generators[i].depth < config.max_depth && rep.generators[j].depth < config.max_depth) continue;
        VectorField z = lie_bracket(rep.generators[i].field, rep.generators[j].field);
        if (z.is_zero()) continue;
        std::vector<Eigen::VectorXd> values;
        if (!evaluate_candidate(z, "[" + rep.generators[i].origin + "," + rep.generators[j].origin + "]", values)) continue;
        grows = raises_rank(values);
      }
    }
    rep.saturated = !grows;
    if (grows) {
      rep.warnings.push_back("bracket depth " + std::to_string(config.max_depth) +
                             " exhausted before saturation; distribution may be larger");
    }
  }

  if (!rep.rank_per_sample.empty() &&
      std::all_of(rep.rank_per_sample.begin(), rep.rank_per_sample.end(),
                  [&](int r) { return r == rep.rank_per_sample.front(); })) {
    rep.stable_rank = rep.rank_per_sample.front();
  }
  rep.c_membership = contains(liouville_field(n), rep, samples, params);
  return rep;
}

std::vector<double> contains(const VectorField& X, const DistributionReport& report, const SampleSet& samples,
                             const ParamMap& params) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& p : samples.points) {
    const Eigen::VectorXd x = X.evaluate(p, params);
    const double xn = x.norm();
    if (xn == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const Eigen::MatrixXd m = columns_at(report.generators, report.dim, p, params);
    double smax = 0.0;
    if (m.cols() > 0) smax = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    const Eigen::MatrixXd u = range_basis(m, report.config.rank_tol * smax);
    const Eigen::VectorXd r = x - u * (u.transpose() * x);
    out.push_back(r.norm() / xn);
  }
  return out;
}

std::optional<VerticalLiftWitness> vertical_lift_witness(const DistributionReport& report, const SampleSet& fibered,
                                                         double tol, const ParamMap& params) {
  const int n = report.dim;
  if (report.generators.empty() || fibered.points.empty()) return std::nullopt;

  // Group points by base point.
  std::map<int, std::vector<std::size_t>> groups;
  if (!fibered.fiber.empty()) {
    for (std::size_t i = 0; i < fibered.size(); ++i) groups[fibered.fiber[i]].push_back(i);
  } else {
    std::map<std::vector<double>, int> ids;
    for (std::size_t i = 0; i < fibered.size(); ++i) {
      auto [it, inserted] = ids.try_emplace(fibered.points[i].x, static_cast<int>(ids.size()));
      groups[it->second].push_back(i);
    }
  }

  int max_depth = 0;
  for (const auto& g : report.generators) max_depth = std::max(max_depth, g.depth);

  for (int d = 0; d <= max_depth; ++d) {
    std::vector<std::size_t> which;
    bool has_new = d == 0;
    for (std::size_t i = 0; i < report.generators.size(); ++i) {
      if (report.generators[i].depth <= d) which.push_back(i);
      if (report.generators[i].depth == d) has_new = true;
    }
    if (!has_new) continue;

    VerticalLiftWitness w;
    w.depth = d;
    w.intersection_dim = n;
    bool found_everywhere = true;
    for (const auto& [gid, members] : groups) {
      Eigen::MatrixXd complement = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t idx : members) {
        const Eigen::MatrixXd m = columns_at(report.generators, which, n, fibered.points[idx], params);
        Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(m);
        const double scale = full_svd.singularValues().size() ? full_svd.singularValues()(0) : 0.0;
        const double cut = report.config.rank_tol * scale;
        // vertical part of the span: combinations with vanishing base part
        Eigen::JacobiSVD<Eigen::MatrixXd> base_svd(m.topRows(n), Eigen::ComputeFullV);
        Eigen::Index rx = 0;
        while (rx < base_svd.singularValues().size() && base_svd.singularValues()(rx) > cut) ++rx;
        const Eigen::MatrixXd kernel = base_svd.matrixV().rightCols(m.cols() - rx);
        const Eigen::MatrixXd u = range_basis(m.bottomRows(n) * kernel, cut);
        complement += Eigen::MatrixXd::Identity(n, n) - u * u.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(complement);
      int dim_here = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (eig.eigenvalues()(k) <= tol) ++dim_here;
      }
      if (dim_here == 0) {
        found_everywhere = false;
        break;
      }
      w.intersection_dim = std::min(w.intersection_dim, dim_here);
      const Eigen::VectorXd dir = eig.eigenvectors().col(0);
      w.base_points.push_back(fibered.points[members.front()].x);
      w.directions.emplace_back(dir.data(), dir.data() + n);
    }
    if (!found_everywhere) continue;

    // Normalize on the dominant slot of the first base point.
    const auto& d0 = w.directions.front();
    w.normalized_slot = static_cast<int>(std::distance(
        d0.begin(), std::max_element(d0.begin(), d0.end(), [](double a, double b) { return std::fabs(a) < std::fabs(b); })));
    for (auto& dir : w.directions) {
      const double pivot = dir[static_cast<std::size_t>(w.normalized_slot)];
      if (std::fabs(pivot) > 1e-12) {
        for (double& c : dir) c /= pivot;
      }
    }

    if (w.intersection_dim == 1) {
      const int slot = w.normalized_slot;
      for (std::size_t gi : which) {
        const Generator& g = report.generators[gi];
        if (!g.field.is_vertical() || g.field.y(slot).is_zero()) continue;
        const VectorField z = g.field.scaled(pow(g.field.y(slot), -1));
        bool ok = true;
        std::size_t group_index = 0;
        for (const auto& [gid, members] : groups) {
          const auto& dir = w.directions[group_index++];
          for (std::size_t idx : members) {
            try {
              const Eigen::VectorXd v = z.evaluate(fibered.points[idx], params);
              for (int k = 0; k < n; ++k) {
                if (std::fabs(v(n + k) - dir[static_cast<std::size_t>(k)]) > 1e-6 * (1.0 + std::fabs(dir[static_cast<std::size_t>(k)]))) ok = false;
              }
            } catch (const SingularEvaluation&) {
              ok = false;
            }
            if (!ok) break;
          }
          if (!ok) break;
        }
        if (ok) {
          w.field = z;
          w.source = g.origin;
          break;
        }
      }
    }
    return w;
  }
  return std::nullopt;
}

}  // namespace finmet
