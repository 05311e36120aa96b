#include "finmet/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "finmet/parse.hpp"
#include "parallel.hpp"

namespace finmet {

namespace {

std::string label(std::initializer_list<int> idx) {
  std::string s;
  for (int i : idx) s += (s.empty() ? "" : ",") + std::to_string(i + 1);
  return s;
}

std::vector<std::string> labels_n(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(label({i}));
  return out;
}

std::vector<std::string> labels_n3(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) out.push_back(label({i, j, k}));
    }
  }
  return out;
}

/// Values of E, its first derivatives and whichever tables an operator needs
/// at one point.
struct Local {
  int n = 0;
  double e = 0.0;
  std::vector<double> dx, dy, dyy, dxy, dyyy, dxyy;

  double at2(const std::vector<double>& t, int i, int j) const { return t[static_cast<std::size_t>(i * n + j)]; }
  double at3(const std::vector<double>& t, int i, int j, int k) const {
    return t[static_cast<std::size_t>((i * n + j) * n + k)];
  }
};

enum Need : unsigned { first = 1, second = 2, third = 4 };

Local load(const EnergyCandidate& E, const Point& p, unsigned need) {
  const int n = E.dim();
  Local l;
  l.n = n;
  l.e = evaluate(E.energy(), p);
  std::vector<Expression> exprs;
  for (int i = 0; i < n; ++i) exprs.push_back(E.dx(i));
  for (int i = 0; i < n; ++i) exprs.push_back(E.dy(i));
  if (need & second) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) exprs.push_back(E.dyy(i, j));
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) exprs.push_back(E.dxy(i, j));
    }
  }
  if (need & third) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) exprs.push_back(E.dyyy(i, j, k));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) exprs.push_back(E.dxyy(i, j, k));
      }
    }
  }
  const auto v = evaluate_all(exprs, p);
  auto take = [&, pos = std::size_t{0}](std::size_t count) mutable {
    std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(pos),
                            v.begin() + static_cast<std::ptrdiff_t>(pos + count));
    pos += count;
    return out;
  };
  const auto un = static_cast<std::size_t>(n);
  l.dx = take(un);
  l.dy = take(un);
  if (need & second) {
    l.dyy = take(un * un);
    l.dxy = take(un * un);
  }
  if (need & third) {
    l.dyyy = take(un * un * un);
    l.dxyy = take(un * un * un);
  }
  return l;
}

double scale_of(const Local& l) {
  double g = 0.0;
  for (double v : l.dx) g += v * v;
  for (double v : l.dy) g += v * v;
  return 1.0 + std::fabs(l.e) + std::sqrt(g);
}

Residual run(std::string op, std::vector<std::string> labels, const EnergyCandidate& E,
             std::span<const Point> samples, unsigned need,
             const std::function<std::vector<double>(const Local&, const Point&)>& compute) {
  Residual r;
  r.op = std::move(op);
  r.labels = std::move(labels);
  r.per_sample.resize(samples.size());
  detail::parallel_for(samples.size(), [&](std::size_t s) {
    SampleResidual& out = r.per_sample[s];
    try {
      const Local l = load(E, samples[s], need);
      out.components = compute(l, samples[s]);
      for (double c : out.components) out.max_abs = std::max(out.max_abs, std::fabs(c));
      if (std::any_of(out.components.begin(), out.components.end(), [](double c) { return !std::isfinite(c); })) {
        out.components.clear();
        out.singular = "non-finite residual at " + samples[s].to_string();
        return;
      }
      out.relative = out.max_abs / scale_of(l);
    } catch (const SingularEvaluation& err) {
      out.components.clear();
      out.max_abs = 0.0;
      out.singular = err.what();
    }
  });
  return r;
}

Expression dvar(const Expression& e, CoordKind kind, int i) { return differentiate(e, {kind, i + 1}); }

}  // namespace

EnergyCandidate::EnergyCandidate(Expression energy, int dim, const ParamMap& params, std::string domain_note)
    : dim_(dim), e_(substitute(energy, params)), note_(std::move(domain_note)) {
  if (dim < 1) throw std::invalid_argument("energy: dimension must be positive");
  const auto un = static_cast<std::size_t>(dim);
  dx_.resize(un);
  dy_.resize(un);
  dyy_.resize(un * un);
  dxy_.resize(un * un);
  dyyy_.resize(un * un * un);
  dxyy_.resize(un * un * un);
  for (int i = 0; i < dim; ++i) {
    dx_[idx(i)] = dvar(e_, CoordKind::base, i);
    dy_[idx(i)] = dvar(e_, CoordKind::fiber, i);
  }
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      dyy_[idx(i, j)] = dvar(dy_[idx(i)], CoordKind::fiber, j);
      dxy_[idx(i, j)] = dvar(dx_[idx(i)], CoordKind::fiber, j);
      for (int k = 0; k < dim; ++k) {
        dyyy_[idx(i, j, k)] = dvar(dyy_[idx(i, j)], CoordKind::fiber, k);
        dxyy_[idx(i, j, k)] = dvar(dxy_[idx(i, j)], CoordKind::fiber, k);
      }
    }
  }
}

EnergyCandidate EnergyCandidate::parse(std::string_view source, int dim, const ParamMap& params,
                                       std::string domain_note) {
  std::vector<std::string> names;
  for (const auto& [name, value] : params) names.push_back(name);
  return EnergyCandidate(finmet::parse(source, dim, names), dim, params, std::move(domain_note));
}

SprayContext::SprayContext(Spray s)
    : spray(std::move(s)),
      connection(finmet::connection(spray)),
      frame(horizontal_frame(connection)),
      curvature(curvature_vectors(spray)),
      berwald(berwald_curvature(spray, {})) {}

double Residual::max_abs() const {
  double m = 0.0;
  for (const auto& s : per_sample) m = std::max(m, s.max_abs);
  return m;
}

double Residual::max_relative() const {
  double m = 0.0;
  for (const auto& s : per_sample) m = std::max(m, s.relative);
  return m;
}

int Residual::singular_count() const {
  return static_cast<int>(std::count_if(per_sample.begin(), per_sample.end(), [](const auto& s) { return !s.ok(); }));
}

bool Residual::within(double rel_tol) const {
  if (per_sample.empty()) return false;
  return std::all_of(per_sample.begin(), per_sample.end(),
                     [rel_tol](const SampleResidual& s) { return s.ok() && s.relative <= rel_tol; });
}

Residual residual_Pc(const EnergyCandidate& E, std::span<const Point> samples) {
  return run("P_c", {"c"}, E, samples, 0, [](const Local& l, const Point& p) {
    double v = -2.0 * l.e;
    for (int i = 0; i < l.n; ++i) v += p.y[static_cast<std::size_t>(i)] * l.dy[static_cast<std::size_t>(i)];
    return std::vector<double>{v};
  });
}

Residual residual_Pe(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  const int n = E.dim();
  return run("P_e", labels_n(n), E, samples, second, [&](const Local& l, const Point& p) {
    const auto f = evaluate_all(ctx.spray.coefficients(), p, ctx.spray.params());
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double v = -l.dx[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) {
        v += p.y[static_cast<std::size_t>(j)] * l.at2(l.dxy, j, i) + f[static_cast<std::size_t>(j)] * l.at2(l.dyy, j, i);
      }
      w[static_cast<std::size_t>(i)] = v;
    }
    return w;
  });
}

Residual residual_dh(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  const int n = E.dim();
  return run("d_h", labels_n(n), E, samples, 0, [&](const Local& l, const Point& p) {
    const auto gamma = evaluate_all(ctx.connection.gamma, p, ctx.spray.params());
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double v = l.dx[static_cast<std::size_t>(i)];
      for (int a = 0; a < n; ++a) v -= gamma[static_cast<std::size_t>(a * n + i)] * l.dy[static_cast<std::size_t>(a)];
      out[static_cast<std::size_t>(i)] = v;
    }
    return out;
  });
}

Residual residual_dR_curvature(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  const int n = E.dim();
  std::vector<std::string> labels;
  for (const auto& cv : ctx.curvature) labels.push_back(label({cv.i, cv.j}));
  return run("d_R", std::move(labels), E, samples, 0, [&](const Local& l, const Point& p) {
    std::vector<double> out;
    for (const auto& cv : ctx.curvature) {
      const Eigen::VectorXd z = cv.field.evaluate(p, ctx.spray.params());
      double v = 0.0;
      for (int a = 0; a < n; ++a) {
        v += z(a) * l.dx[static_cast<std::size_t>(a)] + z(n + a) * l.dy[static_cast<std::size_t>(a)];
      }
      out.push_back(v);
    }
    return out;
  });
}

Residual residual_dR_berwald(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  const int n = E.dim();
  return run("d_R(Berwald)", labels_n3(n), E, samples, 0, [&](const Local& l, const Point& p) {
    const auto b = evaluate_all(ctx.berwald.components, p, ctx.spray.params());
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          double v = 0.0;
          for (int m = 0; m < n; ++m) {
            v += b[static_cast<std::size_t>(((m * n + i) * n + j) * n + k)] * l.dy[static_cast<std::size_t>(m)];
          }
          out.push_back(v);
        }
      }
    }
    return out;
  });
}

namespace {

std::vector<double> pg_values(const Local& l, const SprayContext& ctx, const Point& p) {
  const int n = l.n;
  const auto gamma = evaluate_all(ctx.connection.gamma, p, ctx.spray.params());
  const auto dgamma = evaluate_all(ctx.connection.gamma_deriv, p, ctx.spray.params());
  auto G = [&](int a, int b) { return gamma[static_cast<std::size_t>(a * n + b)]; };
  auto dG = [&](int a, int b, int c) { return dgamma[static_cast<std::size_t>((a * n + b) * n + c)]; };
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = l.at3(l.dxyy, i, j, k);
        for (int m = 0; m < n; ++m) {
          v -= G(m, i) * l.at3(l.dyyy, m, j, k);
          v -= dG(m, i, k) * l.at2(l.dyy, m, j);
          v -= dG(m, i, j) * l.at2(l.dyy, m, k);
        }
        out.push_back(v);
      }
    }
  }
  return out;
}

}  // namespace

Residual residual_Pg(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  return run("P_g", labels_n3(E.dim()), E, samples, second | third,
             [&](const Local& l, const Point& p) { return pg_values(l, ctx, p); });
}

Residual check_reduction_identity(const EnergyCandidate& E, const SprayContext& ctx, std::span<const Point> samples) {
  const int n = E.dim();
  std::vector<Expression> middle;
  for (int i = 0; i < n; ++i) {
    const Expression hE = ctx.frame[static_cast<std::size_t>(i)].apply(E.energy());
    for (int j = 0; j < n; ++j) {
      const Expression dj = dvar(hE, CoordKind::fiber, j);
      for (int k = 0; k < n; ++k) middle.push_back(dvar(dj, CoordKind::fiber, k));
    }
  }
  return run("P_g identity", labels_n3(n), E, samples, second | third, [&](const Local& l, const Point& p) {
    auto gap = pg_values(l, ctx, p);
    const auto m = evaluate_all(middle, p, ctx.spray.params());
    const auto b = evaluate_all(ctx.berwald.components, p, ctx.spray.params());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const auto at = static_cast<std::size_t>((i * n + j) * n + k);
          double v = gap[at] - m[at];
          for (int q = 0; q < n; ++q) {
            v -= b[static_cast<std::size_t>(((q * n + i) * n + j) * n + k)] * l.dy[static_cast<std::size_t>(q)];
          }
          gap[at] = v;
        }
      }
    }
    return gap;
  });
}

FundamentalTensor fundamental_tensor(const EnergyCandidate& E, const Point& p) {
  const int n = E.dim();
  FundamentalTensor t;
  t.g.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = evaluate(E.dyy(i, j), p);
      t.g(i, j) = v;
      t.g(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.g, Eigen::EigenvaluesOnly);
  t.min_eigenvalue = eig.eigenvalues()(0);
  t.max_eigenvalue = eig.eigenvalues()(n - 1);
  t.positive_definite = t.min_eigenvalue > 1e-10;
  return t;
}

}  // namespace finmet
