#include "finmet/jets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace finmet {

namespace {

int tri(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

Eigen::MatrixXd fiber_matrix(const JetLayout& L, const Eigen::VectorXd& z, double off_scale) {
  Eigen::MatrixXd m(L.n, L.n);
  for (int i = 0; i < L.n; ++i) {
    for (int j = i; j < L.n; ++j) {
      const double v = z(L.second(L.n + i, L.n + j)) / (i == j ? 1.0 : off_scale);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

void set_fiber_matrix(const JetLayout& L, Eigen::VectorXd& z, const Eigen::MatrixXd& m, double off_scale) {
  for (int i = 0; i < L.n; ++i) {
    for (int j = i; j < L.n; ++j) z(L.second(L.n + i, L.n + j)) = m(i, j) * (i == j ? 1.0 : off_scale);
  }
}

const char* kind_name(RowKind k) {
  switch (k) {
    case RowKind::homogeneity: return "P_c";
    case RowKind::homogeneity_prolonged: return "P_c-prolonged";
    case RowKind::generator: return "P_h";
    case RowKind::generator_prolonged: return "P_h-prolonged";
  }
  return "?";
}

}  // namespace

int JetLayout::second(int a, int b) const {
  if (a > b) std::swap(a, b);
  const int xx = 1 + 2 * n;
  const int xy = xx + n * (n + 1) / 2;
  if (b < n) return xx + tri(n, a, b);
  if (a < n) return xy + a * n + (b - n);
  return fiber_block() + tri(n, a - n, b - n);
}

bool JetLayout::off_diagonal_symmetric(int index) const {
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (index == second(i, j) || index == second(n + i, n + j)) return true;
    }
  }
  return false;
}

JetCoordinates JetCoordinates::zero(int dim) {
  JetCoordinates j;
  j.sx = Eigen::VectorXd::Zero(dim);
  j.sy = Eigen::VectorXd::Zero(dim);
  j.sxx = Eigen::MatrixXd::Zero(dim, dim);
  j.sxy = Eigen::MatrixXd::Zero(dim, dim);
  j.syy = Eigen::MatrixXd::Zero(dim, dim);
  return j;
}

Eigen::VectorXd JetCoordinates::flatten() const {
  const int n = dim();
  const JetLayout L(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(L.size());
  v(L.value()) = s;
  for (int i = 0; i < n; ++i) {
    v(L.first(i)) = sx(i);
    v(L.first(n + i)) = sy(i);
    for (int j = 0; j < n; ++j) {
      v(L.second(i, n + j)) = sxy(i, j);
      if (j >= i) {
        v(L.second(i, j)) = sxx(i, j);
        v(L.second(n + i, n + j)) = syy(i, j);
      }
    }
  }
  return v;
}

JetCoordinates JetCoordinates::unflatten(int n, const Eigen::VectorXd& v) {
  const JetLayout L(n);
  if (v.size() != L.size()) throw std::invalid_argument("jet: wrong flattened size");
  JetCoordinates j = zero(n);
  j.s = v(L.value());
  for (int a = 0; a < n; ++a) {
    j.sx(a) = v(L.first(a));
    j.sy(a) = v(L.first(n + a));
    for (int b = 0; b < n; ++b) {
      j.sxx(a, b) = v(L.second(a, b));
      j.sxy(a, b) = v(L.second(a, n + b));
      j.syy(a, b) = v(L.second(n + a, n + b));
    }
  }
  return j;
}

JetCoordinates energy_jet(const EnergyCandidate& E, const Point& p) {
  const int n = E.dim();
  JetCoordinates j = JetCoordinates::zero(n);
  j.s = evaluate(E.energy(), p);
  for (int a = 0; a < n; ++a) {
    j.sx(a) = evaluate(E.dx(a), p);
    j.sy(a) = evaluate(E.dy(a), p);
    for (int b = 0; b < n; ++b) {
      j.sxx(a, b) = evaluate(differentiate(E.dx(a), Coordinate::x(b + 1)), p);
      j.sxy(a, b) = evaluate(E.dxy(a, b), p);
      j.syy(a, b) = evaluate(E.dyy(a, b), p);
    }
  }
  return j;
}

std::string RowTag::to_string() const {
  std::string out = kind_name(kind);
  if (!generator.empty()) out += " " + generator;
  if (direction >= 0) out += " d" + std::to_string(direction);
  return out;
}

double JetSystem::residual(const JetCoordinates& jet) const {
  const Eigen::VectorXd s = jet.flatten();
  const double norm = s.norm();
  if (norm == 0.0 || matrix.rows() == 0) return 0.0;
  return (matrix * s).cwiseAbs().maxCoeff() / norm;
}

JetSystem assemble_jet_system(const Spray& spray, const DistributionReport& report, const Point& v,
                              const JetConfig& config) {
  const int n = spray.dim();
  const JetLayout L(n);
  const int D = L.size();
  JetSystem sys;
  sys.point = v;
  sys.dim = n;

  std::vector<Eigen::VectorXd> rows;
  auto push = [&](Eigen::VectorXd row, RowTag tag) {
    const double norm = row.norm();
    if (norm == 0.0) return;
    rows.push_back(row / norm);
    sys.rows.push_back(std::move(tag));
  };

  // homogeneity and its first prolongation
  {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(D);
    row(L.value()) = -2.0;
    for (int i = 0; i < n; ++i) row(L.first(n + i)) += v.y[static_cast<std::size_t>(i)];
    push(row, {RowKind::homogeneity, {}, -1});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(D);
    row(L.first(j)) = -2.0;
    for (int i = 0; i < n; ++i) row(L.second(j, n + i)) += v.y[static_cast<std::size_t>(i)];
    push(row, {RowKind::homogeneity_prolonged, {}, j});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(D);
    row(L.first(n + j)) = -1.0;
    for (int i = 0; i < n; ++i) row(L.second(n + j, n + i)) += v.y[static_cast<std::size_t>(i)];
    push(row, {RowKind::homogeneity_prolonged, {}, n + j});
  }

  const auto& gens = report.generators;
  sys.unreduced_rows = (1 + 2 * n) * (1 + static_cast<int>(gens.size()));
  Eigen::MatrixXd values(2 * n, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t g = 0; g < gens.size(); ++g) values.col(static_cast<Eigen::Index>(g)) = gens[g].field.evaluate(v);

  std::vector<std::size_t> keep;
  if (config.span_reduce && !gens.empty()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(values);
    qr.setThreshold(config.reduce_tol);
    for (Eigen::Index k = 0; k < qr.rank(); ++k) keep.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(k)));
    std::sort(keep.begin(), keep.end());
  } else {
    for (std::size_t g = 0; g < gens.size(); ++g) keep.push_back(g);
  }

  for (std::size_t g : keep) {
    const Generator& gen = gens[g];
    sys.generators_used.push_back(gen.origin);
    const Eigen::VectorXd w = values.col(static_cast<Eigen::Index>(g));
    Eigen::VectorXd row = Eigen::VectorXd::Zero(D);
    for (int a = 0; a < 2 * n; ++a) row(L.first(a)) = w(a);
    push(row, {RowKind::generator, gen.origin, -1});
    for (int b = 0; b < 2 * n; ++b) {
      const Coordinate ub = Coordinate::from_slot(b, n);
      Eigen::VectorXd pr = Eigen::VectorXd::Zero(D);
      for (int a = 0; a < 2 * n; ++a) {
        pr(L.first(a)) += evaluate(differentiate(gen.field[static_cast<std::size_t>(a)], ub), v);
        pr(L.second(a, b)) += w(a);
      }
      push(pr, {RowKind::generator_prolonged, gen.origin, b});
    }
  }

  sys.matrix.resize(static_cast<Eigen::Index>(rows.size()), D);
  for (std::size_t r = 0; r < rows.size(); ++r) sys.matrix.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return sys;
}

PdResult pd_feasibility(const JetSystem& system, const PdConfig& config) {
  const int n = system.dim;
  const JetLayout L(n);
  const int D = L.size();
  const double root2 = std::sqrt(2.0);
  PdResult res;

  // Frobenius-consistent coordinates: off-diagonal entries of symmetric
  // blocks appear twice in the matrix they stand for.
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(D);
  for (int k = 0; k < D; ++k) {
    if (L.off_diagonal_symmetric(k)) scale(k) = root2;
  }
  Eigen::MatrixXd kernel;
  if (system.matrix.rows() == 0) {
    kernel = Eigen::MatrixXd::Identity(D, D);
  } else {
    const Eigen::MatrixXd a = system.matrix * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > 1e-10 * sv(0)) ++r;
    kernel = svd.matrixV().rightCols(D - r);
  }
  res.kernel_dim = static_cast<int>(kernel.cols());
  if (res.kernel_dim == 0) {
    res.diagnostic = "no PD datum found (search incomplete): the constraint kernel is trivial";
    return res;
  }

  auto to_jet = [&](const Eigen::VectorXd& z) { return JetCoordinates::unflatten(n, z.cwiseQuotient(scale)); };
  auto project = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return kernel * (kernel.transpose() * z); };

  Eigen::VectorXd z = Eigen::VectorXd::Zero(D);
  set_fiber_matrix(L, z, Eigen::MatrixXd::Identity(n, n), root2);
  z = project(z);
  double best_residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= config.max_iters; ++it) {
    res.iterations = it;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fiber_matrix(L, z, root2));
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(n - 1);
    res.min_eigenvalue = hi > 0.0 ? lo / hi : lo;
    if (hi > 0.0 && lo >= config.ridge * hi) {
      JetCoordinates jet = to_jet(z / hi);
      jet.syy = 0.5 * (jet.syy + jet.syy.transpose()).eval();
      const double resid = system.residual(jet);
      const double check = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(jet.syy, Eigen::EigenvaluesOnly).eigenvalues()(0);
      res.residual = resid;
      res.min_eigenvalue = check;
      if (resid <= config.tol && check >= config.ridge) {
        res.found = true;
        res.jet = std::move(jet);
        res.cone_gap = 0.0;
        return res;
      }
    }
    if (it == config.max_iters) break;
    // clip the fiber block at the unit level; the system is homogeneous
    Eigen::VectorXd k = z;
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(1.0);
    set_fiber_matrix(L, k, eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose(), root2);
    res.cone_gap = (k - z).norm();
    best_residual = std::min(best_residual, system.residual(to_jet(k)));
    z = project(k);
  }
  res.residual = best_residual;
  res.diagnostic = "no PD datum found (search incomplete) after " + std::to_string(config.max_iters) +
                   " iterations; best residual " + std::to_string(best_residual);
  return res;
}

}  // namespace finmet
