#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "l1rom/hdm.hpp"

namespace l1rom::hdm {

Grid1D Grid1D::nodes(Index n, double lo, double hi) {
  Grid1D g;
  g.n_cells = n;
  g.dx = (hi - lo) / static_cast<double>(n - 1);
  g.x.resize(n);
  for (Index i = 0; i < n; ++i) g.x(i) = lo + static_cast<double>(i) * g.dx;
  return g;
}

Grid1D Grid1D::cells(Index n, double lo, double hi) {
  Grid1D g;
  g.n_cells = n;
  g.dx = (hi - lo) / static_cast<double>(n);
  g.x.resize(n);
  for (Index i = 0; i < n; ++i) g.x(i) = lo + (static_cast<double>(i) + 0.5) * g.dx;
  return g;
}

minimize::NonlinearResidual SteadyProblem::as_residual() const {
  minimize::NonlinearResidual res;
  res.eval = residual;
  res.jacobian = jacobian;
  res.dim_in = size();
  res.dim_out = size();
  return res;
}

namespace {

SparseMatrix sparse_lu_ready(SparseMatrix m) {
  m.makeCompressed();
  return m;
}

DenseVector sparse_solve(const SparseMatrix& a, const DenseVector& rhs, const char* who) {
  Eigen::SparseLU<SparseMatrix> lu;
  const SparseMatrix m = sparse_lu_ready(a);
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw NewtonDiverged(std::string(who) + ": singular Jacobian");
  return lu.solve(rhs);
}

/// Linear residual r = A u + b packaged as a SteadyProblem.
void attach_linear(SteadyProblem& p, SparseMatrix a, DenseVector b) {
  a.makeCompressed();
  p.linear = true;
  p.a = a;
  p.b = b;
  p.residual = [a, b](const DenseVector& u) -> DenseVector { return a * u + b; };
  p.jacobian = [a](const DenseVector&) { return a; };
}

bool lower_triangular(const SparseMatrix& a) {
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() < it.col()) return false;
    }
  }
  return true;
}

}  // namespace

DenseVector newton_solve(const std::function<DenseVector(const DenseVector&)>& residual,
                         const std::function<SparseMatrix(const DenseVector&)>& jacobian,
                         DenseVector u, double tol, int max_iterations) {
  DenseVector r = residual(u);
  for (int it = 0; it < max_iterations; ++it) {
    if (r.lpNorm<Eigen::Infinity>() < tol) return u;
    const DenseVector du = sparse_solve(jacobian(u), -r, "newton_solve");
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 20; ++h, scale *= 0.5) {
      DenseVector trial = u + scale * du;
      DenseVector r_trial = residual(trial);
      if (r_trial.allFinite() && r_trial.norm() < r.norm()) {
        u = std::move(trial);
        r = std::move(r_trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Roundoff floor: a full step that cannot reduce the norm is still fine
      // if the residual already satisfies the tolerance.
      if (r.lpNorm<Eigen::Infinity>() < tol) return u;
      throw NewtonDiverged("newton_solve: no decrease after 20 halvings");
    }
  }
  if (r.lpNorm<Eigen::Infinity>() < tol) return u;
  throw NewtonDiverged("newton_solve: residual " + std::to_string(r.lpNorm<Eigen::Infinity>()) +
                       " after " + std::to_string(max_iterations) + " iterations");
}

DenseVector solve(const SteadyProblem& problem, double tol, int max_iterations) {
  if (problem.linear) {
    // Marching problems are solved by forward substitution.
    if (lower_triangular(problem.a)) return problem.a.triangularView<Eigen::Lower>().solve(-problem.b);
    return sparse_solve(problem.a, -problem.b, problem.name.c_str());
  }
  return newton_solve(problem.residual, problem.jacobian, problem.initial_guess, tol, max_iterations);
}

double logistic(double x, double mu, double k) { return 1.0 / (1.0 + std::exp(-2.0 * k * (x - mu))); }

double advect_source(double x, double mu, double k) {
  const double e = std::exp(-2.0 * k * (x - mu));
  if (!std::isfinite(e)) return 0.0;
  return 2.0 * k * e / ((1.0 + e) * (1.0 + e));
}

double burgers_source(double x, double mu, double k) {
  const double e = std::exp(-2.0 * k * (x - mu));
  if (!std::isfinite(e)) return 0.0;
  return -2.0 * k * e * (1.0 + 3.0 * e) / ((1.0 + e) * (1.0 + e) * (1.0 + e));
}

SteadyProblem advect1d_steady(double mu, Index n) {
  if (n < 10) throw ConfigInvalid("advect1d_steady: n must be >= 10");
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigInvalid("advect1d_steady: mu must lie in (0, 1)");
  SteadyProblem p;
  p.name = "advect1d";
  p.mu = mu;
  p.grid = Grid1D::nodes(n, 0.0, 1.0);
  const double dx = p.grid.dx;

  std::vector<Eigen::Triplet<double>> entries;
  DenseVector b(n);
  // The inflow row is scaled like the difference quotients so that no row
  // dominates a residual norm.
  entries.emplace_back(0, 0, 1.0 / dx);
  b(0) = -1.0 / dx;
  for (Index i = 1; i < n; ++i) {
    entries.emplace_back(i, i, 1.0 / dx);
    entries.emplace_back(i, i - 1, -1.0 / dx);
    b(i) = -advect_source(p.grid.x(i), mu);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  attach_linear(p, a, b);
  p.initial_guess = DenseVector::Ones(n);
  return p;
}

DenseVector advect1d_steady_exact(double mu, Index n) {
  const Grid1D g = Grid1D::nodes(n, 0.0, 1.0);
  DenseVector u(n);
  const double s0 = logistic(0.0, mu);
  for (Index i = 0; i < n; ++i) u(i) = 1.0 + logistic(g.x(i), mu) - s0;
  return u;
}

// The printed source is the derivative of u^2 for u = 1.5 - logistic, so the
// discretized balance (u^2/2)_x = f/2 is the one with a solution.
SteadyProblem burgers1d_steady(double mu, Index n) {
  if (n < 10) throw ConfigInvalid("burgers1d_steady: n must be >= 10");
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigInvalid("burgers1d_steady: mu must lie in (0, 1)");
  SteadyProblem p;
  p.name = "burgers1d";
  p.mu = mu;
  p.grid = Grid1D::nodes(n, 0.0, 1.0);
  const double dx = p.grid.dx;
  DenseVector s(n);
  for (Index i = 0; i < n; ++i) s(i) = 0.5 * burgers_source(p.grid.x(i), mu);

  // Row 0 is the inflow condition, scaled by 1/dx like the others. Row j >= 1
  // is the flux balance of node j with the Roe flux on both faces and a
  // transmissive last face.
  const auto face = [n](const DenseVector& u, Index j) {
    return j + 1 < n ? roe_flux_burgers(u(j), u(j + 1)) : 0.5 * u(j) * u(j);
  };
  p.residual = [n, dx, s, face](const DenseVector& u) -> DenseVector {
    DenseVector r(n);
    r(0) = (u(0) - 1.5) / dx;
    for (Index j = 1; j < n; ++j) r(j) = (face(u, j) - face(u, j - 1)) / dx - s(j);
    return r;
  };
  p.jacobian = [n, dx](const DenseVector& u) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n));
    entries.emplace_back(0, 0, 1.0 / dx);
    for (Index j = 1; j < n; ++j) {
      // + F_{j+1/2}
      if (j + 1 < n) {
        const auto d = roe_flux_burgers_derivative(u(j), u(j + 1));
        entries.emplace_back(j, j, d[0] / dx);
        entries.emplace_back(j, j + 1, d[1] / dx);
      } else {
        entries.emplace_back(j, j, u(j) / dx);
      }
      // - F_{j-1/2}
      const auto d = roe_flux_burgers_derivative(u(j - 1), u(j));
      entries.emplace_back(j, j - 1, -d[0] / dx);
      entries.emplace_back(j, j, -d[1] / dx);
    }
    SparseMatrix jac(n, n);
    jac.setFromTriplets(entries.begin(), entries.end());
    return jac;
  };
  p.initial_guess = DenseVector::Constant(n, 1.5);
  return p;
}

DenseVector burgers1d_steady_exact(double mu, Index n) {
  const Grid1D g = Grid1D::nodes(n, 0.0, 1.0);
  DenseVector u(n);
  for (Index i = 0; i < n; ++i) u(i) = 1.5 - logistic(g.x(i), mu);
  return u;
}

SteadyProblem advdiff2d(double mu, Index nx) {
  if (nx < 32) throw ConfigInvalid("advdiff2d: nx must be >= 32");
  if (!(mu > 0.0 && mu < kPi / 2.0)) throw ConfigInvalid("advdiff2d: mu must lie in (0, pi/2)");
  SteadyProblem p;
  p.name = "advdiff2d";
  p.mu = mu;
  Grid2D& g = p.grid2d;
  g.nx = g.ny = nx;
  g.x1 = g.y1 = kAdvDiffLength;
  g.hx = g.hy = kAdvDiffLength / static_cast<double>(nx - 1);
  const double h = g.hx;
  const double lx = kAdvDiffSpeed * std::cos(mu);
  const double ly = kAdvDiffSpeed * std::sin(mu);
  const double diff = kAdvDiffKappa / (h * h);

  const Index m = nx - 1;  // unknowns per direction
  const auto id = [m](Index i, Index j) { return (i - 1) + m * (j - 1); };
  const Index n = m * m;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * n));
  DenseVector b = DenseVector::Zero(n);

  // Neighbor (ii, jj) of row `row` with coefficient c. Dirichlet values move to
  // b; the outflow ghost at index nx mirrors nx - 2.
  const auto couple = [&](Index row, Index ii, Index jj, double c) {
    if (ii == nx) ii = nx - 2;
    if (jj == nx) jj = nx - 2;
    if (ii == 0) return;                  // u = 0 on x = 0
    if (jj == 0) {                        // u = 1 on y = 0
      b(row) += c;
      return;
    }
    entries.emplace_back(row, id(ii, jj), c);
  };
  for (Index j = 1; j < nx; ++j) {
    for (Index i = 1; i < nx; ++i) {
      const Index row = id(i, j);
      entries.emplace_back(row, row, (lx + ly) / h + 4.0 * diff);
      couple(row, i - 1, j, -lx / h - diff);
      couple(row, i, j - 1, -ly / h - diff);
      couple(row, i + 1, j, -diff);
      couple(row, i, j + 1, -diff);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  attach_linear(p, a, b);
  p.initial_guess = DenseVector::Zero(n);
  return p;
}

DenseMatrix advdiff2d_field(const SteadyProblem& problem, const DenseVector& u) {
  const Index nx = problem.grid2d.nx;
  const Index m = nx - 1;
  require_dims(u.size() == m * m, "advdiff2d_field: wrong state length");
  DenseMatrix field = DenseMatrix::Zero(nx, nx);
  for (Index i = 1; i < nx; ++i) field(0, i) = 1.0;
  for (Index j = 1; j < nx; ++j) {
    for (Index i = 1; i < nx; ++i) field(j, i) = u((i - 1) + m * (j - 1));
  }
  return field;
}

}  // namespace l1rom::hdm
