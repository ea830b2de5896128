#pragma once

// Full-order discretizations of the test problems.

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "l1rom/minimize.hpp"
#include "l1rom/types.hpp"

namespace l1rom::hdm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGamma = 1.4;

struct Grid1D {
  Index n_cells = 0;
  DenseVector x;
  double dx = 0.0;

  /// n points x_i = lo + i (hi - lo) / (n - 1).
  static Grid1D nodes(Index n, double lo, double hi);
  /// n cell centers of a uniform partition of [lo, hi].
  static Grid1D cells(Index n, double lo, double hi);
};

struct Grid2D {
  Index nx = 0;
  Index ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

/// Conserved variables of the 1D Euler equations.
struct EulerState {
  DenseVector rho;
  DenseVector m;
  DenseVector e;
  double gamma = kGamma;

  Index size() const { return rho.size(); }
  DenseVector velocity() const;
  DenseVector pressure() const;
  /// [rho; m; E].
  DenseVector stacked() const;
  static EulerState from_stacked(const DenseVector& u, double gamma = kGamma);
  /// Throws NonPhysicalState unless rho > 0 and p > 0 in every cell.
  void check_physical(const std::string& where) const;
};

/// A steady discrete problem r(u) = 0 at a fixed parameter.
struct SteadyProblem {
  std::string name;
  double mu = 0.0;
  Grid1D grid;       // 1D problems
  Grid2D grid2d;     // advdiff2d
  std::function<DenseVector(const DenseVector&)> residual;
  std::function<SparseMatrix(const DenseVector&)> jacobian;
  bool linear = false;
  SparseMatrix a;    // linear problems: r = a u + b
  DenseVector b;
  DenseVector initial_guess;

  Index size() const { return initial_guess.size(); }
  minimize::NonlinearResidual as_residual() const;
};

/// Solution of a steady problem: a direct sparse solve for linear problems,
/// damped Newton otherwise. Throws NewtonDiverged.
DenseVector solve(const SteadyProblem& problem, double tol = 1e-10, int max_iterations = 50);

/// Damped Newton with a sparse LU on every step.
DenseVector newton_solve(const std::function<DenseVector(const DenseVector&)>& residual,
                         const std::function<SparseMatrix(const DenseVector&)>& jacobian,
                         DenseVector u, double tol = 1e-10, int max_iterations = 50);

// Steady problems.

/// Logistic profile 1 / (1 + exp(-2k(x - mu))).
double logistic(double x, double mu, double k = 100.0);
/// Source of the 1D advection problem: derivative of the logistic profile.
double advect_source(double x, double mu, double k = 100.0);
/// Source of the steady Burgers problem as written for (u^2/2)_x = f.
double burgers_source(double x, double mu, double k = 100.0);

SteadyProblem advect1d_steady(double mu, Index n);
/// Continuum solution of advect1d_steady on its grid.
DenseVector advect1d_steady_exact(double mu, Index n);

SteadyProblem burgers1d_steady(double mu, Index n);
/// Continuum solution u = 1.5 - logistic of burgers1d_steady.
DenseVector burgers1d_steady_exact(double mu, Index n);

inline constexpr double kAdvDiffLength = 0.018;
inline constexpr double kAdvDiffSpeed = 0.5;
inline constexpr double kAdvDiffKappa = 2e-7;

/// Unknowns are the nodes (i, j) with i, j >= 1 stored as i - 1 + (nx - 1)(j - 1).
SteadyProblem advdiff2d(double mu, Index nx);
/// Full nx x nx nodal field (row j, column i) including the Dirichlet edges.
DenseMatrix advdiff2d_field(const SteadyProblem& problem, const DenseVector& u);

// Fluxes.

double roe_flux_burgers(double ul, double ur);
/// Partial derivatives of roe_flux_burgers with respect to (ul, ur).
std::array<double, 2> roe_flux_burgers_derivative(double ul, double ur);

using Vec3 = std::array<double, 3>;
Vec3 euler_physical_flux(const Vec3& u, double gamma = kGamma);
Vec3 roe_flux_euler(const Vec3& ul, const Vec3& ur, double gamma = kGamma);

// Unsteady problems.

struct Trajectory {
  Grid1D grid;
  double dt = 0.0;
  std::vector<double> times;          // times[n] = n dt
  std::vector<DenseVector> states;    // one per time level
};

struct EulerTrajectory {
  Grid1D grid;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<EulerState> states;
};

/// Largest dt <= dt_max that divides `period` an integer number of times.
double aligned_dt(double dt_max, double period);

/// u0 = mu |sin 2x| + 0.1 at the cell centers of the periodic grid on [0, 2 pi].
DenseVector burgers_initial(double mu, const Grid1D& grid);
/// One forward-Euler finite-volume step with the Roe flux and periodic wrap.
DenseVector burgers_step(const DenseVector& u, double dt_over_dx);
/// Flux differences F_{j+1/2} - F_{j-1/2} with periodic closure.
DenseVector burgers_flux_difference(const DenseVector& u);

/// Runs to t_end with dt = cfl dx / max|u0| aligned to pi/4.
Trajectory burgers1d_unsteady(double mu, Index n, double t_end, double cfl);
/// Runs n_steps steps of a prescribed dt.
Trajectory burgers1d_unsteady_fixed(double mu, Index n, Index n_steps, double dt);

/// Primitive initial state: mu * Sod + (1 - mu) * Lax blended in (rho, u, p).
EulerState euler_initial(double mu, const Grid1D& grid, double gamma = kGamma);
/// max(|u| + c) over the initial state.
double euler_max_speed(const EulerState& state);
/// One first-order Roe step with transmissive boundaries.
EulerState euler_step(const EulerState& state, double dt_over_dx);
/// Per-cell flux differences, stacked [rho; m; E].
DenseVector euler_flux_difference(const EulerState& state);

inline constexpr double kEulerEndTime = 0.16;

/// Runs to t_end with dt = cfl dx / max(|u| + c) of the initial state.
EulerTrajectory euler1d_unsteady(double mu, Index n_cells, double t_end, double cfl);
EulerTrajectory euler1d_unsteady_fixed(double mu, Index n_cells, Index n_steps, double dt);

/// Periodic first-order upwind advection with Courant number c in [0, 1].
DenseVector linear_advection_step(const DenseVector& u, double courant);
/// Smooth periodic initial data for the linear advection test.
DenseVector linear_advection_initial(double mu, const Grid1D& grid);
Trajectory linear_advection_unsteady(double mu, Index n, Index n_steps, double courant);

/// Traveling discontinuity u(x, t) = 1 for x <= min(t, 1) on x_i = i / n, i = 0..n.
DenseVector advect1d_exact(Index n, double t);

// Export.

/// One row per grid point: x followed by one column per entry of `columns`.
void write_columns_csv(std::ostream& out, const DenseVector& x, const std::vector<std::string>& names,
                       const std::vector<DenseVector>& columns);
/// Scalar trajectory at the requested time indices.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::vector<Index>& steps);
/// Euler trajectory: rho, u, p per requested time index.
void write_euler_csv(std::ostream& out, const EulerTrajectory& traj, const std::vector<Index>& steps);

}  // namespace l1rom::hdm
