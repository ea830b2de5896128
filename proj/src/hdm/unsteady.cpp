#include <algorithm>
#include <cmath>

#include "l1rom/hdm.hpp"

namespace l1rom::hdm {

double aligned_dt(double dt_max, double period) {
  if (!(dt_max > 0.0) || !(period > 0.0)) throw ConfigInvalid("aligned_dt: arguments must be > 0");
  const double steps = std::ceil(period / dt_max - 1e-12);
  return period / std::max(1.0, steps);
}

namespace {

Index step_count(double t_end, double dt) {
  return static_cast<Index>(std::llround(std::ceil(t_end / dt - 1e-9)));
}

}  // namespace

// Burgers.

DenseVector burgers_initial(double mu, const Grid1D& grid) {
  DenseVector u(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) u(j) = mu * std::abs(std::sin(2.0 * grid.x(j))) + 0.1;
  return u;
}

DenseVector burgers_flux_difference(const DenseVector& u) {
  const Index n = u.size();
  DenseVector face(n);  // face(j) = F_{j+1/2}
  for (Index j = 0; j < n; ++j) face(j) = roe_flux_burgers(u(j), u((j + 1) % n));
  DenseVector diff(n);
  for (Index j = 0; j < n; ++j) diff(j) = face(j) - face((j + n - 1) % n);
  return diff;
}

DenseVector burgers_step(const DenseVector& u, double dt_over_dx) {
  return u - dt_over_dx * burgers_flux_difference(u);
}

Trajectory burgers1d_unsteady_fixed(double mu, Index n, Index n_steps, double dt) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigInvalid("burgers1d_unsteady: mu must lie in [0, 1]");
  if (n < 4) throw ConfigInvalid("burgers1d_unsteady: n must be >= 4");
  Trajectory traj;
  traj.grid = Grid1D::cells(n, 0.0, 2.0 * kPi);
  traj.dt = dt;
  const double ratio = dt / traj.grid.dx;
  DenseVector u = burgers_initial(mu, traj.grid);
  traj.times.reserve(static_cast<std::size_t>(n_steps + 1));
  traj.states.reserve(static_cast<std::size_t>(n_steps + 1));
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  for (Index s = 1; s <= n_steps; ++s) {
    u = burgers_step(u, ratio);
    traj.times.push_back(static_cast<double>(s) * dt);
    traj.states.push_back(u);
  }
  return traj;
}

Trajectory burgers1d_unsteady(double mu, Index n, double t_end, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigInvalid("burgers1d_unsteady: cfl must lie in (0, 1]");
  const Grid1D grid = Grid1D::cells(n, 0.0, 2.0 * kPi);
  const double umax = burgers_initial(mu, grid).cwiseAbs().maxCoeff();
  const double dt = aligned_dt(cfl * grid.dx / umax, kPi / 4.0);
  return burgers1d_unsteady_fixed(mu, n, step_count(t_end, dt), dt);
}

// Euler.

DenseVector EulerState::velocity() const { return m.cwiseQuotient(rho); }

DenseVector EulerState::pressure() const {
  return (gamma - 1.0) * (e - 0.5 * m.cwiseProduct(m).cwiseQuotient(rho));
}

DenseVector EulerState::stacked() const {
  DenseVector u(3 * size());
  u << rho, m, e;
  return u;
}

EulerState EulerState::from_stacked(const DenseVector& u, double gamma) {
  require_dims(u.size() % 3 == 0, "EulerState::from_stacked: length not divisible by 3");
  const Index n = u.size() / 3;
  EulerState s;
  s.rho = u.segment(0, n);
  s.m = u.segment(n, n);
  s.e = u.segment(2 * n, n);
  s.gamma = gamma;
  return s;
}

void EulerState::check_physical(const std::string& where) const {
  if (!(rho.minCoeff() > 0.0)) throw NonPhysicalState(where + ": non-positive density");
  if (!(pressure().minCoeff() > 0.0)) throw NonPhysicalState(where + ": non-positive pressure");
}

EulerState euler_initial(double mu, const Grid1D& grid, double gamma) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigInvalid("euler_initial: mu must lie in [0, 1]");
  // (rho, u, p) left and right of x = 0.5
  constexpr double sod_l[3] = {1.0, 0.0, 1.0};
  constexpr double sod_r[3] = {0.125, 0.0, 0.1};
  constexpr double lax_l[3] = {0.445, 0.698, 3.528};
  constexpr double lax_r[3] = {0.5, 0.0, 0.571};
  const Index n = grid.n_cells;
  EulerState s;
  s.gamma = gamma;
  s.rho.resize(n);
  s.m.resize(n);
  s.e.resize(n);
  for (Index j = 0; j < n; ++j) {
    const bool left = grid.x(j) <= 0.5;
    const double* sod = left ? sod_l : sod_r;
    const double* lax = left ? lax_l : lax_r;
    const double rho = mu * sod[0] + (1.0 - mu) * lax[0];
    const double u = mu * sod[1] + (1.0 - mu) * lax[1];
    const double p = mu * sod[2] + (1.0 - mu) * lax[2];
    s.rho(j) = rho;
    s.m(j) = rho * u;
    s.e(j) = p / (gamma - 1.0) + 0.5 * rho * u * u;
  }
  return s;
}

double euler_max_speed(const EulerState& state) {
  const DenseVector u = state.velocity();
  const DenseVector p = state.pressure();
  double smax = 0.0;
  for (Index j = 0; j < state.size(); ++j) {
    smax = std::max(smax, std::abs(u(j)) + std::sqrt(state.gamma * p(j) / state.rho(j)));
  }
  return smax;
}

DenseVector euler_flux_difference(const EulerState& state) {
  const Index n = state.size();
  const auto cell = [&](Index j) { return Vec3{state.rho(j), state.m(j), state.e(j)}; };
  // faces 0..n, face f between cells f-1 and f; transmissive ghosts at both ends
  std::vector<Vec3> face(static_cast<std::size_t>(n + 1));
  face[0] = euler_physical_flux(cell(0), state.gamma);
  face[static_cast<std::size_t>(n)] = euler_physical_flux(cell(n - 1), state.gamma);
  for (Index f = 1; f < n; ++f) face[static_cast<std::size_t>(f)] = roe_flux_euler(cell(f - 1), cell(f), state.gamma);
  DenseVector diff(3 * n);
  for (Index j = 0; j < n; ++j) {
    const Vec3& lo = face[static_cast<std::size_t>(j)];
    const Vec3& hi = face[static_cast<std::size_t>(j + 1)];
    for (Index k = 0; k < 3; ++k) diff(k * n + j) = hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
  }
  return diff;
}

EulerState euler_step(const EulerState& state, double dt_over_dx) {
  const DenseVector next = state.stacked() - dt_over_dx * euler_flux_difference(state);
  return EulerState::from_stacked(next, state.gamma);
}

EulerTrajectory euler1d_unsteady_fixed(double mu, Index n_cells, Index n_steps, double dt) {
  if (n_cells < 4) throw ConfigInvalid("euler1d_unsteady: n_cells must be >= 4");
  EulerTrajectory traj;
  traj.grid = Grid1D::cells(n_cells, 0.0, 1.0);
  traj.dt = dt;
  const double ratio = dt / traj.grid.dx;
  EulerState s = euler_initial(mu, traj.grid);
  s.check_physical("euler1d_unsteady");
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (Index k = 1; k <= n_steps; ++k) {
    s = euler_step(s, ratio);
    s.check_physical("euler1d_unsteady step " + std::to_string(k));
    traj.times.push_back(static_cast<double>(k) * dt);
    traj.states.push_back(s);
  }
  return traj;
}

EulerTrajectory euler1d_unsteady(double mu, Index n_cells, double t_end, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigInvalid("euler1d_unsteady: cfl must lie in (0, 1]");
  const Grid1D grid = Grid1D::cells(n_cells, 0.0, 1.0);
  const double smax = euler_max_speed(euler_initial(mu, grid));
  const double dt = aligned_dt(cfl * grid.dx / smax, t_end);
  return euler1d_unsteady_fixed(mu, n_cells, step_count(t_end, dt), dt);
}

// Linear advection.

DenseVector linear_advection_step(const DenseVector& u, double courant) {
  const Index n = u.size();
  DenseVector next(n);
  for (Index j = 0; j < n; ++j) next(j) = u(j) - courant * (u(j) - u((j + n - 1) % n));
  return next;
}

DenseVector linear_advection_initial(double mu, const Grid1D& grid) {
  DenseVector u(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double d = grid.x(j) - mu;
    u(j) = std::exp(-100.0 * d * d);
  }
  return u;
}

Trajectory linear_advection_unsteady(double mu, Index n, Index n_steps, double courant) {
  if (!(courant >= 0.0 && courant <= 1.0)) throw ConfigInvalid("linear_advection: courant must lie in [0, 1]");
  Trajectory traj;
  traj.grid = Grid1D::cells(n, 0.0, 1.0);
  traj.dt = courant * traj.grid.dx;  // unit speed
  DenseVector u = linear_advection_initial(mu, traj.grid);
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  for (Index k = 1; k <= n_steps; ++k) {
    u = linear_advection_step(u, courant);
    traj.times.push_back(static_cast<double>(k) * traj.dt);
    traj.states.push_back(u);
  }
  return traj;
}

DenseVector advect1d_exact(Index n, double t) {
  if (n < 1) throw ConfigInvalid("advect1d_exact: n must be >= 1");
  const double front = std::min(t, 1.0);
  DenseVector u(n + 1);
  for (Index i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    u(i) = x <= front + 1e-12 ? 1.0 : 0.0;
  }
  return u;
}

}  // namespace l1rom::hdm
