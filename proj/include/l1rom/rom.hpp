#pragma once

// Reduced solutions as combinations of dictionary members.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "l1rom/hdm.hpp"
#include "l1rom/minimize.hpp"

namespace l1rom::rom {

enum class VariableTag { All, Rho, M, E };

std::string to_string(VariableTag tag);

/// Precomputed HDM solutions. Steady dictionaries fill `states`, unsteady ones
/// fill `trajectories` (indexed [member][time step]).
struct Dictionary {
  std::vector<double> mus;
  std::vector<DenseVector> states;
  std::vector<std::vector<DenseVector>> trajectories;
  VariableTag tag = VariableTag::All;

  Index size() const { return static_cast<Index>(mus.size()); }
  bool unsteady() const { return !trajectories.empty(); }
  Index state_length() const;
  Index steps() const;  // number of time levels
  /// Throws DimensionMismatch on inconsistent members.
  void validate() const;
  /// Columns are the members (steady).
  DenseMatrix matrix() const;
  /// Columns are the members at time level n (unsteady).
  DenseMatrix matrix_at(Index n) const;
  /// Rows [offset, offset + length) of every member, tagged `tag`.
  Dictionary block(Index offset, Index length, VariableTag tag) const;
  /// Index of the member whose mu is nearest to `mu`.
  Index nearest(double mu) const;
};

/// Solves `make(mu)` for every mu concurrently.
Dictionary build_steady_dictionary(const std::function<hdm::SteadyProblem(double)>& make,
                                   const std::vector<double>& mus);

struct RomCoefficients {
  DenseVector alpha;
  double mu_target = 0.0;
  Index time_index = 0;
  bool converged = true;
  int iterations = 0;
  double objective = 0.0;
};

struct SteadyRomResult {
  RomCoefficients coefficients;
  DenseVector reconstruction;
  DenseVector residual;  // HDM residual of the reconstruction
};

struct PerturbationConfig {
  bool enabled = false;
  double scale = 1e-8;
  std::uint64_t seed = 0;
};

/// Adds uniform(-1, 1) * scale * variable_range to every entry, drawn from a
/// generator seeded with cfg.seed. Returns A unchanged when disabled.
DenseMatrix rank_repair(const DenseMatrix& a, const PerturbationConfig& cfg, double variable_range);

/// Seed of the perturbation used at time level n for one variable block.
std::uint64_t derive_seed(std::uint64_t seed, Index time_index, VariableTag tag);

/// max - min over the entries of a dictionary matrix.
double variable_range(const DenseMatrix& a);

/// Minimizes the chosen functional of A beta - target. `warm` is the starting
/// point of the iterative backends.
minimize::SolveReport fit_linear(const DenseMatrix& a, const DenseVector& target,
                                 const minimize::Functional& functional, const DenseVector& warm);

SteadyRomResult solve_steady_rom(const hdm::SteadyProblem& problem, const Dictionary& dict,
                                 const minimize::Functional& functional,
                                 const PerturbationConfig& perturbation = {});

SteadyRomResult solve_galerkin(const hdm::SteadyProblem& problem, const Dictionary& dict);

/// Maps a full HDM state w^n to its explicit update w^n - dt/dx (F_{j+1/2} - F_{j-1/2}).
using StepFunction = std::function<DenseVector(const DenseVector&)>;

struct RomTrajectory {
  std::vector<RomCoefficients> coefficients;
  std::vector<DenseVector> reconstructed;
  std::vector<double> residual_norms;
  minimize::Functional functional_used;
  /// Set when a solver error stopped the propagation early; the vectors then
  /// hold the time levels reached before it.
  std::optional<std::string> failure;
};

/// One propagation step: fits U^{n+1} beta to step(U^n alpha^n).
RomCoefficients advance_unsteady_rom(const Dictionary& dict, const RomCoefficients& alpha_n,
                                     const minimize::Functional& functional, const StepFunction& step,
                                     const PerturbationConfig& perturbation = {});

/// alpha^0 fitted to the target initial state, then n_steps propagations.
RomTrajectory run_unsteady_rom(const Dictionary& dict, double mu, const DenseVector& initial,
                               const minimize::Functional& functional, const StepFunction& step,
                               Index n_steps, const PerturbationConfig& perturbation = {});

/// Euler dictionaries hold stacked [rho; m; E] trajectories. A single alpha per
/// step is fitted on the density rows and applied to every variable.
RomTrajectory euler_rom_single_expansion(const Dictionary& dict, double mu, const hdm::EulerState& initial,
                                         const minimize::Functional& functional, double dt_over_dx,
                                         Index n_steps, const PerturbationConfig& perturbation = {});

/// One alpha per conserved variable, each fitted on its own block. The
/// coefficients of step n are stored as [alpha_rho; alpha_m; alpha_E].
RomTrajectory euler_rom_per_variable(const Dictionary& dict, double mu, const hdm::EulerState& initial,
                                     const minimize::Functional& functional, double dt_over_dx,
                                     Index n_steps, const PerturbationConfig& perturbation = {});

}  // namespace l1rom::rom
