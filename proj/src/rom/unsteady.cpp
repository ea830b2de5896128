#include "l1rom/rom.hpp"

namespace l1rom::rom {

using minimize::Functional;
using minimize::Norm;

namespace {

double functional_norm(const DenseVector& r, const Functional& f) {
  return f.kind == Norm::L2 ? r.norm() : r.lpNorm<1>();
}

DenseVector unit(Index r, Index k) {
  DenseVector e = DenseVector::Zero(r);
  e(k) = 1.0;
  return e;
}

/// Fit of one variable block at time level n.
struct BlockFit {
  DenseVector alpha;
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
};

BlockFit fit_block(const DenseMatrix& u, const DenseVector& target, const Functional& functional,
                   const DenseVector& warm, const PerturbationConfig& perturbation, Index n, VariableTag tag) {
  PerturbationConfig cfg = perturbation;
  cfg.seed = derive_seed(perturbation.seed, n, tag);
  const DenseMatrix a = rank_repair(u, cfg, variable_range(u));
  const auto rep = fit_linear(a, target, functional, warm);
  BlockFit out;
  out.alpha = rep.solution;
  out.converged = rep.converged;
  out.iterations = rep.iterations;
  out.residual = functional_norm(u * rep.solution - target, functional);
  return out;
}

RomCoefficients make_coefficients(const BlockFit& fit, double mu, Index n) {
  RomCoefficients c;
  c.alpha = fit.alpha;
  c.mu_target = mu;
  c.time_index = n;
  c.converged = fit.converged;
  c.iterations = fit.iterations;
  c.objective = fit.residual;
  return c;
}

void require_unsteady(const Dictionary& dict, Index n_steps, const char* who) {
  dict.validate();
  if (!dict.unsteady()) throw ConfigInvalid(std::string(who) + ": dictionary has no trajectories");
  if (n_steps + 1 > dict.steps()) {
    throw ConfigInvalid(std::string(who) + ": dictionary holds " + std::to_string(dict.steps() - 1) +
                        " steps, " + std::to_string(n_steps) + " requested");
  }
}

// Solver errors end the propagation but keep the levels already computed.
template <typename F>
bool guarded(RomTrajectory& traj, Index step, F&& advance) {
  try {
    advance();
    return true;
  } catch (const NonPhysicalState& e) {
    traj.failure = "step " + std::to_string(step) + ": " + e.what();
  } catch (const LineSearchFailure& e) {
    traj.failure = "step " + std::to_string(step) + ": " + e.what();
  } catch (const Stalled& e) {
    traj.failure = "step " + std::to_string(step) + ": " + e.what();
  } catch (const NewtonDiverged& e) {
    traj.failure = "step " + std::to_string(step) + ": " + e.what();
  } catch (const RankDeficient& e) {
    traj.failure = "step " + std::to_string(step) + ": " + e.what();
  }
  return false;
}

}  // namespace

RomCoefficients advance_unsteady_rom(const Dictionary& dict, const RomCoefficients& alpha_n,
                                     const Functional& functional, const StepFunction& step,
                                     const PerturbationConfig& perturbation) {
  const Index n = alpha_n.time_index;
  require_dims(alpha_n.alpha.size() == dict.size(), "advance_unsteady_rom: alpha length");
  const DenseVector w = dict.matrix_at(n) * alpha_n.alpha;
  const DenseVector b = step(w);
  const BlockFit fit = fit_block(dict.matrix_at(n + 1), b, functional, alpha_n.alpha, perturbation, n + 1, dict.tag);
  return make_coefficients(fit, alpha_n.mu_target, n + 1);
}

RomTrajectory run_unsteady_rom(const Dictionary& dict, double mu, const DenseVector& initial,
                               const Functional& functional, const StepFunction& step, Index n_steps,
                               const PerturbationConfig& perturbation) {
  require_unsteady(dict, n_steps, "run_unsteady_rom");
  require_dims(initial.size() == dict.state_length(), "run_unsteady_rom: initial state length");
  RomTrajectory traj;
  traj.functional_used = functional;

  const BlockFit first = fit_block(dict.matrix_at(0), initial, functional, unit(dict.size(), dict.nearest(mu)),
                                   perturbation, 0, dict.tag);
  RomCoefficients c = make_coefficients(first, mu, 0);
  for (Index n = 0;; ++n) {
    traj.reconstructed.push_back(dict.matrix_at(n) * c.alpha);
    traj.residual_norms.push_back(c.objective);
    traj.coefficients.push_back(c);
    if (n == n_steps) break;
    if (!guarded(traj, n + 1, [&] { c = advance_unsteady_rom(dict, c, functional, step, perturbation); })) break;
  }
  return traj;
}

namespace {

constexpr VariableTag kBlocks[3] = {VariableTag::Rho, VariableTag::M, VariableTag::E};

DenseMatrix rows(const DenseMatrix& m, Index block, Index n) { return m.middleRows(block * n, n); }

DenseVector euler_update(const DenseVector& w, double dt_over_dx) {
  return hdm::euler_step(hdm::EulerState::from_stacked(w), dt_over_dx).stacked();
}

}  // namespace

RomTrajectory euler_rom_single_expansion(const Dictionary& dict, double mu, const hdm::EulerState& initial,
                                         const Functional& functional, double dt_over_dx, Index n_steps,
                                         const PerturbationConfig& perturbation) {
  require_unsteady(dict, n_steps, "euler_rom_single_expansion");
  const Index n = initial.size();
  require_dims(dict.state_length() == 3 * n, "euler_rom_single_expansion: dictionary must hold [rho; m; E]");
  RomTrajectory traj;
  traj.functional_used = functional;

  BlockFit fit = fit_block(rows(dict.matrix_at(0), 0, n), initial.rho, functional,
                           unit(dict.size(), dict.nearest(mu)), perturbation, 0, VariableTag::Rho);
  for (Index k = 0;; ++k) {
    const DenseMatrix u = dict.matrix_at(k);
    traj.reconstructed.push_back(u * fit.alpha);
    traj.residual_norms.push_back(fit.residual);
    traj.coefficients.push_back(make_coefficients(fit, mu, k));
    if (k == n_steps) break;
    const bool ok = guarded(traj, k + 1, [&] {
      const DenseVector b = euler_update(traj.reconstructed.back(), dt_over_dx);
      fit = fit_block(rows(dict.matrix_at(k + 1), 0, n), b.head(n), functional, fit.alpha, perturbation, k + 1,
                      VariableTag::Rho);
    });
    if (!ok) break;
  }
  return traj;
}

RomTrajectory euler_rom_per_variable(const Dictionary& dict, double mu, const hdm::EulerState& initial,
                                     const Functional& functional, double dt_over_dx, Index n_steps,
                                     const PerturbationConfig& perturbation) {
  require_unsteady(dict, n_steps, "euler_rom_per_variable");
  const Index n = initial.size();
  require_dims(dict.state_length() == 3 * n, "euler_rom_per_variable: dictionary must hold [rho; m; E]");
  const Index r = dict.size();
  RomTrajectory traj;
  traj.functional_used = functional;

  const DenseVector u0 = initial.stacked();
  BlockFit fits[3];
  for (Index v = 0; v < 3; ++v) {
    fits[v] = fit_block(rows(dict.matrix_at(0), v, n), u0.segment(v * n, n), functional, unit(r, dict.nearest(mu)),
                        perturbation, 0, kBlocks[v]);
  }
  for (Index k = 0;; ++k) {
    const DenseMatrix u = dict.matrix_at(k);
    DenseVector w(3 * n);
    RomCoefficients c;
    c.alpha.resize(3 * r);
    c.mu_target = mu;
    c.time_index = k;
    double residual = 0.0;
    for (Index v = 0; v < 3; ++v) {
      w.segment(v * n, n) = rows(u, v, n) * fits[v].alpha;
      c.alpha.segment(v * r, r) = fits[v].alpha;
      c.converged = c.converged && fits[v].converged;
      c.iterations += fits[v].iterations;
      residual += fits[v].residual;
    }
    c.objective = residual;
    traj.reconstructed.push_back(w);
    traj.residual_norms.push_back(residual);
    traj.coefficients.push_back(c);
    if (k == n_steps) break;
    const bool ok = guarded(traj, k + 1, [&] {
      const DenseVector b = euler_update(w, dt_over_dx);
      const DenseMatrix next = dict.matrix_at(k + 1);
      for (Index v = 0; v < 3; ++v) {
        fits[v] = fit_block(rows(next, v, n), b.segment(v * n, n), functional, fits[v].alpha, perturbation, k + 1,
                            kBlocks[v]);
      }
    });
    if (!ok) break;
  }
  return traj;
}

}  // namespace l1rom::rom
