#include <cmath>

#include "l1rom/rom.hpp"

namespace l1rom::rom {

using minimize::Backend;
using minimize::Functional;
using minimize::Norm;
using minimize::SolveReport;

SolveReport fit_linear(const DenseMatrix& a, const DenseVector& target, const Functional& functional,
                       const DenseVector& warm) {
  functional.validate();
  require_dims(a.rows() == target.size(), "fit_linear: rows(A) != len(target)");
  require_dims(a.cols() == warm.size(), "fit_linear: cols(A) != len(warm)");
  DenseMatrix m = a;
  DenseVector b = -target;
  if (functional.eta > 0.0) std::tie(m, b) = minimize::add_regularization(a, b, functional.eta, functional.q);

  minimize::Options opts;
  opts.huber_eps2 = functional.huber_eps2;
  switch (functional.kind) {
    case Norm::L2: return minimize::qr_least_squares(m, b);
    case Norm::L1:
      if (functional.backend == Backend::LP) return minimize::l1_lp(m, b);
      return minimize::l1_irls(m, b, warm, opts.eps, opts);
    case Norm::Huber:
      return minimize::huber_irls(minimize::linear_residual(m, b), DenseMatrix::Identity(m.cols(), m.cols()),
                                  warm, opts.eps, opts);
  }
  throw ConfigInvalid("fit_linear: unknown functional");
}

namespace {

void check_rank(const DenseMatrix& d, const char* who) {
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(d);
  qr.setThreshold(minimize::kRankTolerance);
  if (qr.rank() < d.cols()) {
    throw DegenerateDictionary(std::string(who) + ": dictionary matrix has rank " + std::to_string(qr.rank()) +
                               " < " + std::to_string(d.cols()));
  }
}

DenseVector unit(Index r, Index k) {
  DenseVector e = DenseVector::Zero(r);
  e(k) = 1.0;
  return e;
}

SteadyRomResult finish(const hdm::SteadyProblem& problem, const DenseMatrix& d, const SolveReport& rep) {
  SteadyRomResult out;
  out.coefficients.alpha = rep.solution;
  out.coefficients.mu_target = problem.mu;
  out.coefficients.converged = rep.converged;
  out.coefficients.iterations = rep.iterations;
  out.coefficients.objective = rep.objective;
  out.reconstruction = d * rep.solution;
  out.residual = problem.residual(out.reconstruction);
  return out;
}

}  // namespace

SteadyRomResult solve_steady_rom(const hdm::SteadyProblem& problem, const Dictionary& dict,
                                 const Functional& functional, const PerturbationConfig& perturbation) {
  dict.validate();
  functional.validate();
  require_dims(dict.state_length() == problem.size(), "solve_steady_rom: state length");
  const DenseMatrix d = dict.matrix();
  if (!perturbation.enabled) check_rank(d, "solve_steady_rom");
  const Index r = dict.size();

  if (problem.linear) {
    // Reduced operator A D; iterative backends start from zero.
    DenseMatrix ad = DenseMatrix(problem.a * d);
    ad = rank_repair(ad, perturbation, variable_range(ad));
    const SolveReport rep = fit_linear(ad, -problem.b, functional, DenseVector::Zero(r));
    return finish(problem, d, rep);
  }

  const DenseVector z0 = unit(r, dict.nearest(problem.mu));
  minimize::NonlinearResidual res = problem.as_residual();
  DenseMatrix basis = rank_repair(d, perturbation, variable_range(d));
  if (functional.eta > 0.0) std::tie(res, basis) = minimize::add_regularization(res, basis, functional.eta);
  minimize::Options opts;
  opts.huber_eps2 = functional.huber_eps2;
  SolveReport rep;
  switch (functional.kind) {
    case Norm::L2: rep = minimize::gauss_newton_l2(res, basis, z0, opts.eps, opts); break;
    case Norm::L1:
      rep = functional.backend == Backend::LP ? minimize::l1_gn_lp(res, basis, z0, opts.eps, opts)
                                              : minimize::l1_gn_irls(res, basis, z0, opts.eps, opts);
      break;
    case Norm::Huber: rep = minimize::huber_irls(res, basis, z0, opts.eps, opts); break;
  }
  return finish(problem, d, rep);
}

SteadyRomResult solve_galerkin(const hdm::SteadyProblem& problem, const Dictionary& dict) {
  dict.validate();
  require_dims(dict.state_length() == problem.size(), "solve_galerkin: state length");
  const DenseMatrix d = dict.matrix();
  check_rank(d, "solve_galerkin");
  const Index r = dict.size();

  SolveReport rep;
  if (problem.linear) {
    const DenseMatrix m = d.transpose() * (problem.a * d);
    const DenseVector rhs = -(d.transpose() * problem.b);
    rep.solution = m.fullPivLu().solve(rhs);
    rep.converged = true;
    rep.iterations = 1;
  } else {
    // Newton on G(alpha) = D^T r(D alpha) with step halving on ||G||.
    DenseVector alpha = unit(r, dict.nearest(problem.mu));
    const auto g_of = [&](const DenseVector& a) -> DenseVector { return d.transpose() * problem.residual(d * a); };
    DenseVector g = g_of(alpha);
    const double tol = 1e-10 * std::max(1.0, g.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < 50 && g.lpNorm<Eigen::Infinity>() >= tol; ++it) {
      const DenseMatrix jac = d.transpose() * (problem.jacobian(d * alpha) * d);
      const DenseVector step = jac.fullPivLu().solve(-g);
      double scale = 1.0;
      bool accepted = false;
      for (int h = 0; h <= 20 && !accepted; ++h, scale *= 0.5) {
        const DenseVector trial = alpha + scale * step;
        const DenseVector g_trial = g_of(trial);
        if (g_trial.allFinite() && g_trial.norm() < g.norm()) {
          alpha = trial;
          g = g_trial;
          accepted = true;
        }
      }
      rep.iterations = it + 1;
      if (!accepted) break;
    }
    if (!(g.lpNorm<Eigen::Infinity>() < tol)) {
      throw NewtonDiverged("solve_galerkin: ||D^T r|| = " + std::to_string(g.lpNorm<Eigen::Infinity>()));
    }
    rep.solution = alpha;
    rep.converged = true;
  }
  rep.objective = (d.transpose() * problem.residual(d * rep.solution)).lpNorm<Eigen::Infinity>();
  return finish(problem, d, rep);
}

}  // namespace l1rom::rom
