#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "l1rom/minimize.hpp"

namespace l1rom::minimize {
namespace {

int cap_or(const Options& opts, int fallback) {
  return opts.max_iterations > 0 ? opts.max_iterations : fallback;
}

void check_inputs(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                  double eps, const char* who) {
  require_dims(d.cols() == z0.size(), std::string(who) + ": cols(D) != len(z0)");
  require_dims(res.dim_in == 0 || d.rows() == res.dim_in, std::string(who) + ": rows(D) != dim_in");
  if (!(eps > 0.0)) throw ConfigInvalid(std::string(who) + ": eps must be > 0");
  if (!z0.allFinite()) throw ConfigInvalid(std::string(who) + ": z0 must be finite");
}

/// Residual and reduced Jacobian W = J(D z) D at the current iterate.
struct Linearization {
  DenseVector r;
  DenseMatrix w;
};

Linearization linearize(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z) {
  const DenseVector u = d * z;
  Linearization lin;
  lin.r = res.eval(u);
  lin.w = res.jacobian(u) * d;
  require_dims(lin.w.rows() == lin.r.size(), "jacobian rows do not match residual length");
  return lin;
}

DenseMatrix scale_rows(const DenseMatrix& m, const DenseVector& w) { return w.asDiagonal() * m; }

/// Step halving on `objective`. Returns the accepted scale, or 0 when every
/// trial increased the objective.
template <typename Objective>
double damped_scale(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z,
                    const DenseVector& dz, double f_old, const Objective& objective,
                    int max_halvings, DenseVector& z_new, DenseVector& r_new, double& f_new) {
  double scale = 1.0;
  const double allowance = 1e-12 * std::abs(f_old);
  for (int h = 0; h <= max_halvings; ++h, scale *= 0.5) {
    z_new = z + scale * dz;
    r_new = res.eval(d * z_new);
    f_new = objective(r_new);
    if (std::isfinite(f_new) && f_new <= f_old + allowance) return scale;
  }
  return 0.0;
}

/// Bookkeeping for "objective increased for N consecutive steps".
struct IncreaseGuard {
  int consecutive = 0;
  int limit = 5;
  void record(bool increased, const char* who) {
    consecutive = increased ? consecutive + 1 : 0;
    if (consecutive >= limit) {
      throw LineSearchFailure(std::string(who) + ": objective increased for " +
                              std::to_string(limit) + " consecutive steps");
    }
  }
};

double l2_objective(const DenseVector& r) { return r.squaredNorm(); }
double l1_objective(const DenseVector& r) { return r.lpNorm<1>(); }

}  // namespace

double irls_floor(const DenseVector& r0) {
  const double rmax = r0.size() > 0 ? r0.cwiseAbs().maxCoeff() : 0.0;
  return 1e-12 * std::max(1.0, rmax);
}

double huber_phi(double x, double m) {
  const double ax = std::abs(x);
  return ax <= m ? x * x : m * (2.0 * ax - m);
}

double huber_threshold(const DenseVector& r, double eps2) {
  const double rmax = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  return eps2 * std::max(1.0, rmax);
}

double huber_objective(const DenseVector& r, double m) {
  double total = 0.0;
  for (Index i = 0; i < r.size(); ++i) total += huber_phi(r(i), m);
  return total;
}

namespace {

/// Minimizer over t >= 1 of ||r + t d||_1. The function is convex and
/// piecewise linear, so the minimizer sits at a breakpoint.
double overrelaxed_step(const DenseVector& r, const DenseVector& d) {
  double slope = 0.0;
  std::vector<std::pair<double, double>> kinks;
  for (Index i = 0; i < r.size(); ++i) {
    if (d(i) == 0.0) continue;
    const double t = -r(i) / d(i);
    // slope at t = 1+
    if (t > 1.0) {
      slope += (r(i) > 0.0 ? 1.0 : -1.0) * d(i);
      kinks.emplace_back(t, 2.0 * std::abs(d(i)));
    } else {
      slope += std::abs(d(i));
    }
  }
  if (slope >= 0.0) return 1.0;
  std::sort(kinks.begin(), kinks.end());
  for (const auto& [t, jump] : kinks) {
    slope += jump;
    if (slope >= 0.0) return t;
  }
  return 1.0;
}

/// Tries the vertex through the nearest hyperplanes a_i z = -b_i with
/// independent rows. Returns the LP multipliers when that vertex is L1-optimal.
std::optional<DenseVector> certify_vertex(const DenseMatrix& a, const DenseVector& b,
                                          const DenseVector& r, DenseVector& z_vertex) {
  const Index n = a.rows();
  const Index k = a.cols();
  if (k == 0 || k > n) return std::nullopt;
  const DenseVector row_norms = a.rowwise().norm();
  // Rows this small carry no information on z; any multiplier in [-1, 1] works.
  const double null_row = 1e-12 * row_norms.maxCoeff();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Rows ordered by the distance from z to their hyperplane.
  DenseVector dist(n);
  for (Index i = 0; i < n; ++i) dist(i) = row_norms(i) > null_row ? std::abs(r(i)) / row_norms(i) : 0.0;
  std::sort(order.begin(), order.end(), [&](Index i, Index j) { return dist(i) < dist(j); });

  // Greedy selection with Gram-Schmidt against the rows already taken.
  std::vector<Index> picked;
  DenseMatrix q(k, k);
  for (Index i : order) {
    if (static_cast<Index>(picked.size()) == k) break;
    if (row_norms(i) <= null_row) continue;
    DenseVector v = a.row(i).transpose();
    for (std::size_t c = 0; c < picked.size(); ++c) v -= q.col(static_cast<Index>(c)).dot(v) * q.col(static_cast<Index>(c));
    const double nv = v.norm();
    if (nv <= 1e-6 * row_norms(i)) continue;
    q.col(static_cast<Index>(picked.size())) = v / nv;
    picked.push_back(i);
  }
  if (static_cast<Index>(picked.size()) < k) return std::nullopt;
  DenseMatrix block(k, k);
  DenseVector rhs(k);
  for (Index i = 0; i < k; ++i) {
    block.row(i) = a.row(picked[static_cast<std::size_t>(i)]);
    rhs(i) = -b(picked[static_cast<std::size_t>(i)]);
  }
  const Eigen::FullPivLU<DenseMatrix> lu(block);
  if (!lu.isInvertible()) return std::nullopt;
  z_vertex = lu.solve(rhs);

  DenseVector rv = a * z_vertex + b;
  std::vector<bool> basic(static_cast<std::size_t>(n), false);
  for (Index i : picked) basic[static_cast<std::size_t>(i)] = true;
  const double scale = rv.cwiseAbs().maxCoeff();
  DenseVector g = DenseVector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (basic[static_cast<std::size_t>(i)] || row_norms(i) <= null_row) continue;
    // Zero residuals accept any multiplier in [-1, 1]; 0 is one valid choice.
    if (std::abs(rv(i)) <= 1e-12 * scale) continue;
    g(i) = rv(i) > 0.0 ? 1.0 : -1.0;
  }
  const DenseVector gb = lu.transpose().solve(-(a.transpose() * g));
  if (gb.cwiseAbs().maxCoeff() > 1.0 + 1e-12) return std::nullopt;
  for (Index i = 0; i < k; ++i) g(picked[static_cast<std::size_t>(i)]) = gb(i);
  return g;
}

}  // namespace

SolveReport l1_irls(const DenseMatrix& a, const DenseVector& b, const DenseVector& z0, double eps,
                    const Options& opts) {
  require_dims(a.rows() == b.size(), "l1_irls: rows(A) != len(b)");
  require_dims(a.cols() == z0.size(), "l1_irls: cols(A) != len(z0)");
  if (!(eps > 0.0)) throw ConfigInvalid("l1_irls: eps must be > 0");
  const int cap = cap_or(opts, kIrlsCap);

  SolveReport report;
  DenseVector z = z0;
  DenseVector r = a * z + b;
  const double tau = irls_floor(r);
  report.residual_norm_history.push_back(r.lpNorm<1>());

  for (int l = 0; l < cap; ++l) {
    const DenseVector w = r.cwiseAbs().cwiseMax(tau).cwiseSqrt().cwiseInverse();
    const DenseVector dz = qr_least_squares(scale_rows(a, w), w.cwiseProduct(r)).solution;
    const double z_norm = z.lpNorm<1>();
    z += overrelaxed_step(r, a * dz) * dz;
    r = a * z + b;
    report.iterations = l + 1;
    report.residual_norm_history.push_back(r.lpNorm<1>());

    DenseVector z_vertex;
    if (auto g = certify_vertex(a, b, r, z_vertex)) {
      z = z_vertex;
      r = a * z + b;
      report.multipliers = std::move(*g);
      report.residual_norm_history.back() = r.lpNorm<1>();
      report.converged = true;
      break;
    }
    // Rows held at the floor make any iterate look stationary, so the step
    // test only counts once every residual is above it.
    const bool exact_fit = r.cwiseAbs().maxCoeff() <= tau;
    if (exact_fit || (dz.lpNorm<1>() <= eps * (1.0 + z_norm) && r.cwiseAbs().minCoeff() > tau)) {
      report.converged = true;
      break;
    }
  }
  report.solution = z;
  report.objective = r.lpNorm<1>();
  return report;
}

SolveReport gauss_newton_l2(const NonlinearResidual& res, const DenseMatrix& d,
                            const DenseVector& z0, double eps, const Options& opts) {
  check_inputs(res, d, z0, eps, "gauss_newton_l2");
  const int cap = cap_or(opts, kGaussNewtonCap);

  SolveReport report;
  DenseVector z = z0;
  Linearization lin = linearize(res, d, z);
  const double g0 = (lin.w.transpose() * lin.r).norm();
  double f = l2_objective(lin.r);
  report.residual_norm_history.push_back(std::sqrt(f));
  IncreaseGuard guard{0, opts.max_increasing_steps};

  for (int l = 0;; ++l) {
    const double g = (lin.w.transpose() * lin.r).norm();
    if (g <= eps * g0) {
      report.converged = true;
      break;
    }
    if (l >= cap) break;

    const DenseVector dz = qr_least_squares(lin.w, lin.r).solution;
    // Predicted decrease at roundoff level: the iterate is stationary.
    const double predicted = f - (lin.w * dz + lin.r).squaredNorm();
    // A step below roundoff in z means the start already sits on a zero residual.
    if (predicted <= 1e-14 * f || dz.norm() <= 1e-14 * std::max(1.0, z.norm())) {
      report.converged = true;
      break;
    }
    DenseVector z_new, r_new;
    double f_new = 0.0;
    const double scale = damped_scale(res, d, z, dz, f, l2_objective, opts.max_halvings, z_new,
                                      r_new, f_new);
    guard.record(scale == 0.0, "gauss_newton_l2");
    report.iterations = l + 1;
    if (scale == 0.0) continue;
    z = z_new;
    f = f_new;
    lin = linearize(res, d, z);
    report.residual_norm_history.push_back(std::sqrt(f));
  }
  report.solution = z;
  report.objective = f;
  return report;
}

SolveReport l1_gn_lp(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                     double eps, const Options& opts) {
  check_inputs(res, d, z0, eps, "l1_gn_lp");
  const int cap = cap_or(opts, kGaussNewtonCap);

  SolveReport report;
  DenseVector z = z0;
  Linearization lin = linearize(res, d, z);
  const double f0 = l1_objective(lin.r);
  double f = f0;
  report.residual_norm_history.push_back(f);
  IncreaseGuard guard{0, opts.max_increasing_steps};

  if (f0 == 0.0) report.converged = true;
  for (int l = 0; l < cap && !report.converged; ++l) {
    const DenseVector dz = l1_lp(lin.w, lin.r).solution;
    const double predicted = l1_objective(lin.w * dz + lin.r);
    if ((l > 0 && std::abs(predicted - f) <= eps * f0) || dz.norm() <= 1e-14 * std::max(1.0, z.norm())) {
      report.converged = true;
      break;
    }
    DenseVector z_new, r_new;
    double f_new = 0.0;
    const double scale = damped_scale(res, d, z, dz, f, l1_objective, opts.max_halvings, z_new,
                                      r_new, f_new);
    guard.record(scale == 0.0, "l1_gn_lp");
    report.iterations = l + 1;
    if (scale == 0.0) continue;
    z = z_new;
    f = f_new;
    lin = linearize(res, d, z);
    report.residual_norm_history.push_back(f);
  }
  report.solution = z;
  report.objective = f;
  return report;
}

namespace {

/// Shared loop of the two IRLS-based Gauss-Newton methods. `weights` maps the
/// current residual to the row scaling and `objective` to the damped merit.
template <typename Weights, typename Merit>
SolveReport reweighted_gauss_newton(const NonlinearResidual& res, const DenseMatrix& d,
                                    const DenseVector& z0, double eps, const Options& opts,
                                    const char* who, const Weights& weights, const Merit& merit,
                                    const std::function<double(const DenseVector&)>& report_objective) {
  check_inputs(res, d, z0, eps, who);
  const int cap = cap_or(opts, kIrlsCap);

  SolveReport report;
  DenseVector z = z0;
  Linearization lin = linearize(res, d, z);
  const DenseVector r0 = lin.r;
  report.residual_norm_history.push_back(lin.r.lpNorm<1>());
  IncreaseGuard guard{0, opts.max_increasing_steps};

  for (int l = 0; l < cap; ++l) {
    const DenseVector w = weights(lin.r, r0);
    const DenseVector dz = qr_least_squares(scale_rows(lin.w, w), w.cwiseProduct(lin.r)).solution;
    const auto objective = merit(lin.r);
    const double f = objective(lin.r);

    DenseVector z_new, r_new;
    double f_new = 0.0;
    const double scale = damped_scale(res, d, z, dz, f, objective, opts.max_halvings, z_new,
                                      r_new, f_new);
    report.iterations = l + 1;
    const double z_norm = z.lpNorm<1>();
    if (scale == 0.0) {
      // No decrease along the reweighted step. A step already below the
      // stopping threshold, or a predicted decrease at roundoff level of the
      // merit (ill-conditioned D), means the iterate is stationary.
      const double predicted = f - objective(lin.r + lin.w * dz);
      if (dz.lpNorm<1>() <= eps * (1.0 + z_norm) || predicted <= 1e-10 * f) {
        report.converged = true;
        break;
      }
      guard.record(true, who);
      continue;
    }
    guard.record(false, who);
    z = z_new;
    lin = linearize(res, d, z);
    report.residual_norm_history.push_back(lin.r.lpNorm<1>());
    if ((scale * dz).lpNorm<1>() <= eps * (1.0 + z_norm)) {
      report.converged = true;
      break;
    }
  }
  report.solution = z;
  report.objective = report_objective(lin.r);
  return report;
}

}  // namespace

SolveReport l1_gn_irls(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                       double eps, const Options& opts) {
  const auto weights = [](const DenseVector& r, const DenseVector& r0) -> DenseVector {
    return r.cwiseAbs().cwiseMax(irls_floor(r0)).cwiseSqrt().cwiseInverse();
  };
  const auto merit = [](const DenseVector&) { return l1_objective; };
  return reweighted_gauss_newton(res, d, z0, eps, opts, "l1_gn_irls", weights, merit,
                                 l1_objective);
}

SolveReport huber_irls(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                       double eps, const Options& opts) {
  const double eps2 = opts.huber_eps2;
  if (!(eps2 > 0.0)) throw ConfigInvalid("huber_irls: huber_eps2 must be > 0");
  const auto weights = [eps2](const DenseVector& r, const DenseVector&) -> DenseVector {
    const double m = huber_threshold(r, eps2);
    DenseVector w(r.size());
    for (Index i = 0; i < r.size(); ++i) {
      const double ar = std::abs(r(i));
      w(i) = ar <= m ? 1.0 : std::sqrt(m / ar);
    }
    return w;
  };
  const auto merit = [eps2](const DenseVector& r) {
    const double m = huber_threshold(r, eps2);
    return [m](const DenseVector& x) { return huber_objective(x, m); };
  };
  const auto final_objective = [eps2](const DenseVector& r) {
    return huber_objective(r, huber_threshold(r, eps2));
  };
  return reweighted_gauss_newton(res, d, z0, eps, opts, "huber_irls", weights, merit,
                                 final_objective);
}

}  // namespace l1rom::minimize
