#pragma once

// Residual minimization in the L2, L1 and Huber senses.
//
// Sign convention used throughout: the residual of a linear problem is
// r = A z + b, so fitting A z to a target y means passing b = -y.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "l1rom/types.hpp"

namespace l1rom::minimize {

enum class Norm { L2, L1, Huber };
enum class Backend { QR, LP, IRLS };

/// Choice of functional J(r, beta) and the algorithm that minimizes it.
struct Functional {
  Norm kind = Norm::L2;
  Backend backend = Backend::QR;
  double eta = 0.0;         // coefficient regularization weight
  int q = 2;                // norm index of the regularizer (1 or 2)
  double huber_eps2 = 1e-6;

  /// Throws ConfigInvalid if kind/backend/eta/q are inconsistent.
  void validate() const;
  std::string name() const;

  static Functional l2() { return {Norm::L2, Backend::QR, 0.0, 2, 1e-6}; }
  static Functional l1_lp() { return {Norm::L1, Backend::LP, 0.0, 1, 1e-6}; }
  static Functional l1_irls() { return {Norm::L1, Backend::IRLS, 0.0, 1, 1e-6}; }
  static Functional huber() { return {Norm::Huber, Backend::IRLS, 0.0, 1, 1e-6}; }
};

/// Parses "l2", "l1lp", "l1irls", "huber".
Functional parse_functional(const std::string& token);

struct SolveReport {
  DenseVector solution;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_norm_history;
  /// LP only: g with g_i = sign(r_i) off the interpolated rows, |g_i| <= 1 on
  /// them and A^T g = 0 at optimality.
  std::optional<DenseVector> multipliers;
};

/// A residual r(u) with Jacobian J(u). Minimizers evaluate it at u = D z.
struct NonlinearResidual {
  std::function<DenseVector(const DenseVector&)> eval;
  std::function<SparseMatrix(const DenseVector&)> jacobian;
  Index dim_in = 0;
  Index dim_out = 0;
};

/// Wraps r(u) = A u + b.
NonlinearResidual linear_residual(const DenseMatrix& a, const DenseVector& b);

struct Options {
  double eps = 1e-8;
  int max_iterations = 0;  // 0 selects the per-algorithm default
  int max_halvings = 20;
  int max_increasing_steps = 5;
  double huber_eps2 = 1e-6;
};

inline constexpr int kGaussNewtonCap = 100;
inline constexpr int kIrlsCap = 200;

/// Smallest |R_ii| relative to max|A_ij| accepted by qr_least_squares.
inline constexpr double kRankTolerance = 1e-12;

// Linear problems.

SolveReport qr_least_squares(const DenseMatrix& a, const DenseVector& b);
SolveReport l1_lp(const DenseMatrix& a, const DenseVector& b);
SolveReport l1_irls(const DenseMatrix& a, const DenseVector& b, const DenseVector& z0,
                    double eps = 1e-8, const Options& opts = {});

// Nonlinear problems: minimize over z the norm of res(D z).

SolveReport gauss_newton_l2(const NonlinearResidual& res, const DenseMatrix& d,
                            const DenseVector& z0, double eps = 1e-8,
                            const Options& opts = {});
SolveReport l1_gn_lp(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                     double eps = 1e-8, const Options& opts = {});
SolveReport l1_gn_irls(const NonlinearResidual& res, const DenseMatrix& d,
                       const DenseVector& z0, double eps = 1e-8, const Options& opts = {});
SolveReport huber_irls(const NonlinearResidual& res, const DenseMatrix& d, const DenseVector& z0,
                       double eps = 1e-8, const Options& opts = {});

/// Stacks [A; eta I] and [b; 0] so that the stacked residual carries the
/// coefficient penalty.
std::pair<DenseMatrix, DenseVector> add_regularization(const DenseMatrix& a, const DenseVector& b,
                                                       double eta, int q);

/// Same stacking for a nonlinear residual. The returned dictionary is [D; I],
/// so the augmented state is u' = (D z, z) and the residual is (r(D z), eta z).
std::pair<NonlinearResidual, DenseMatrix> add_regularization(const NonlinearResidual& res,
                                                             const DenseMatrix& d, double eta);

// Objectives.

double huber_phi(double x, double m);
double huber_threshold(const DenseVector& r, double eps2);
double huber_objective(const DenseVector& r, double m);

/// IRLS weight floor: tau = 1e-12 max(1, ||r0||_inf).
double irls_floor(const DenseVector& r0);

}  // namespace l1rom::minimize
