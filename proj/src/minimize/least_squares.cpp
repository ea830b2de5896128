#include <cmath>

#include "l1rom/minimize.hpp"

namespace l1rom::minimize {

SolveReport qr_least_squares(const DenseMatrix& a, const DenseVector& b) {
  require_dims(a.rows() == b.size(), "qr_least_squares: rows(A) != len(b)");
  require_dims(a.rows() >= a.cols(), "qr_least_squares: A must be skinny");
  const Index n = a.cols();

  SolveReport report;
  if (n == 0) {
    report.solution = DenseVector::Zero(0);
    report.objective = b.squaredNorm();
    report.converged = true;
    return report;
  }

  Eigen::HouseholderQR<DenseMatrix> qr(a);
  const auto r = qr.matrixQR().topLeftCorner(n, n);
  const double amax = a.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    if (!(std::abs(r(i, i)) >= kRankTolerance * amax) || amax == 0.0) {
      throw RankDeficient("qr_least_squares: |R(" + std::to_string(i) + "," + std::to_string(i) +
                          ")| below rank threshold");
    }
  }

  // z = -R^{-1} (Q^T b)_{1:n}
  DenseVector qtb = qr.householderQ().transpose() * b;
  DenseVector z = -r.triangularView<Eigen::Upper>().solve(qtb.head(n));

  report.solution = z;
  report.objective = (a * z + b).squaredNorm();
  report.iterations = 1;
  report.converged = true;
  report.residual_norm_history = {std::sqrt(report.objective)};
  return report;
}

std::pair<DenseMatrix, DenseVector> add_regularization(const DenseMatrix& a, const DenseVector& b,
                                                       double eta, int q) {
  require_dims(a.rows() == b.size(), "add_regularization: rows(A) != len(b)");
  if (eta < 0.0) throw ConfigInvalid("add_regularization: eta must be >= 0");
  if (q != 1 && q != 2) throw ConfigInvalid("add_regularization: q must be 1 or 2");
  if (eta == 0.0) return {a, b};

  const Index n = a.cols();
  DenseMatrix stacked(a.rows() + n, n);
  stacked.topRows(a.rows()) = a;
  stacked.bottomRows(n) = eta * DenseMatrix::Identity(n, n);
  DenseVector rhs = DenseVector::Zero(b.size() + n);
  rhs.head(b.size()) = b;
  return {stacked, rhs};
}

std::pair<NonlinearResidual, DenseMatrix> add_regularization(const NonlinearResidual& res,
                                                             const DenseMatrix& d, double eta) {
  if (eta < 0.0) throw ConfigInvalid("add_regularization: eta must be >= 0");
  if (eta == 0.0) return {res, d};

  const Index n_state = d.rows();
  const Index n_coef = d.cols();
  DenseMatrix d_aug(n_state + n_coef, n_coef);
  d_aug.topRows(n_state) = d;
  d_aug.bottomRows(n_coef) = DenseMatrix::Identity(n_coef, n_coef);

  NonlinearResidual aug;
  aug.dim_in = n_state + n_coef;
  aug.dim_out = res.dim_out + n_coef;
  aug.eval = [res, n_state, n_coef, eta](const DenseVector& u) {
    DenseVector out(res.dim_out + n_coef);
    out.head(res.dim_out) = res.eval(u.head(n_state));
    out.tail(n_coef) = eta * u.tail(n_coef);
    return out;
  };
  aug.jacobian = [res, n_state, n_coef, eta](const DenseVector& u) {
    const SparseMatrix j = res.jacobian(u.head(n_state));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(j.nonZeros() + n_coef));
    for (Index k = 0; k < j.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(j, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Index i = 0; i < n_coef; ++i) {
      trips.emplace_back(res.dim_out + i, n_state + i, eta);
    }
    SparseMatrix out(res.dim_out + n_coef, n_state + n_coef);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  };
  return {aug, d_aug};
}

NonlinearResidual linear_residual(const DenseMatrix& a, const DenseVector& b) {
  require_dims(a.rows() == b.size(), "linear_residual: rows(A) != len(b)");
  NonlinearResidual res;
  res.dim_in = a.cols();
  res.dim_out = a.rows();
  const SparseMatrix a_sparse = a.sparseView();
  res.eval = [a, b](const DenseVector& u) -> DenseVector { return a * u + b; };
  res.jacobian = [a_sparse](const DenseVector&) { return a_sparse; };
  return res;
}

}  // namespace l1rom::minimize
