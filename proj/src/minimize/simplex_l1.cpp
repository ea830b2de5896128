// Linear L1 fitting as the linear program
//
//   min 1^T (s + t)   s.t.  A z - s + t = -b,  s >= 0,  t >= 0,  z free,
//
// solved by a dense primal simplex with Bland's rule.
//
// The program has N equality rows and 2N + r columns. The columns of s_i and
// t_i are -e_i and +e_i, so every basis is described by
//   K     : the basic components of z,
//   R     : rows whose s_i/t_i pair is nonbasic (|R| = |K|, residual zero),
//   sigma : for rows outside R, +1 if s_i is basic and -1 if t_i is basic.
// All primal and dual quantities follow from the k x k block A[R, K], which is
// refactored on every pivot, so the iterate never drifts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "l1rom/minimize.hpp"

namespace l1rom::minimize {
namespace {

struct Basis {
  std::vector<Index> k_cols;   // basic z components, paired with r_rows
  std::vector<Index> r_rows;   // interpolated rows
  std::vector<bool> in_k;
  std::vector<bool> in_r;
  std::vector<int> sigma;      // valid for rows outside R
};

struct Point {
  DenseVector z;
  DenseVector e;   // A z - target
  DenseVector y;   // simplex multipliers
  Eigen::PartialPivLU<DenseMatrix> block_lu;
};

DenseMatrix gather(const DenseMatrix& a, const std::vector<Index>& rows,
                   const std::vector<Index>& cols) {
  DenseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  }
  return out;
}

Point evaluate(const DenseMatrix& a, const DenseVector& target, const Basis& basis) {
  const Index n_rows = a.rows();
  const Index k = static_cast<Index>(basis.k_cols.size());
  Point p;
  p.z = DenseVector::Zero(a.cols());
  p.y = DenseVector::Zero(n_rows);
  for (Index i = 0; i < n_rows; ++i) {
    if (!basis.in_r[static_cast<std::size_t>(i)]) p.y(i) = -basis.sigma[static_cast<std::size_t>(i)];
  }
  if (k > 0) {
    const DenseMatrix block = gather(a, basis.r_rows, basis.k_cols);
    p.block_lu.compute(block);
    DenseVector rhs(k);
    for (Index i = 0; i < k; ++i) rhs(i) = target(basis.r_rows[static_cast<std::size_t>(i)]);
    const DenseVector zk = p.block_lu.solve(rhs);
    for (Index j = 0; j < k; ++j) p.z(basis.k_cols[static_cast<std::size_t>(j)]) = zk(j);

    // A[R,K]^T y_R = -A[Rbar,K]^T y_Rbar
    DenseVector g = DenseVector::Zero(k);
    for (Index i = 0; i < n_rows; ++i) {
      if (basis.in_r[static_cast<std::size_t>(i)]) continue;
      for (Index j = 0; j < k; ++j) g(j) -= a(i, basis.k_cols[static_cast<std::size_t>(j)]) * p.y(i);
    }
    const DenseVector yr = p.block_lu.transpose().solve(g);
    for (Index i = 0; i < k; ++i) p.y(basis.r_rows[static_cast<std::size_t>(i)]) = yr(i);
  }
  p.e = a * p.z - target;
  for (Index i : basis.r_rows) p.e(i) = 0.0;
  return p;
}

}  // namespace

SolveReport l1_lp(const DenseMatrix& a, const DenseVector& b) {
  require_dims(a.rows() == b.size(), "l1_lp: rows(A) != len(b)");
  require_dims(a.rows() >= a.cols(), "l1_lp: A must be skinny");
  const Index n_rows = a.rows();
  const Index n_cols = a.cols();
  const DenseVector target = -b;

  Basis basis;
  basis.in_k.assign(static_cast<std::size_t>(n_cols), false);
  basis.in_r.assign(static_cast<std::size_t>(n_rows), false);
  basis.sigma.assign(static_cast<std::size_t>(n_rows), 1);
  for (Index i = 0; i < n_rows; ++i) basis.sigma[static_cast<std::size_t>(i)] = (-target(i) >= 0.0) ? 1 : -1;

  const double amax = n_rows > 0 && n_cols > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double cost_tol = 1e-9;
  // Relative to the data: Gauss-Newton corrections near a zero residual have a tiny target.
  const double feas_tol = 1e-13 * (target.size() > 0 ? target.cwiseAbs().maxCoeff() : 0.0);
  const long pivot_cap = 50L * (2L * n_rows + n_cols);

  // Bland ordering: z+_j = 2j, z-_j = 2j+1, s_i = 2r + i, t_i = 2r + N + i.
  const auto s_index = [&](Index i) { return 2 * n_cols + i; };
  const auto t_index = [&](Index i) { return 2 * n_cols + n_rows + i; };

  SolveReport report;
  long pivots = 0;
  Point point = evaluate(a, target, basis);
  while (true) {
    // Entering variable: smallest Bland index with negative reduced cost.
    Index enter = -1;
    Index enter_col = -1;   // z component, or -1
    Index enter_row = -1;   // row in R whose s/t enters, or -1
    int direction = 0;      // +1 increase z_j / enter s_p, -1 decrease z_j / enter t_p
    if (amax > 0.0) {
      for (Index j = 0; j < n_cols && enter < 0; ++j) {
        if (basis.in_k[static_cast<std::size_t>(j)]) continue;
        const double d = -a.col(j).dot(point.y);
        if (d < -cost_tol) {
          enter = 2 * j, enter_col = j, direction = +1;
        } else if (-d < -cost_tol) {
          enter = 2 * j + 1, enter_col = j, direction = -1;
        }
      }
      if (enter < 0) {
        Index best = std::numeric_limits<Index>::max();
        for (Index p : basis.r_rows) {
          if (1.0 + point.y(p) < -cost_tol && s_index(p) < best) {
            best = s_index(p), enter_row = p, direction = +1;
          }
          if (1.0 - point.y(p) < -cost_tol && t_index(p) < best) {
            best = t_index(p), enter_row = p, direction = -1;
          }
        }
        if (enter_row >= 0) enter = best;
      }
    }
    if (enter < 0) {
      report.converged = true;
      break;
    }
    if (++pivots > pivot_cap) {
      throw Stalled("l1_lp: simplex exceeded " + std::to_string(pivot_cap) + " pivots");
    }

    // Direction of z as the entering variable grows.
    const Index k = static_cast<Index>(basis.k_cols.size());
    DenseVector dz = DenseVector::Zero(n_cols);
    if (enter_col >= 0) {
      dz(enter_col) = direction;
      if (k > 0) {
        DenseVector rhs(k);
        for (Index i = 0; i < k; ++i) rhs(i) = -a(basis.r_rows[static_cast<std::size_t>(i)], enter_col) * direction;
        const DenseVector dzk = point.block_lu.solve(rhs);
        for (Index j = 0; j < k; ++j) dz(basis.k_cols[static_cast<std::size_t>(j)]) = dzk(j);
      }
    } else {
      DenseVector rhs = DenseVector::Zero(k);
      const auto pos = std::find(basis.r_rows.begin(), basis.r_rows.end(), enter_row) - basis.r_rows.begin();
      rhs(pos) = direction;
      const DenseVector dzk = point.block_lu.solve(rhs);
      for (Index j = 0; j < k; ++j) dz(basis.k_cols[static_cast<std::size_t>(j)]) = dzk(j);
    }
    const DenseVector de = a * dz;

    // Ratio test over rows whose basic s/t decreases.
    double max_de = 0.0;
    for (Index i = 0; i < n_rows; ++i) {
      if (!basis.in_r[static_cast<std::size_t>(i)]) max_de = std::max(max_de, std::abs(de(i)));
    }
    const double pivot_tol = 1e-10 * max_de;
    std::vector<std::pair<Index, double>> candidates;
    double best_ratio = std::numeric_limits<double>::infinity();
    double max_rate = 0.0;
    for (Index i = 0; i < n_rows; ++i) {
      if (basis.in_r[static_cast<std::size_t>(i)]) continue;
      const int sg = basis.sigma[static_cast<std::size_t>(i)];
      const double rate = sg * de(i);
      if (rate >= -pivot_tol) continue;
      const double ratio = std::max(0.0, sg * point.e(i)) / -rate;
      candidates.emplace_back(i, ratio);
      best_ratio = std::min(best_ratio, ratio);
      max_rate = std::max(max_rate, -rate);
    }
    // Bland tie-break among the minimizing rows. Ties are measured in the
    // residual change they cause, so a long direction cannot push another
    // row past zero by more than feas_tol.
    const double slack = 1e-12 * best_ratio + (max_rate > 0.0 ? feas_tol / max_rate : 0.0);
    Index leave = -1;
    Index best_index = std::numeric_limits<Index>::max();
    for (const auto& [i, ratio] : candidates) {
      if (ratio > best_ratio + slack) continue;
      const Index var_index = basis.sigma[static_cast<std::size_t>(i)] > 0 ? s_index(i) : t_index(i);
      if (var_index < best_index) best_index = var_index, leave = i;
    }
    if (leave < 0) {
      throw Stalled("l1_lp: no leaving row for an improving direction");
    }

    // Pivot.
    basis.in_r[static_cast<std::size_t>(leave)] = true;
    if (enter_col >= 0) {
      basis.in_k[static_cast<std::size_t>(enter_col)] = true;
      basis.k_cols.push_back(enter_col);
      basis.r_rows.push_back(leave);
    } else {
      const auto it = std::find(basis.r_rows.begin(), basis.r_rows.end(), enter_row);
      *it = leave;
      basis.in_r[static_cast<std::size_t>(enter_row)] = false;
      basis.sigma[static_cast<std::size_t>(enter_row)] = direction;
    }
    point = evaluate(a, target, basis);
  }

  report.solution = point.z;
  report.objective = (a * point.z + b).lpNorm<1>();
  report.iterations = static_cast<int>(pivots);
  report.residual_norm_history = {report.objective};
  report.multipliers = DenseVector(-point.y);
  return report;
}

}  // namespace l1rom::minimize
