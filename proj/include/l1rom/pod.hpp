#pragma once

// Proper orthogonal decomposition of snapshot matrices.

#include <vector>

#include "l1rom/types.hpp"

namespace l1rom::pod {

/// Columns are snapshots ordered by time.
struct SnapshotMatrix {
  DenseMatrix s;
  DenseVector x;
  std::vector<double> times;
};

struct PodBasis {
  DenseMatrix modes;        // Np x M, orthonormal
  DenseVector eigenvalues;  // all eigenvalues of S^T S, decreasing
  Index m = 0;
};

PodBasis pod_compute(const SnapshotMatrix& snapshots, Index m);

/// sum_{l > m} lambda_l / sum_l lambda_l.
double truncation_error(const PodBasis& basis, Index m);

/// Squared Frobenius distance between S and its projection on the first m modes.
double projection_error(const SnapshotMatrix& snapshots, const PodBasis& basis, Index m);

/// Snapshots of the traveling discontinuity at t_k = k / n, k = 0..n.
SnapshotMatrix discontinuity_snapshots(Index n);

struct DecayRow {
  Index n = 0;
  Index ell = 0;
  double ratio = 0.0;  // sigma_ell / sigma_1
  double sigma = 0.0;
};

/// Singular value spectra of the traveling discontinuity, one block per n.
/// Studies run concurrently; rows are ordered by n then ell.
std::vector<DecayRow> pod_decay_study(const std::vector<Index>& n_list);

/// Least-squares slope of log(ratio) against log(ell) over ell in [lo, hi].
double loglog_slope(const std::vector<DecayRow>& rows, Index n, Index lo, Index hi);

}  // namespace l1rom::pod
