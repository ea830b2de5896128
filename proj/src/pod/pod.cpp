#include "l1rom/pod.hpp"

#include <cmath>
#include <future>

#include "l1rom/hdm.hpp"

namespace l1rom::pod {

PodBasis pod_compute(const SnapshotMatrix& snapshots, Index m) {
  const DenseMatrix& s = snapshots.s;
  if (m < 0 || m > std::min(s.rows(), s.cols())) {
    throw DimensionMismatch("pod_compute: M must lie in [0, min(rows, cols)]");
  }
  if (!s.allFinite()) throw DimensionMismatch("pod_compute: snapshot matrix is not finite");
  Eigen::BDCSVD<DenseMatrix> svd(s, Eigen::ComputeThinU);
  PodBasis out;
  out.m = m;
  out.modes = svd.matrixU().leftCols(m);
  out.eigenvalues = svd.singularValues().array().square();
  return out;
}

double truncation_error(const PodBasis& basis, Index m) {
  const DenseVector& lambda = basis.eigenvalues;
  if (m < 0 || m > lambda.size()) throw DimensionMismatch("truncation_error: M out of range");
  const double total = lambda.sum();
  if (total == 0.0) return 0.0;
  return lambda.tail(lambda.size() - m).sum() / total;
}

double projection_error(const SnapshotMatrix& snapshots, const PodBasis& basis, Index m) {
  if (m > basis.modes.cols()) throw DimensionMismatch("projection_error: basis holds fewer than M modes");
  const auto phi = basis.modes.leftCols(m);
  return (snapshots.s - phi * (phi.transpose() * snapshots.s)).squaredNorm();
}

SnapshotMatrix discontinuity_snapshots(Index n) {
  SnapshotMatrix out;
  out.s.resize(n + 1, n + 1);
  out.x = DenseVector::LinSpaced(n + 1, 0.0, 1.0);
  for (Index k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    out.times.push_back(t);
    out.s.col(k) = hdm::advect1d_exact(n, t);
  }
  return out;
}

std::vector<DecayRow> pod_decay_study(const std::vector<Index>& n_list) {
  std::vector<std::future<std::vector<DecayRow>>> jobs;
  for (Index n : n_list) {
    jobs.push_back(std::async(std::launch::async, [n] {
      const SnapshotMatrix snaps = discontinuity_snapshots(n);
      const DenseVector sigma = Eigen::BDCSVD<DenseMatrix>(snaps.s).singularValues();
      std::vector<DecayRow> rows;
      for (Index l = 0; l < sigma.size() && sigma(l) > 0.0; ++l) {
        rows.push_back({n, l + 1, sigma(l) / sigma(0), sigma(l)});
      }
      return rows;
    }));
  }
  std::vector<DecayRow> out;
  for (auto& j : jobs) {
    auto rows = j.get();
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

double loglog_slope(const std::vector<DecayRow>& rows, Index n, Index lo, Index hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    if (r.n != n || r.ell < lo || r.ell > hi) continue;
    const double x = std::log(static_cast<double>(r.ell));
    const double y = std::log(r.ratio);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  if (count < 2) throw ConfigInvalid("loglog_slope: fewer than two points in the window");
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace l1rom::pod
