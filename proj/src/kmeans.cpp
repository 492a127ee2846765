#include "mf2a/kmeans.hpp"

#include <limits>
#include <stdexcept>

namespace mf2a {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// k-means++: first center uniform, subsequent ones proportional to squared
// distance from the nearest chosen center.
MatrixXd seed_centers(const MatrixXd& points, int k, RngStream& rng) {
  const auto n = points.rows();
  MatrixXd centers(k, points.cols());
  const auto first = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
  centers.row(0) = points.row(first);
  VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (u <= acc) { pick = i; break; }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

KmeansResult kmeans(const MatrixXd& points, int k, RngStream& rng, int max_iters) {
  const auto n = points.rows();
  if (k < 1 || n < k) throw std::domain_error("kmeans: need at least k points");

  KmeansResult res;
  res.centers = seed_centers(points, k, rng);
  res.labels.assign(static_cast<std::size_t>(n), 0);

  std::vector<int> sizes(k, 0);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - res.centers.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = c; }
      }
      if (res.labels[i] != best) { res.labels[i] = best; changed = true; }
      sizes[best]++;
    }
    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(res.labels[i]) += points.row(i);
    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0) res.centers.row(c) = sums.row(c) / sizes[c];
    if (!changed && it > 0) break;
  }

  res.degenerate = false;
  for (int c = 0; c < k; ++c)
    if (sizes[c] == 0) res.degenerate = true;

  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.inertia += (points.row(i) - res.centers.row(res.labels[i])).squaredNorm();
  return res;
}

KmeansResult kmeans_restarts(const MatrixXd& points, int k, RngStream& rng,
                             int restarts, int max_iters) {
  KmeansResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r) + 1);
    KmeansResult cur = kmeans(points, k, sub, max_iters);
    const bool better =
        !have || (best.degenerate && !cur.degenerate) ||
        (best.degenerate == cur.degenerate && cur.inertia < best.inertia);
    if (better) { best = std::move(cur); have = true; }
  }
  return best;
}

}  // namespace mf2a
