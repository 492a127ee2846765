#ifndef MF2A_KMEANS_HPP
#define MF2A_KMEANS_HPP

#include <Eigen/Dense>
#include <vector>

#include "mf2a/rng.hpp"

namespace mf2a {

struct KmeansResult {
  std::vector<int> labels;   // 0-based, length = rows of points
  Eigen::MatrixXd centers;   // k x d
  double inertia = 0.0;      // total within-cluster squared distance
  bool degenerate = false;   // an empty cluster survived Lloyd iterations
};

// Lloyd's algorithm with k-means++ seeding. Deterministic given the stream.
KmeansResult kmeans(const Eigen::MatrixXd& points, int k, RngStream& rng,
                    int max_iters = 100);

// Best of `restarts` runs by inertia, skipping degenerate solutions when a
// non-degenerate one exists.
KmeansResult kmeans_restarts(const Eigen::MatrixXd& points, int k, RngStream& rng,
                             int restarts, int max_iters = 100);

}  // namespace mf2a

#endif
