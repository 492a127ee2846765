#include <doctest.h>

#include "mf2a/kmeans.hpp"

using namespace mf2a;
using Eigen::MatrixXd;

namespace {

MatrixXd three_blobs() {
  MatrixXd pts(30, 2);
  RngStream rng(5, 0);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 10; ++i) {
      const double jitter_x = (rng.next_u64() % 1000) / 10000.0;
      const double jitter_y = (rng.next_u64() % 1000) / 10000.0;
      pts.row(b * 10 + i) << 10.0 * b + jitter_x, -5.0 * b + jitter_y;
    }
  return pts;
}

}  // namespace

TEST_CASE("kmeans recovers well separated blobs") {
  const MatrixXd pts = three_blobs();
  RngStream rng(1, 0);
  const KmeansResult res = kmeans_restarts(pts, 3, rng, 10);
  CHECK(!res.degenerate);
  // all points in a blob share a label, and the three labels differ
  for (int b = 0; b < 3; ++b)
    for (int i = 1; i < 10; ++i)
      CHECK(res.labels[static_cast<std::size_t>(b * 10 + i)] ==
            res.labels[static_cast<std::size_t>(b * 10)]);
  CHECK(res.labels[0] != res.labels[10]);
  CHECK(res.labels[10] != res.labels[20]);
  CHECK(res.labels[0] != res.labels[20]);
  CHECK(res.inertia < 10.0);
}

TEST_CASE("kmeans is deterministic given the stream") {
  const MatrixXd pts = three_blobs();
  RngStream a(9, 0), b(9, 0);
  const KmeansResult ra = kmeans_restarts(pts, 4, a, 10);
  const KmeansResult rb = kmeans_restarts(pts, 4, b, 10);
  CHECK(ra.labels == rb.labels);
  CHECK(ra.inertia == rb.inertia);
}

TEST_CASE("kmeans rejects k above the point count") {
  MatrixXd pts = MatrixXd::Random(3, 2);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(kmeans(pts, 5, rng), std::domain_error);
}
