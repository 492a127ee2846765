#include <doctest.h>

#include <cmath>

#include "mf2a/simulate.hpp"

using namespace mf2a;

TEST_CASE("mean offsets for three balanced clusters are -2, 0, +2") {
  CHECK(sim_mean_offset(1, 3) == -2.0);
  CHECK(sim_mean_offset(2, 3) == 0.0);
  CHECK(sim_mean_offset(3, 3) == 2.0);
  // study 2: offsets 2k-7
  CHECK(sim_mean_offset(1, 6) == -5.0);
  CHECK(sim_mean_offset(6, 6) == 5.0);
}

TEST_CASE("study 1 labels are close to balanced") {
  const int T = 9000;
  auto [data, truth] = gen_study1(5, T, 17);
  std::vector<int> counts(3, 0);
  for (int l : truth.labels) counts[static_cast<std::size_t>(l)]++;
  const double se = std::sqrt(T * (1.0 / 3.0) * (2.0 / 3.0));
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(counts[static_cast<std::size_t>(k)] - T / 3.0) < 3.0 * se);
  CHECK(truth.K_true == 3);
  CHECK(truth.H_true == std::vector<int>{4, 4, 4});
}

TEST_CASE("fixed seed reproduces the dataset exactly") {
  auto [a, ta] = gen_study1(6, 120, 99);
  auto [b, tb] = gen_study1(6, 120, 99);
  CHECK(a.values == b.values);
  CHECK(ta.labels == tb.labels);
  auto [c, tc] = gen_study1(6, 120, 100);
  CHECK(a.values != c.values);
}

TEST_CASE("truth covariances satisfy the factor identity exactly") {
  auto [data, truth] = gen_study1(5, 50, 3);
  for (int k = 0; k < truth.K_true; ++k) {
    MatrixXd recon = truth.lambda[static_cast<std::size_t>(k)] *
                     truth.lambda[static_cast<std::size_t>(k)].transpose();
    recon.diagonal() += truth.xi2[static_cast<std::size_t>(k)];
    CHECK((recon - truth.omega[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("study 2 fixed design") {
  auto [data, truth] = gen_study2(7);
  CHECK(data.n_obs() == 700);
  CHECK(data.n_dims() == 20);
  CHECK(truth.K_true == 6);
  for (int h : truth.H_true) {
    CHECK(h >= 1);
    CHECK(h <= 5);
  }
  CHECK(std::abs(truth.weights.sum() - 1.0) < 1e-12);
  // smallest cluster expects 0.05 * 700 = 35 observations
  CHECK(truth.weights[5] * 700.0 == doctest::Approx(35.0).epsilon(1e-12));
}

TEST_CASE("standardisation centres and scales each column") {
  auto [data, truth] = gen_study2(11);
  auto [std_data, std_truth] = standardize(data, &truth);
  const auto T = std_data.n_obs();
  for (Eigen::Index i = 0; i < std_data.n_dims(); ++i) {
    CHECK(std::abs(std_data.values.col(i).mean()) < 1e-10);
    const double var = std_data.values.col(i).squaredNorm() / static_cast<double>(T - 1);
    CHECK(std::abs(var - 1.0) < 1e-10);
  }
  CHECK(std_data.standardized);

  // transformed truth keeps the factor identity
  for (int k = 0; k < truth.K_true; ++k) {
    MatrixXd recon = std_truth.lambda[static_cast<std::size_t>(k)] *
                     std_truth.lambda[static_cast<std::size_t>(k)].transpose();
    recon.diagonal() += std_truth.xi2[static_cast<std::size_t>(k)];
    CHECK((recon - std_truth.omega[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("standardising standardised data is the identity") {
  auto [data, truth] = gen_study1(4, 200, 5);
  const Dataset once = standardize(data);
  const Dataset twice = standardize(once);
  CHECK((once.values - twice.values).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

void check_empirical_covariance(const Dataset& data, const SimTruth& truth) {
  for (int k = 0; k < truth.K_true; ++k) {
    std::vector<int> members;
    for (int t = 0; t < data.n_obs(); ++t)
      if (truth.labels[static_cast<std::size_t>(t)] == k) members.push_back(t);
    REQUIRE(members.size() >= 10000);
    MatrixXd centred(static_cast<Eigen::Index>(members.size()), data.n_dims());
    for (std::size_t r = 0; r < members.size(); ++r)
      centred.row(static_cast<Eigen::Index>(r)) =
          data.values.row(members[r]) - truth.mu[static_cast<std::size_t>(k)].transpose();
    const MatrixXd emp = centred.transpose() * centred / static_cast<double>(members.size());
    CHECK((emp - truth.omega[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() < 0.1);
  }
}

}  // namespace

TEST_CASE("large-sample per-cluster covariance converges to the truth") {
  // on the standardised scale the pipeline works in; |T_k| >= 1e4 per cluster
  auto [d1_raw, t1_raw] = gen_study1(4, 45000, 123);
  auto [d1, t1] = standardize(d1_raw, &t1_raw);
  check_empirical_covariance(d1, t1);
  auto [d2_raw, t2_raw] = gen_study2(123, 260000);
  auto [d2, t2] = standardize(d2_raw, &t2_raw);
  check_empirical_covariance(d2, t2);
}
