#include "mf2a/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "mf2a/errors.hpp"

namespace mf2a {

namespace {

constexpr std::uint64_t kTagStudy1 = 0x51;
constexpr std::uint64_t kTagStudy2 = 0x52;

std::pair<Dataset, SimTruth> generate(int p, int T, const VectorXd& weights,
                                      const std::vector<int>& factor_counts,
                                      RngStream& rng) {
  const int K = static_cast<int>(weights.size());
  SimTruth truth;
  truth.K_true = K;
  truth.H_true = factor_counts;
  truth.weights = weights / weights.sum();

  for (int k = 0; k < K; ++k) {
    const int h = factor_counts[static_cast<std::size_t>(k)];
    VectorXd mu(p);
    const double offset = sim_mean_offset(k + 1, K);
    for (int i = 0; i < p; ++i) mu[i] = offset + draw_normal(rng);
    MatrixXd lambda(p, h);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < h; ++j) lambda(i, j) = draw_normal(rng);
    VectorXd xi2(p);
    for (int i = 0; i < p; ++i) xi2[i] = draw_inverse_gamma(2.0, 1.0, rng);
    MatrixXd omega = lambda * lambda.transpose();
    omega.diagonal() += xi2;
    truth.mu.push_back(std::move(mu));
    truth.lambda.push_back(std::move(lambda));
    truth.xi2.push_back(std::move(xi2));
    truth.omega.push_back(std::move(omega));
  }

  Dataset data;
  data.values.resize(T, p);
  data.center = VectorXd::Zero(p);
  data.scale = VectorXd::Ones(p);
  truth.labels.resize(static_cast<std::size_t>(T));

  const VectorXd logw = truth.weights.array().log();
  for (int t = 0; t < T; ++t) {
    const int k = sample_categorical_from_logits(logw, rng);
    truth.labels[static_cast<std::size_t>(t)] = k;
    const auto& lambda = truth.lambda[static_cast<std::size_t>(k)];
    const VectorXd f = draw_std_normal_vec(lambda.cols(), rng);
    VectorXd y = truth.mu[static_cast<std::size_t>(k)] + lambda * f;
    for (int i = 0; i < p; ++i)
      y[i] += std::sqrt(truth.xi2[static_cast<std::size_t>(k)][i]) * draw_normal(rng);
    data.values.row(t) = y.transpose();
  }
  data.truth_labels = truth.labels;
  return {std::move(data), std::move(truth)};
}

}  // namespace

double sim_mean_offset(int k_one_based, int K) {
  return static_cast<double>(2 * k_one_based - K - 1);
}

std::pair<Dataset, SimTruth> gen_study1(int p, int T, std::uint64_t seed) {
  if (p < 1 || T < 1) throw std::domain_error("gen_study1: p and T must be positive");
  RngStream rng(seed, RngStream::derive_id({kTagStudy1}));
  const VectorXd weights = VectorXd::Constant(3, 1.0 / 3.0);
  return generate(p, T, weights, {4, 4, 4}, rng);
}

std::pair<Dataset, SimTruth> gen_study2(std::uint64_t seed, int T, int p) {
  if (p < 1 || T < 1) throw std::domain_error("gen_study2: p and T must be positive");
  RngStream rng(seed, RngStream::derive_id({kTagStudy2}));
  // the published weight vector ends in 0.05 (cf. the realised cluster sizes);
  // normalised defensively either way
  VectorXd weights(6);
  weights << 0.25, 0.25, 0.2, 0.15, 0.1, 0.05;
  std::vector<int> h(6);
  for (auto& hk : h) hk = 1 + static_cast<int>(rng.next_u64() % 5);
  return generate(p, T, weights, h, rng);
}

std::pair<Dataset, SimTruth> standardize(const Dataset& data, const SimTruth* truth) {
  const auto T = data.n_obs();
  const auto p = data.n_dims();
  if (T < 2) throw DataError("standardize: need at least two observations");

  const VectorXd mean = data.values.colwise().mean().transpose();
  VectorXd sd(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double ss = (data.values.col(i).array() - mean[i]).square().sum();
    sd[i] = std::sqrt(ss / static_cast<double>(T - 1));
    if (!(sd[i] > 0.0)) throw DataError("standardize: zero-variance column");
  }

  Dataset out = data;
  out.values = (data.values.rowwise() - mean.transpose()) * sd.cwiseInverse().asDiagonal();
  out.center = mean;
  out.scale = sd;
  out.standardized = true;

  SimTruth tout;
  if (truth != nullptr) {
    tout = *truth;
    const auto inv = sd.cwiseInverse();
    for (int k = 0; k < tout.K_true; ++k) {
      tout.mu[static_cast<std::size_t>(k)] =
          inv.cwiseProduct(tout.mu[static_cast<std::size_t>(k)] - mean);
      tout.lambda[static_cast<std::size_t>(k)] =
          inv.asDiagonal() * tout.lambda[static_cast<std::size_t>(k)];
      tout.xi2[static_cast<std::size_t>(k)] =
          tout.xi2[static_cast<std::size_t>(k)].cwiseProduct(inv.cwiseAbs2());
      tout.omega[static_cast<std::size_t>(k)] =
          inv.asDiagonal() * tout.omega[static_cast<std::size_t>(k)] * inv.asDiagonal();
    }
  }
  return {std::move(out), std::move(tout)};
}

Dataset standardize(const Dataset& data) { return standardize(data, nullptr).first; }

}  // namespace mf2a
