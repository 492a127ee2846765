#include "mf2a/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mf2a/errors.hpp"
#include "mf2a/kmeans.hpp"

namespace mf2a {

namespace {

constexpr std::uint64_t kTagRelabel = 0x9e1;

// smallest key among those sharing the maximal count
template <typename Map>
int modal_key(const Map& counts) {
  int best_key = 0;
  long best_count = -1;
  for (const auto& [key, count] : counts) {
    if (count > best_count) {
      best_key = key;
      best_count = count;
    }
  }
  return best_key;
}

}  // namespace

DrawFeature cluster_feature(const DrawRecord::Cluster& cluster) {
  const MatrixXd omega = cluster.omega();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(omega);
  if (eig.info() != Eigen::Success)
    throw NumericalError("cluster_feature: eigendecomposition failed");
  const double v_min = eig.eigenvalues().minCoeff();
  const double v_max = eig.eigenvalues().maxCoeff();
  if (!(v_min > 0.0))
    throw NumericalError("cluster_feature: covariance not positive definite");
  DrawFeature f;
  f.values.resize(cluster.mu.size() + 3);
  f.values.head(cluster.mu.size()) = cluster.mu;
  f.values[cluster.mu.size()] = eig.eigenvalues().array().log().sum();
  f.values[cluster.mu.size() + 1] = std::log(omega.trace());
  f.values[cluster.mu.size() + 2] = std::log(v_max / v_min);
  return f;
}

std::pair<int, std::vector<DrawRecord>> select_mode_Kplus(
    const std::vector<DrawRecord>& trace) {
  if (trace.empty()) throw DataError("select_mode_Kplus: empty trace");
  std::map<int, long> counts;
  for (const auto& rec : trace) counts[rec.K_plus]++;
  const int k_hat = modal_key(counts);
  std::vector<DrawRecord> kept;
  kept.reserve(static_cast<std::size_t>(counts[k_hat]));
  for (const auto& rec : trace)
    if (rec.K_plus == k_hat) kept.push_back(rec);
  return {k_hat, std::move(kept)};
}

std::vector<DrawRecord> relabel_draws(const std::vector<DrawRecord>& filtered, int K_hat,
                                      std::uint64_t seed, AttritionReport* attrition) {
  if (filtered.size() < 2) {
    std::string msg = "relabel_draws: fewer than 2 draws";
    if (attrition != nullptr)
      msg += " (K_plus filter kept " + std::to_string(attrition->kept_kplus_mode) + " of " +
             std::to_string(attrition->total_draws) + ")";
    throw DataError(msg);
  }

  const auto n_points = filtered.size() * static_cast<std::size_t>(K_hat);
  const Eigen::Index feat_dim = filtered.front().clusters.front().mu.size() + 3;
  MatrixXd features(static_cast<Eigen::Index>(n_points), feat_dim);
  for (std::size_t m = 0; m < filtered.size(); ++m)
    for (int k = 0; k < K_hat; ++k)
      features.row(static_cast<Eigen::Index>(m * K_hat + static_cast<std::size_t>(k))) =
          cluster_feature(filtered[m].clusters[static_cast<std::size_t>(k)]).values.transpose();

  // standardise per feature dimension; log-determinants and means live on
  // incomparable scales
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double mean = features.col(j).mean();
    const double sd = std::sqrt((features.col(j).array() - mean).square().sum() /
                                std::max<double>(1.0, static_cast<double>(features.rows() - 1)));
    features.col(j).array() -= mean;
    if (sd > 0.0) features.col(j) /= sd;
  }

  RngStream rng(seed, RngStream::derive_id({kTagRelabel}));
  const KmeansResult km = kmeans_restarts(features, K_hat, rng, 10);

  std::vector<DrawRecord> out;
  out.reserve(filtered.size());
  std::vector<int> rho(static_cast<std::size_t>(K_hat));
  std::vector<bool> seen(static_cast<std::size_t>(K_hat));
  for (std::size_t m = 0; m < filtered.size(); ++m) {
    std::fill(seen.begin(), seen.end(), false);
    bool is_perm = true;
    for (int k = 0; k < K_hat; ++k) {
      const int j = km.labels[m * static_cast<std::size_t>(K_hat) + static_cast<std::size_t>(k)];
      rho[static_cast<std::size_t>(k)] = j;
      if (seen[static_cast<std::size_t>(j)]) is_perm = false;
      seen[static_cast<std::size_t>(j)] = true;
    }
    if (!is_perm) continue;

    DrawRecord rec = filtered[m];
    for (int k = 0; k < K_hat; ++k)
      rec.clusters[static_cast<std::size_t>(rho[static_cast<std::size_t>(k)])] =
          filtered[m].clusters[static_cast<std::size_t>(k)];
    if (rec.alloc.has_value())
      for (int& a : *rec.alloc) a = rho[static_cast<std::size_t>(a)];
    out.push_back(std::move(rec));
  }

  if (attrition != nullptr) attrition->kept_permutation = static_cast<long>(out.size());
  if (out.empty()) throw DataError("relabel_draws: no draw yielded a permutation");
  return out;
}

std::pair<std::vector<int>, std::vector<DrawRecord>> select_mode_H(
    const std::vector<DrawRecord>& relabeled) {
  if (relabeled.empty()) throw DataError("select_mode_H: no draws");
  const int K_hat = static_cast<int>(relabeled.front().clusters.size());
  std::vector<int> h_hat(static_cast<std::size_t>(K_hat));
  for (int k = 0; k < K_hat; ++k) {
    std::map<int, long> counts;
    for (const auto& rec : relabeled)
      counts[rec.clusters[static_cast<std::size_t>(k)].active_columns()]++;
    h_hat[static_cast<std::size_t>(k)] = modal_key(counts);
  }
  std::vector<DrawRecord> kept;
  for (const auto& rec : relabeled) {
    bool match = true;
    for (int k = 0; k < K_hat; ++k)
      if (rec.clusters[static_cast<std::size_t>(k)].active_columns() !=
          h_hat[static_cast<std::size_t>(k)])
        match = false;
    if (match) kept.push_back(rec);
  }
  return {std::move(h_hat), std::move(kept)};
}

MatrixXd extract_active_loadings(const DrawRecord::Cluster& cluster) {
  MatrixXd out(cluster.lambda.rows(), cluster.active_columns());
  Eigen::Index dst = 0;
  for (Eigen::Index h = 0; h < cluster.lambda.cols(); ++h)
    if (cluster.indicator[h] == 1) out.col(dst++) = cluster.lambda.col(h);
  return out;
}

std::vector<MatrixXd> posterior_covariance(const std::vector<DrawRecord>& final_draws) {
  if (final_draws.empty()) throw DataError("posterior_covariance: no draws");
  const int K_hat = static_cast<int>(final_draws.front().clusters.size());
  const auto p = final_draws.front().clusters.front().mu.size();
  std::vector<MatrixXd> out(static_cast<std::size_t>(K_hat), MatrixXd::Zero(p, p));
  for (const auto& rec : final_draws)
    for (int k = 0; k < K_hat; ++k)
      out[static_cast<std::size_t>(k)] += rec.clusters[static_cast<std::size_t>(k)].omega();
  for (auto& o : out) o /= static_cast<double>(final_draws.size());
  return out;
}

std::vector<int> modal_allocation(const std::vector<DrawRecord>& final_draws, int T,
                                  int K_hat) {
  std::vector<std::vector<long>> votes(static_cast<std::size_t>(T),
                                       std::vector<long>(static_cast<std::size_t>(K_hat), 0));
  long with_alloc = 0;
  for (const auto& rec : final_draws) {
    if (!rec.alloc.has_value()) continue;
    with_alloc++;
    for (int t = 0; t < T; ++t) {
      const int a = (*rec.alloc)[static_cast<std::size_t>(t)];
      if (a >= 0 && a < K_hat) votes[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]++;
    }
  }
  if (with_alloc == 0)
    throw DataError("modal_allocation: no retained draw carries allocations");
  std::vector<int> out(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    int best = 0;
    for (int k = 1; k < K_hat; ++k)
      if (votes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] >
          votes[static_cast<std::size_t>(t)][static_cast<std::size_t>(best)])
        best = k;
    out[static_cast<std::size_t>(t)] = best;
  }
  return out;
}

IdentificationResult identify_posterior(const std::vector<DrawRecord>& trace,
                                        std::uint64_t seed) {
  IdentificationResult res;
  AttritionReport& att = res.posterior.attrition;
  att.total_draws = static_cast<long>(trace.size());

  auto [k_hat, filtered] = select_mode_Kplus(trace);
  att.kept_kplus_mode = static_cast<long>(filtered.size());

  std::vector<DrawRecord> relabeled = relabel_draws(filtered, k_hat, seed, &att);

  res.posterior.h_posterior_counts.resize(static_cast<std::size_t>(k_hat));
  for (int k = 0; k < k_hat; ++k) {
    std::map<int, long> counts;
    for (const auto& rec : relabeled)
      counts[rec.clusters[static_cast<std::size_t>(k)].active_columns()]++;
    res.posterior.h_posterior_counts[static_cast<std::size_t>(k)].assign(counts.begin(),
                                                                         counts.end());
  }

  auto [h_hat, final_draws] = select_mode_H(relabeled);
  att.kept_h_mode = static_cast<long>(final_draws.size());
  if (final_draws.empty())
    throw DataError("identify_posterior: no draws survived the H-mode filter");

  res.posterior.K_hat = k_hat;
  res.posterior.H_hat = std::move(h_hat);
  res.posterior.M_retained = static_cast<long>(final_draws.size());
  res.posterior.omega_mean = posterior_covariance(final_draws);

  const auto p = final_draws.front().clusters.front().mu.size();
  res.posterior.mu_mean.assign(static_cast<std::size_t>(k_hat), VectorXd::Zero(p));
  res.posterior.omega_meansq.assign(static_cast<std::size_t>(k_hat), MatrixXd::Zero(p, p));
  for (const auto& rec : final_draws) {
    res.posterior.retained_iters.push_back(rec.iter);
    for (int k = 0; k < k_hat; ++k) {
      const auto& c = rec.clusters[static_cast<std::size_t>(k)];
      res.posterior.mu_mean[static_cast<std::size_t>(k)] += c.mu;
      res.posterior.omega_meansq[static_cast<std::size_t>(k)] += c.omega().array().square().matrix();
    }
  }
  for (int k = 0; k < k_hat; ++k) {
    res.posterior.mu_mean[static_cast<std::size_t>(k)] /= static_cast<double>(final_draws.size());
    res.posterior.omega_meansq[static_cast<std::size_t>(k)] /= static_cast<double>(final_draws.size());
  }
  res.final_draws = std::move(final_draws);
  return res;
}

}  // namespace mf2a
