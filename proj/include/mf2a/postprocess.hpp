#ifndef MF2A_POSTPROCESS_HPP
#define MF2A_POSTPROCESS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mf2a/model.hpp"

namespace mf2a {

// Draw counts entering and surviving each identification stage.
struct AttritionReport {
  long total_draws = 0;
  long kept_kplus_mode = 0;    // after filtering on K_plus == K_hat
  long kept_permutation = 0;   // after removing non-permutation assignments
  long kept_h_mode = 0;        // after filtering on per-cluster active counts

  long removed_kplus() const { return total_draws - kept_kplus_mode; }
  long removed_permutation() const { return kept_kplus_mode - kept_permutation; }
  long removed_h() const { return kept_permutation - kept_h_mode; }
};

struct IdentifiedPosterior {
  int K_hat = 0;
  std::vector<int> H_hat;
  long M_retained = 0;
  std::vector<VectorXd> mu_mean;        // per-cluster posterior mean of mu
  std::vector<MatrixXd> omega_mean;     // per-cluster mean of Omega^(m)
  std::vector<MatrixXd> omega_meansq;   // per-cluster mean of elementwise Omega^2
  std::vector<long> retained_iters;     // iteration stamps of the final draws
  // per-cluster (H value, draw count) over the relabeled set, ascending in H
  std::vector<std::vector<std::pair<int, long>>> h_posterior_counts;
  AttritionReport attrition;
};

// Point-process feature of one cluster: (mu^T, log|Omega|, log tr(Omega),
// log(v_max / v_min)) with v the extreme eigenvalues of Omega.
struct DrawFeature {
  VectorXd values;
};
DrawFeature cluster_feature(const DrawRecord::Cluster& cluster);

// Most frequent K_plus (ties toward the smaller value) and the draws holding it.
std::pair<int, std::vector<DrawRecord>> select_mode_Kplus(const std::vector<DrawRecord>& trace);

// Clusters all per-draw features (standardised per dimension) around K_hat
// centres, keeps draws whose cluster->centre map is a permutation, and
// reorders parameters and allocations through it.
std::vector<DrawRecord> relabel_draws(const std::vector<DrawRecord>& filtered, int K_hat,
                                      std::uint64_t seed, AttritionReport* attrition = nullptr);

// Per-cluster mode of the active-column count (ties toward smaller), dropping
// draws that disagree with the mode in any cluster.
std::pair<std::vector<int>, std::vector<DrawRecord>> select_mode_H(
    const std::vector<DrawRecord>& relabeled);

// Columns of lambda with indicator 1, order preserved.
MatrixXd extract_active_loadings(const DrawRecord::Cluster& cluster);

// (1/M) sum_m Lambda^(m) Lambda^(m)T + Xi^(m), full-H loadings.
std::vector<MatrixXd> posterior_covariance(const std::vector<DrawRecord>& final_draws);

// Modal allocation per observation over final draws that carry allocations.
std::vector<int> modal_allocation(const std::vector<DrawRecord>& final_draws, int T,
                                  int K_hat);

// Full pipeline: K_plus mode -> relabel -> H mode -> summaries.
struct IdentificationResult {
  IdentifiedPosterior posterior;
  std::vector<DrawRecord> final_draws;
};
IdentificationResult identify_posterior(const std::vector<DrawRecord>& trace,
                                        std::uint64_t seed);

}  // namespace mf2a

#endif
