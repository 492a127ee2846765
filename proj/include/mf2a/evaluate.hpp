#ifndef MF2A_EVALUATE_HPP
#define MF2A_EVALUATE_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace mf2a {

using MatrixXl = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

// Contingency counts with rows = true classes, columns = estimated clusters,
// both ordered by ascending label value.
struct ConfusionMatrix {
  MatrixXl counts;             // rows true classes, cols estimated clusters
  std::vector<int> row_labels;  // distinct true labels, ascending
  std::vector<int> col_labels;  // distinct estimated labels, ascending
};

ConfusionMatrix confusion_matrix(const std::vector<int>& est, const std::vector<int>& truth);

// Hubert-Arabie adjusted Rand index; the combinatorial sums are carried in
// 128-bit integers so the only rounding is the final division.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Minimum-cost assignment on a square cost matrix; returns col assigned to
// each row.
std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost);

// Injective matching of estimated clusters to true classes maximising the
// matched count. est_to_true[j] = row index in the confusion matrix, or -1
// for estimated clusters left unmatched.
struct Matching {
  std::vector<int> est_to_true;
  long matched_count = 0;
};
Matching optimal_matching(const ConfusionMatrix& cm);

// Percentage of observations outside the optimal matching; unmatched
// estimated clusters count fully as errors.
double misclassification_rate(const std::vector<int>& est, const std::vector<int>& truth);

// Monte-Carlo MSE over upper-triangle (incl. diagonal) covariance entries:
// mean over draws of (Omega^(m)_il - Omega0_il)^2, normalised by p(p+1)/2.
// Indexed by estimated cluster; NaN where no true cluster was matched.
std::vector<double> mse_omega(const std::vector<std::vector<Eigen::MatrixXd>>& draw_omegas,
                              const std::vector<Eigen::MatrixXd>& truth_omega,
                              const std::vector<int>& est_to_true);

// Same quantity from per-cluster first and second moments of the entries;
// algebraically identical to mse_omega on the draws the moments came from.
std::vector<double> mse_omega_from_moments(const std::vector<Eigen::MatrixXd>& omega_mean,
                                           const std::vector<Eigen::MatrixXd>& omega_meansq,
                                           const std::vector<Eigen::MatrixXd>& truth_omega,
                                           const std::vector<int>& est_to_true);

struct ScoreReport {
  double ari = 0.0;
  double error_pct = 0.0;
  std::vector<double> mse_omega;  // per estimated cluster
  ConfusionMatrix confusion;
  Matching matching;
};

}  // namespace mf2a

#endif
