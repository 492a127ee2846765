#include "mf2a/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mf2a {

using Eigen::MatrixXd;

namespace {

std::map<int, int> label_index(const std::vector<int>& labels) {
  std::map<int, int> idx;
  for (int l : labels) idx.emplace(l, 0);
  int next = 0;
  for (auto& [label, i] : idx) i = next++;
  return idx;
}

inline __int128 comb2(long n) {
  return static_cast<__int128>(n) * (n - 1) / 2;
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<int>& est, const std::vector<int>& truth) {
  if (est.size() != truth.size())
    throw std::domain_error("confusion_matrix: label vectors differ in length");
  auto row_idx = label_index(truth);
  auto col_idx = label_index(est);
  ConfusionMatrix cm;
  cm.counts = MatrixXl::Zero(static_cast<Eigen::Index>(row_idx.size()),
                             static_cast<Eigen::Index>(col_idx.size()));
  for (std::size_t t = 0; t < est.size(); ++t)
    cm.counts(row_idx[truth[t]], col_idx[est[t]])++;
  for (const auto& [label, i] : row_idx) cm.row_labels.push_back(label);
  for (const auto& [label, i] : col_idx) cm.col_labels.push_back(label);
  return cm;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw std::domain_error("adjusted_rand_index: label vectors differ in length");
  if (a.size() < 2)
    throw std::domain_error("adjusted_rand_index: need at least two observations");

  const ConfusionMatrix cm = confusion_matrix(b, a);  // rows a, cols b
  __int128 sum_cells = 0;
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < cm.counts.cols(); ++j) sum_cells += comb2(cm.counts(i, j));
  __int128 sum_rows = 0, sum_cols = 0;
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) sum_rows += comb2(cm.counts.row(i).sum());
  for (Eigen::Index j = 0; j < cm.counts.cols(); ++j) sum_cols += comb2(cm.counts.col(j).sum());
  const __int128 pairs = comb2(static_cast<long>(a.size()));

  // ARI = (I - AB/C) / ((A+B)/2 - AB/C), cleared of denominators:
  const __int128 num = 2 * (pairs * sum_cells - sum_rows * sum_cols);
  const __int128 den = pairs * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
  if (den == 0) return num == 0 ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<int> hungarian_min_cost(const MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::domain_error("hungarian_min_cost: matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

Matching optimal_matching(const ConfusionMatrix& cm) {
  const int n = static_cast<int>(std::max(cm.counts.rows(), cm.counts.cols()));
  MatrixXd cost = MatrixXd::Zero(n, n);
  const double big = static_cast<double>(cm.counts.sum());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const long c = (i < cm.counts.rows() && j < cm.counts.cols()) ? cm.counts(i, j) : 0;
      cost(i, j) = big - static_cast<double>(c);  // maximise counts
    }
  const std::vector<int> row_to_col = hungarian_min_cost(cost);

  Matching m;
  m.est_to_true.assign(static_cast<std::size_t>(cm.counts.cols()), -1);
  for (int i = 0; i < cm.counts.rows(); ++i) {
    const int j = row_to_col[static_cast<std::size_t>(i)];
    if (j >= 0 && j < cm.counts.cols()) {
      m.est_to_true[static_cast<std::size_t>(j)] = i;
      m.matched_count += cm.counts(i, j);
    }
  }
  return m;
}

double misclassification_rate(const std::vector<int>& est, const std::vector<int>& truth) {
  if (est.size() != truth.size())
    throw std::domain_error("misclassification_rate: label vectors differ in length");
  if (est.empty()) throw std::domain_error("misclassification_rate: empty labels");
  const ConfusionMatrix cm = confusion_matrix(est, truth);
  const Matching m = optimal_matching(cm);
  const double wrong = static_cast<double>(static_cast<long>(est.size()) - m.matched_count);
  return 100.0 * wrong / static_cast<double>(est.size());
}

std::vector<double> mse_omega(const std::vector<std::vector<MatrixXd>>& draw_omegas,
                              const std::vector<MatrixXd>& truth_omega,
                              const std::vector<int>& est_to_true) {
  if (draw_omegas.empty()) throw std::domain_error("mse_omega: no draws");
  const std::size_t K = est_to_true.size();
  std::vector<double> out(K, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < K; ++k) {
    const int j = est_to_true[k];
    if (j < 0) continue;
    const MatrixXd& truth = truth_omega[static_cast<std::size_t>(j)];
    const auto p = truth.rows();
    double acc = 0.0;
    for (const auto& draw : draw_omegas) {
      const MatrixXd& om = draw[k];
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index l = i; l < p; ++l) {
          const double d = om(i, l) - truth(i, l);
          acc += d * d;
        }
    }
    const double n_entries = static_cast<double>(p * (p + 1)) / 2.0;
    out[k] = acc / (static_cast<double>(draw_omegas.size()) * n_entries);
  }
  return out;
}

std::vector<double> mse_omega_from_moments(const std::vector<MatrixXd>& omega_mean,
                                           const std::vector<MatrixXd>& omega_meansq,
                                           const std::vector<MatrixXd>& truth_omega,
                                           const std::vector<int>& est_to_true) {
  const std::size_t K = est_to_true.size();
  std::vector<double> out(K, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < K; ++k) {
    const int j = est_to_true[k];
    if (j < 0) continue;
    const MatrixXd& truth = truth_omega[static_cast<std::size_t>(j)];
    const auto p = truth.rows();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index l = i; l < p; ++l)
        acc += omega_meansq[k](i, l) - 2.0 * omega_mean[k](i, l) * truth(i, l) +
               truth(i, l) * truth(i, l);
    const double n_entries = static_cast<double>(p * (p + 1)) / 2.0;
    out[k] = acc / n_entries;
  }
  return out;
}

}  // namespace mf2a
