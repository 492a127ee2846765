#ifndef MF2A_SIMULATE_HPP
#define MF2A_SIMULATE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mf2a/model.hpp"

namespace mf2a {

struct SimTruth {
  std::vector<int> labels;  // 0-based cluster labels, length T
  std::vector<VectorXd> mu;
  std::vector<MatrixXd> lambda;
  std::vector<VectorXd> xi2;
  std::vector<MatrixXd> omega;  // lambda*lambda^T + diag(xi2), exact
  VectorXd weights;
  int K_true = 0;
  std::vector<int> H_true;
};

// Mean offset (2k - K - 1) for 1-based cluster k of K, shared by both designs.
double sim_mean_offset(int k_one_based, int K);

// Balanced design: 3 clusters, 4 factors each, equal weights.
std::pair<Dataset, SimTruth> gen_study1(int p, int T, std::uint64_t seed);

// Unbalanced design: p=20, T=700 by default, 6 clusters with weights
// (.25,.25,.2,.15,.1,.05) and per-cluster factor counts uniform on 1..5.
// The weight vector is normalised defensively before use. T and p are
// overridable for property tests only; the published design is fixed.
std::pair<Dataset, SimTruth> gen_study2(std::uint64_t seed, int T = 700, int p = 20);

// y -> S^{-1}(y - m) with sample mean m and sample standard deviations S.
// When truth is given, its lambda / omega / mu / xi2 are mapped to the
// standardised scale alongside.
std::pair<Dataset, SimTruth> standardize(const Dataset& data, const SimTruth* truth);
Dataset standardize(const Dataset& data);

}  // namespace mf2a

#endif
