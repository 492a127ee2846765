#ifndef MF2A_MODEL_HPP
#define MF2A_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mf2a/stat_kernel.hpp"

namespace mf2a {

struct Dataset {
  MatrixXd values;  // T x p
  std::optional<std::vector<int>> truth_labels;  // 1-based cluster labels
  VectorXd center;  // m used for standardisation (zeros if raw)
  VectorXd scale;   // diag(S) used for standardisation (ones if raw)
  bool standardized = false;

  Eigen::Index n_obs() const { return values.rows(); }
  Eigen::Index n_dims() const { return values.cols(); }
};

// All fixed constants of the model plus sampler controls. Data-driven
// defaults (b0_mean, B0_diag, b_g, H, K_init) are filled by defaults_for().
struct Hyperparams {
  VectorXd b0_mean;  // prior mean of cluster means, default median(y)
  VectorXd B0_diag;  // prior variance of cluster means, default R_i^2
  BnbParams bnb{1.0, 4.0, 3.0};
  double nu_l = 6.0, nu_r = 3.0;      // F prior on alpha_M
  double a_alpha = 6.0, b_alpha = 2.0;  // gamma prior on alpha_B
  double a_xi = 1.0;
  double a_g = 3.0;
  VectorXd b_g;  // default 100 / R_i^2
  double a_theta = 3.0, a2 = 2.0, b2 = 1.0;  // slab
  double a0 = 21.0, a1 = 1.0, b1 = 1.0;      // spike
  int H = 0;       // 0 = auto: floor((p-1)/2), or p when p <= small_p_threshold
  int K_init = 0;  // 0 = auto: 3 * expected_clusters if given, else 10
  int expected_clusters = 0;
  int small_p_threshold = 10;
  long iters = 50000;
  long burnin = 10000;
  long thin = 1;
  double mh_scale_alpha_M = 0.75;
  double alpha1_step = 2.0, alpha2_step = 0.11;  // s_alpha = 1 + a1*(1-a2)^H

  // Resolves the data-driven fields against a dataset; H/K_init rules applied
  // only where the user left them at 0.
  void resolve_defaults(const Dataset& data);
  void check() const;  // throws ConfigError on inconsistent settings
};

int default_num_factors(Eigen::Index p, int small_p_threshold);

struct ClusterParams {
  VectorXd mu;        // p
  MatrixXd lambda;    // p x H
  VectorXd xi2;       // p, > 0
  VectorXd theta;     // H, > 0
  VectorXd tau;       // H, in (0,1)
  Eigen::VectorXi indicator;  // H, {0,1}
  MatrixXd factors;   // |T_k| x H, rows in increasing observation order

  int active_columns() const { return indicator.sum(); }
};

struct MixtureState {
  int K = 0;
  int K_plus = 0;
  VectorXd weights;          // K, simplex
  std::vector<int> alloc;    // T, values in 0..K-1
  std::vector<int> counts;   // K
  std::vector<ClusterParams> clusters;  // K
  double alpha_M = 0.0;
  double alpha_B = 0.0;
  VectorXd b_xi;   // p
  double b_theta = 0.0;
  double b_0_spike = 0.0;
};

struct DrawRecord {
  struct Cluster {
    VectorXd mu;
    MatrixXd lambda;
    VectorXd xi2;
    VectorXd theta;
    VectorXd tau;
    Eigen::VectorXi indicator;

    int active_columns() const { return indicator.sum(); }
    MatrixXd omega() const {
      MatrixXd o = lambda * lambda.transpose();
      o.diagonal() += xi2;
      return o;
    }
  };

  long iter = 0;
  int K = 0;
  int K_plus = 0;
  std::vector<int> counts;  // length K
  double alpha_M = 0.0;
  double alpha_B = 0.0;
  double b_theta = 0.0;
  double b_0_spike = 0.0;
  std::vector<Cluster> clusters;  // exactly K_plus filled clusters
  std::optional<std::vector<int>> alloc;  // 0-based, per record_alloc_every

  bool operator==(const DrawRecord& other) const;
};

DrawRecord make_draw_record(long iter, const MixtureState& state, bool with_alloc);

// Structural invariant check; returns human-readable violations, empty when
// the state is consistent. Diagnostic only, never throws.
std::vector<std::string> validate(const MixtureState& state, const Dataset& data);

}  // namespace mf2a

#endif
