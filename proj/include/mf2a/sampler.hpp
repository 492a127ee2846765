#ifndef MF2A_SAMPLER_HPP
#define MF2A_SAMPLER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mf2a/model.hpp"

namespace mf2a {

struct ChainConfig {
  Hyperparams hyper;
  std::uint64_t seed = 1;
  long record_alloc_every = 1;
  int k_max_cap = 500;       // truncation ceiling for the draw of K
  bool mh_target_diag = false;  // warn when MH acceptance leaves (0.05, 0.95)
  int threads = 1;           // worker threads for the per-cluster block
  bool check_invariants = false;  // run validate() after every iteration
  // Test-only alternative: Gibbs update of alpha_B conditional on tau instead
  // of the marginal MH step. Kept as a cross-check oracle; known to stick at
  // high values on some data, so never the default.
  bool use_conditional_alpha_B = false;
};

struct MhDiagnostics {
  long accept_count_alpha_M = 0;
  long accept_count_alpha_B = 0;
  long proposals_alpha_M = 0;
  long proposals_alpha_B = 0;
  double applied_step_alpha_B = 0.0;

  double rate_alpha_M() const {
    return proposals_alpha_M ? static_cast<double>(accept_count_alpha_M) / proposals_alpha_M : 0.0;
  }
  double rate_alpha_B() const {
    return proposals_alpha_B ? static_cast<double>(accept_count_alpha_B) / proposals_alpha_B : 0.0;
  }
};

struct ChainResult {
  std::vector<DrawRecord> trace;
  MhDiagnostics diagnostics;
};

// --- initialisation --------------------------------------------------------

// Shrinkage covariance seed: (v0 + T/2)^{-1} (v0 S0 + 0.5 sum y_t y_t^T) with
// v0 = 3, S0 = I. Shared by every cluster at iteration zero.
MatrixXd initial_covariance(const MatrixXd& values, double v0 = 3.0);

// Splits Omega into loadings (top-H eigenpairs, floor subtracted from the
// eigenvalues) and a diagonal floored at xi_floor, so lambda*lambda^T + xi2
// reproduces Omega exactly whenever H covers the rank.
std::pair<MatrixXd, VectorXd> decompose_covariance(const MatrixXd& omega, int H,
                                                   double xi_floor = 1e-4);

MixtureState init_state(const Dataset& data, const ChainConfig& cfg);

// --- block 1: partition ----------------------------------------------------

void update_allocations(MixtureState& state, const Dataset& data, RngStream& rng);

// counts/K_plus recomputation + stable filled-first relabelling; exposed so
// callers constructing states by hand can normalise them.
void relabel_filled_first(MixtureState& state);

// --- block 2a: per-cluster factor model ------------------------------------

// Observation indices assigned to cluster k, ascending; rows of
// ClusterParams::factors follow this order.
std::vector<int> cluster_members(const MixtureState& state, int k);

// H x H posterior precision of the factor scores, I_H + Lambda^T Xi^-1 Lambda.
MatrixXd factor_posterior_precision(const MatrixXd& lambda, const VectorXd& xi2);

void sample_factors(int k, MixtureState& state, const Dataset& data, RngStream& rng);

// Posterior of row i of Lambda given factors: N(mean, precision^-1) with
// precision = diag(1/theta) + xi_i^-2 F F^T.
struct RowPosterior {
  VectorXd mean;
  MatrixXd precision;
  MatrixXd chol_lower;  // Cholesky of the precision
};
RowPosterior loading_row_posterior(const VectorXd& theta, double xi2_i,
                                   const MatrixXd& factors_t,  // H x |T_k|
                                   const VectorXd& residual_i);  // y_i - mu_i

void sample_loading_rows(int k, MixtureState& state, const Dataset& data, RngStream& rng);

// |T_k| x p residuals y_t - mu_k - Lambda_k f_t, rows in member order.
MatrixXd cluster_residuals(int k, const MixtureState& state, const Dataset& data);

std::pair<double, double> idio_posterior_params(double a_xi, double b_xi_i,
                                                const VectorXd& residuals_i);
void sample_idio_precisions(int k, MixtureState& state, const Dataset& data,
                            const Hyperparams& hp, RngStream& rng);

// Diagonal-conjugate posterior for the cluster mean; all algebra elementwise.
struct MeanPosterior {
  VectorXd mean;
  VectorXd var;  // diagonal of B_k
};
MeanPosterior cluster_mean_posterior(const VectorXd& b0, const VectorXd& B0_diag,
                                     const VectorXd& xi2, int n_k,
                                     const VectorXd& resid_sum);
void sample_cluster_mean(int k, MixtureState& state, const Dataset& data,
                         const Hyperparams& hp, RngStream& rng);

// log odds pieces for the column indicator: {log p(I=0|...), log p(I=1|...)}
// up to the shared normalising constant.
std::pair<double, double> indicator_log_weights(const VectorXd& lambda_col,
                                                double alpha_B, int H,
                                                double a0, double b0,
                                                double a_theta, double b_theta);
void sample_indicators(int k, MixtureState& state, const Hyperparams& hp, RngStream& rng);

void sample_slab_probs(int k, MixtureState& state, RngStream& rng);

std::pair<double, double> theta_posterior_params(int indicator, double p_dim,
                                                 double col_sq_sum, double a0,
                                                 double b0, double a_theta,
                                                 double b_theta);
void sample_thetas(int k, MixtureState& state, const Hyperparams& hp, RngStream& rng);

// --- block 2b: shared hyperparameters (Alg. 3) -----------------------------

double alpha_B_step_size(int H, double alpha1, double alpha2);

// Marginal MH target for alpha_B given the active/inactive column totals.
double log_target_alpha_B(double alpha_B, long H_plus_plus, long H_inf, int H,
                          double a_alpha, double b_alpha);

// Gamma posteriors of Alg. 3 steps 1/3/4 plus the column totals of step 2,
// computed from the filled clusters.
struct SharedPosteriors {
  double b_xi_shape = 0.0;
  VectorXd b_xi_rates;
  long h_plus_plus = 0;
  long h_inf = 0;
  double b0_shape = 0.0, b0_rate = 0.0;
  double b_theta_shape = 0.0, b_theta_rate = 0.0;
};
SharedPosteriors shared_hyper_posteriors(const MixtureState& state, const Hyperparams& hp);

MhDiagnostics update_shared_hyperparams(MixtureState& state, const Hyperparams& hp,
                                        RngStream& rng);

// Test-oracle alternative (see ChainConfig::use_conditional_alpha_B).
void sample_alpha_B_conditional(MixtureState& state, const Hyperparams& hp, RngStream& rng);

// --- block 3: K and alpha_M -------------------------------------------------

// Unnormalised log weight of K = k (k >= K_plus) in the telescoping draw.
double log_K_weight(int k, const std::vector<int>& counts, int K_plus,
                    double alpha_M, const BnbParams& bnb);

// Weights for k = K_plus..cap, truncated adaptively when a term falls 1e-12
// below the running maximum.
std::vector<double> sample_K_log_weights(const std::vector<int>& counts, int K_plus,
                                         double alpha_M, const BnbParams& bnb, int cap);

int sample_K(const std::vector<int>& counts, int K_plus, double alpha_M,
             const BnbParams& bnb, int cap, RngStream& rng);

double log_target_alpha_M(double alpha_M, const std::vector<int>& counts, int K_plus,
                          int K, long T, double nu_l, double nu_r);

// Random-walk MH on log alpha_M; returns true when accepted.
bool update_alpha_M(MixtureState& state, const std::vector<int>& counts,
                    const Hyperparams& hp, RngStream& rng);

// --- block 4: refill and weights --------------------------------------------

ClusterParams draw_cluster_from_prior(const MixtureState& state, const Hyperparams& hp,
                                      Eigen::Index p, RngStream& rng);
void add_empty_components(MixtureState& state, int K_new, const Hyperparams& hp,
                          RngStream& rng);

VectorXd weight_posterior_concentration(const std::vector<int>& counts, double alpha_M, int K);
VectorXd sample_weights(const std::vector<int>& counts, double alpha_M, int K,
                        RngStream& rng);

// --- full sweep / chain -----------------------------------------------------

// One full iteration: blocks 1 -> 2 -> 3 -> 4 in order. `iteration` keys the
// per-cluster substreams, so results are independent of the thread count.
void run_iteration(MixtureState& state, const Dataset& data, const ChainConfig& cfg,
                   long iteration, MhDiagnostics& diag);

ChainResult run_chain(const Dataset& data, const ChainConfig& cfg);

}  // namespace mf2a

#endif
