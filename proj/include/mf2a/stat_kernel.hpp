#ifndef MF2A_STAT_KERNEL_HPP
#define MF2A_STAT_KERNEL_HPP

#include <Eigen/Dense>
#include <vector>

#include "mf2a/rng.hpp"

namespace mf2a {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Gaussian with covariance loadings*loadings^T + diag(idio_var). The loading
// matrix always has its full complement of columns; near-zero (spike) columns
// are kept as-is, never pruned.
struct LowRankGaussian {
  VectorXd mean;      // p
  MatrixXd loadings;  // p x H
  VectorXd idio_var;  // p, strictly positive
};

struct BnbParams {
  double alpha_lambda = 1.0;
  double a_pi = 4.0;
  double b_pi = 3.0;
};

double lbeta(double a, double b);

// log P(K = k) for K-1 ~ BNB(alpha_lambda, a_pi, b_pi), k = 1, 2, ...
double log_bnb_pmf(long k, const BnbParams& params);

// Prior mean 1 + alpha_lambda * b_pi / (a_pi - 1); requires a_pi > 1.
double bnb_prior_mean(const BnbParams& params);

// Precomputed Woodbury factorisation of a LowRankGaussian, for repeated
// density evaluation against many observations. Cost per observation is
// O(pH + H^2); the p x p covariance is never formed.
class LowRankGaussianEval {
 public:
  explicit LowRankGaussianEval(const LowRankGaussian& g);

  double log_density(const VectorXd& y) const;

  // log densities for every row of a T x p matrix
  VectorXd log_density_rows(const MatrixXd& y) const;

 private:
  VectorXd mean_;
  VectorXd inv_idio_;      // 1/xi^2
  MatrixXd scaled_load_;   // Xi^{-1} Lambda, p x H
  MatrixXd cap_chol_;      // lower Cholesky of I_H + Lambda^T Xi^{-1} Lambda
  double log_det_;         // log|Omega|
  double norm_const_;      // -0.5 (p log 2pi + log|Omega|)
};

double log_mvn_lowrank(const VectorXd& y, const LowRankGaussian& g);

// Central multivariate Student-t with scale matrix scale * I_p.
double log_mv_t_isotropic(const VectorXd& x, double dof, double scale);

// F(nu_l, nu_r) log density at x > 0.
double log_f_density(double x, double nu_l, double nu_r);

// --- seeded draws ---------------------------------------------------------
// gamma is shape/rate (mean shape/rate); inverse_gamma(a, b) has mean
// b/(a-1) for a > 1, i.e. the reciprocal of a gamma(a, rate=b) draw.

double draw_normal(RngStream& rng);
double draw_gamma(double shape, double rate, RngStream& rng);
double draw_inverse_gamma(double shape, double rate_of_inverse, RngStream& rng);
double draw_beta(double a, double b, RngStream& rng);
double draw_f(double nu_l, double nu_r, RngStream& rng);
VectorXd draw_dirichlet(const VectorXd& concentrations, RngStream& rng);
VectorXd draw_std_normal_vec(Eigen::Index n, RngStream& rng);

// mean + chol_lower * z with z standard normal; chol_lower must be lower
// triangular with positive diagonal.
VectorXd draw_mvn_chol(const VectorXd& mean, const MatrixXd& chol_lower, RngStream& rng);

// Index i with probability softmax(logits)_i, via max-shifted exponentials.
int sample_categorical_from_logits(const VectorXd& logits, RngStream& rng);

struct CholeskyResult {
  MatrixXd lower;
  double jitter = 0.0;  // value actually added to the diagonal
};

// Cholesky of M + j*I, escalating j through {0, 1e-10, 1e-8, 1e-6} until the
// factorisation succeeds. The ladder is absolute: callers feed unit-scaled
// (standardised) quantities. Throws NumericalError with condition
// diagnostics if the top of the ladder fails.
CholeskyResult cholesky_spd(const MatrixXd& m);

}  // namespace mf2a

#endif
