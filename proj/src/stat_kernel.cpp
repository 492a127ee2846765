#include "mf2a/stat_kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mf2a/errors.hpp"

namespace mf2a {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;
}  // namespace

double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_bnb_pmf(long k, const BnbParams& params) {
  if (k < 1) throw std::domain_error("log_bnb_pmf: k must be >= 1");
  if (params.alpha_lambda <= 0 || params.a_pi <= 0 || params.b_pi <= 0)
    throw std::domain_error("log_bnb_pmf: parameters must be positive");
  const double al = params.alpha_lambda, ap = params.a_pi, bp = params.b_pi;
  const double kd = static_cast<double>(k);
  return std::lgamma(al + kd - 1.0) + lbeta(al + ap, kd - 1.0 + bp) -
         std::lgamma(al) - std::lgamma(kd) - lbeta(ap, bp);
}

double bnb_prior_mean(const BnbParams& params) {
  if (params.a_pi <= 1.0)
    throw std::domain_error("bnb_prior_mean: a_pi must exceed 1 for E(K) to exist");
  return 1.0 + params.alpha_lambda * params.b_pi / (params.a_pi - 1.0);
}

LowRankGaussianEval::LowRankGaussianEval(const LowRankGaussian& g) {
  const auto p = g.mean.size();
  if (g.loadings.rows() != p || g.idio_var.size() != p)
    throw std::domain_error("LowRankGaussianEval: dimension mismatch");
  if ((g.idio_var.array() <= 0.0).any() || !g.idio_var.allFinite())
    throw std::domain_error("LowRankGaussianEval: idio_var must be strictly positive");
  if (!g.loadings.allFinite() || !g.mean.allFinite())
    throw std::domain_error("LowRankGaussianEval: non-finite parameters");

  mean_ = g.mean;
  inv_idio_ = g.idio_var.cwiseInverse();
  scaled_load_ = inv_idio_.asDiagonal() * g.loadings;
  const auto h = g.loadings.cols();
  MatrixXd cap = MatrixXd::Identity(h, h);
  cap.noalias() += g.loadings.transpose() * scaled_load_;
  CholeskyResult cr = cholesky_spd(cap);
  cap_chol_ = std::move(cr.lower);
  // matrix determinant lemma: log|Omega| = log|I + L^T Xi^-1 L| + sum log xi^2
  log_det_ = 2.0 * cap_chol_.diagonal().array().log().sum() +
             g.idio_var.array().log().sum();
  norm_const_ = -0.5 * (static_cast<double>(p) * kLog2Pi + log_det_);
}

double LowRankGaussianEval::log_density(const VectorXd& y) const {
  if (y.size() != mean_.size())
    throw std::domain_error("log_mvn_lowrank: dimension mismatch");
  if (!y.allFinite()) throw std::domain_error("log_mvn_lowrank: non-finite input");
  const VectorXd r = y - mean_;
  // Woodbury: r^T Omega^-1 r = r^T Xi^-1 r - || Lchol^-1 (Lambda^T Xi^-1 r) ||^2
  const double base = r.cwiseProduct(r).dot(inv_idio_);
  VectorXd u = scaled_load_.transpose() * r;
  cap_chol_.triangularView<Eigen::Lower>().solveInPlace(u);
  return norm_const_ - 0.5 * (base - u.squaredNorm());
}

VectorXd LowRankGaussianEval::log_density_rows(const MatrixXd& y) const {
  if (y.cols() != mean_.size())
    throw std::domain_error("log_mvn_lowrank: dimension mismatch");
  MatrixXd r = y.rowwise() - mean_.transpose();
  VectorXd base = (r.array().square().matrix() * inv_idio_);
  MatrixXd u = (r * scaled_load_).transpose();  // H x T, columns Lambda^T Xi^-1 r_t
  cap_chol_.triangularView<Eigen::Lower>().solveInPlace(u);
  VectorXd corr = u.colwise().squaredNorm();
  return (norm_const_ - 0.5 * (base - corr).array()).matrix();
}

double log_mvn_lowrank(const VectorXd& y, const LowRankGaussian& g) {
  return LowRankGaussianEval(g).log_density(y);
}

double log_mv_t_isotropic(const VectorXd& x, double dof, double scale) {
  if (dof <= 0 || scale <= 0)
    throw std::domain_error("log_mv_t_isotropic: dof and scale must be positive");
  if (!x.allFinite()) throw std::domain_error("log_mv_t_isotropic: non-finite input");
  const double p = static_cast<double>(x.size());
  const double quad = x.squaredNorm() / scale;
  return std::lgamma(0.5 * (dof + p)) - std::lgamma(0.5 * dof) -
         0.5 * p * (std::log(dof) + kLogPi + std::log(scale)) -
         0.5 * (dof + p) * std::log1p(quad / dof);
}

double log_f_density(double x, double nu_l, double nu_r) {
  if (x <= 0) throw std::domain_error("log_f_density: x must be positive");
  if (nu_l <= 0 || nu_r <= 0)
    throw std::domain_error("log_f_density: degrees of freedom must be positive");
  const double hl = 0.5 * nu_l, hr = 0.5 * nu_r;
  return -lbeta(hl, hr) + hl * (std::log(nu_l) - std::log(nu_r)) +
         (hl - 1.0) * std::log(x) - (hl + hr) * std::log1p(nu_l * x / nu_r);
}

double draw_normal(RngStream& rng) {
  // Box-Muller, cosine branch only: two uniforms per variate, no cached state
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double draw_gamma(double shape, double rate, RngStream& rng) {
  if (shape <= 0 || rate <= 0)
    throw std::domain_error("draw_gamma: shape and rate must be positive");
  // Marsaglia-Tsang squeeze; shape < 1 boosted via the u^(1/a) identity
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = draw_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return boost * d * v / rate;
  }
}

double draw_inverse_gamma(double shape, double rate_of_inverse, RngStream& rng) {
  return 1.0 / draw_gamma(shape, rate_of_inverse, rng);
}

double draw_beta(double a, double b, RngStream& rng) {
  const double x = draw_gamma(a, 1.0, rng);
  const double y = draw_gamma(b, 1.0, rng);
  return x / (x + y);
}

double draw_f(double nu_l, double nu_r, RngStream& rng) {
  const double u = draw_gamma(0.5 * nu_l, 1.0, rng);
  const double v = draw_gamma(0.5 * nu_r, 1.0, rng);
  return (u * nu_r) / (v * nu_l);
}

VectorXd draw_dirichlet(const VectorXd& concentrations, RngStream& rng) {
  if (concentrations.size() == 0 || (concentrations.array() <= 0.0).any())
    throw std::domain_error("draw_dirichlet: concentrations must be positive");
  VectorXd g(concentrations.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g[i] = draw_gamma(concentrations[i], 1.0, rng);
  return g / g.sum();
}

VectorXd draw_std_normal_vec(Eigen::Index n, RngStream& rng) {
  VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = draw_normal(rng);
  return z;
}

VectorXd draw_mvn_chol(const VectorXd& mean, const MatrixXd& chol_lower, RngStream& rng) {
  if (chol_lower.rows() != mean.size() || chol_lower.cols() != mean.size())
    throw std::domain_error("draw_mvn_chol: dimension mismatch");
  if ((chol_lower.diagonal().array() <= 0.0).any())
    throw std::domain_error("draw_mvn_chol: factor diagonal must be positive");
  return mean + chol_lower.triangularView<Eigen::Lower>() *
                    draw_std_normal_vec(mean.size(), rng);
}

int sample_categorical_from_logits(const VectorXd& logits, RngStream& rng) {
  const double m = logits.maxCoeff();
  if (!std::isfinite(m))
    throw std::domain_error("sample_categorical_from_logits: no finite logit");
  VectorXd w = (logits.array() - m).exp();
  const double total = w.sum();
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(w.size() - 1);
}

CholeskyResult cholesky_spd(const MatrixXd& m) {
  static const double ladder[] = {0.0, 1e-10, 1e-8, 1e-6};
  for (double j : ladder) {
    MatrixXd trial = m;
    if (j > 0.0) trial.diagonal().array() += j;
    Eigen::LLT<MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), j};
  }
  std::ostringstream msg;
  msg << "cholesky_spd: factorisation failed at max jitter 1e-6; dim=" << m.rows()
      << " diag range [" << m.diagonal().minCoeff() << ", " << m.diagonal().maxCoeff()
      << "] max |entry| " << m.cwiseAbs().maxCoeff();
  throw NumericalError(msg.str());
}

}  // namespace mf2a
