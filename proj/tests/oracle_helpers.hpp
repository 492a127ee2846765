// Independent reference implementations used as test oracles. Everything here
// deliberately avoids the code paths under test: dense factorisations instead
// of Woodbury, std::beta / lgamma transcriptions instead of the library's
// arrangements, and std::mt19937_64 instead of the project RNG.
#ifndef MF2A_TESTS_ORACLE_HELPERS_HPP
#define MF2A_TESTS_ORACLE_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mf2a/model.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double dense_mvn_logpdf(const VectorXd& y, const VectorXd& mean,
                               const MatrixXd& cov) {
  const auto p = y.size();
  const Eigen::LLT<MatrixXd> llt(cov);
  const MatrixXd L = llt.matrixL();
  const VectorXd z = L.triangularView<Eigen::Lower>().solve(y - mean);
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * (p * std::log(2.0 * M_PI) + log_det + z.squaredNorm());
}

// direct transcription of the multivariate t with scale s*I
inline double mv_t_isotropic_logpdf(const VectorXd& x, double dof, double s) {
  const double p = static_cast<double>(x.size());
  double q = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) q += x[i] * x[i] / s;
  return std::lgamma((dof + p) / 2.0) - std::lgamma(dof / 2.0) -
         (p / 2.0) * std::log(dof * M_PI) - (p / 2.0) * std::log(s) -
         ((dof + p) / 2.0) * std::log(1.0 + q / dof);
}

// F density assembled in plain space from std::beta
inline double f_logpdf(double x, double d1, double d2) {
  const double num = std::pow(d1 / d2, d1 / 2.0) * std::pow(x, d1 / 2.0 - 1.0);
  const double den = std::beta(d1 / 2.0, d2 / 2.0) *
                     std::pow(1.0 + d1 * x / d2, (d1 + d2) / 2.0);
  return std::log(num / den);
}

// BNB pmf routed through std::beta and a plain product, usable for small k
inline double bnb_pmf_direct(long k, double al, double ap, double bp) {
  double gamma_ratio = 1.0;  // Gamma(al + k - 1) / (Gamma(al) Gamma(k))
  for (long j = 1; j < k; ++j)
    gamma_ratio *= (al + static_cast<double>(j) - 1.0) / static_cast<double>(j);
  return gamma_ratio * std::beta(al + ap, static_cast<double>(k) - 1.0 + bp) /
         std::beta(ap, bp);
}

inline MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen,
                              double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(gen);
  return m;
}

inline VectorXd random_vector(Eigen::Index n, std::mt19937_64& gen, double sd = 1.0) {
  return random_matrix(n, 1, gen, sd).col(0);
}

inline VectorXd random_positive(Eigen::Index n, std::mt19937_64& gen, double lo = 0.1,
                                double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

inline mf2a::LowRankGaussian random_lowrank(Eigen::Index p, Eigen::Index h,
                                            std::mt19937_64& gen) {
  return {random_vector(p, gen), random_matrix(p, h, gen), random_positive(p, gen)};
}

// complete-data log likelihood of a draw given allocations; invariant under
// consistent permutation of clusters and labels
inline double complete_data_loglik(const mf2a::DrawRecord& rec, const MatrixXd& values) {
  double ll = 0.0;
  std::vector<MatrixXd> covs;
  for (const auto& c : rec.clusters) covs.push_back(c.omega());
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    const int k = (*rec.alloc)[static_cast<std::size_t>(t)];
    ll += dense_mvn_logpdf(values.row(t).transpose(), rec.clusters[static_cast<std::size_t>(k)].mu,
                           covs[static_cast<std::size_t>(k)]);
  }
  return ll;
}

// Simpson's rule on [a, b]
template <typename Fn>
double simpson(Fn&& f, double a, double b, int panels) {
  const double h = (b - a) / (2.0 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace oracle

#endif
