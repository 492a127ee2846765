#include "mf2a/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "mf2a/errors.hpp"
#include "mf2a/kmeans.hpp"

namespace mf2a {

namespace {

// substream tags, one per sampler block
constexpr std::uint64_t kTagInit = 0x11;
constexpr std::uint64_t kTagBlock1 = 0xB1;
constexpr std::uint64_t kTagBlock2Cluster = 0xB2;
constexpr std::uint64_t kTagBlock2Shared = 0x2B;
constexpr std::uint64_t kTagBlock3K = 0x3A;
constexpr std::uint64_t kTagBlock3Alpha = 0x3B;
constexpr std::uint64_t kTagBlock4 = 0xB4;

RngStream block_stream(const ChainConfig& cfg, long iteration, std::uint64_t tag,
                       std::uint64_t extra = 0) {
  return RngStream(cfg.seed,
                   RngStream::derive_id({static_cast<std::uint64_t>(iteration), tag, extra}));
}

MatrixXd gather_rows(const MatrixXd& values, const std::vector<int>& idx) {
  MatrixXd out(static_cast<Eigen::Index>(idx.size()), values.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = values.row(idx[r]);
  return out;
}

void require_filled(const MixtureState& state, int k, const char* op) {
  if (k < 0 || k >= state.K_plus || state.counts[k] == 0)
    throw std::domain_error(std::string(op) + ": cluster must be filled");
}

// Index-striped parallel loop; tasks must be independent. Exceptions from
// workers are captured and rethrown on the caller thread.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(std::max(threads, 1), n);
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<int> cluster_members(const MixtureState& state, int k) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(state.counts[static_cast<std::size_t>(k)]));
  for (int t = 0; t < static_cast<int>(state.alloc.size()); ++t)
    if (state.alloc[static_cast<std::size_t>(t)] == k) idx.push_back(t);
  return idx;
}

// --- initialisation ---------------------------------------------------------

MatrixXd initial_covariance(const MatrixXd& values, double v0) {
  const auto p = values.cols();
  const double T = static_cast<double>(values.rows());
  MatrixXd omega = v0 * MatrixXd::Identity(p, p);
  omega.noalias() += 0.5 * values.transpose() * values;
  return omega / (v0 + 0.5 * T);
}

std::pair<MatrixXd, VectorXd> decompose_covariance(const MatrixXd& omega, int H,
                                                   double xi_floor) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(omega);
  if (eig.info() != Eigen::Success)
    throw NumericalError("decompose_covariance: eigendecomposition failed");
  const auto p = omega.rows();
  const int n_use = std::min<int>(H, static_cast<int>(p));
  MatrixXd lambda = MatrixXd::Zero(p, H);
  // eigenvalues ascend; walk from the top. The floor is subtracted from the
  // eigenvalues so lambda*lambda^T + floored diagonal reproduces omega when H
  // covers the rank.
  for (int j = 0; j < n_use; ++j) {
    const auto src = p - 1 - j;
    const double ev = std::max(eig.eigenvalues()[src] - xi_floor, 0.0);
    lambda.col(j) = eig.eigenvectors().col(src) * std::sqrt(ev);
  }
  VectorXd xi2 = (omega - lambda * lambda.transpose()).diagonal().cwiseMax(xi_floor);
  return {std::move(lambda), std::move(xi2)};
}

MixtureState init_state(const Dataset& data, const ChainConfig& cfg) {
  Hyperparams hp = cfg.hyper;
  hp.resolve_defaults(data);
  hp.check();

  const auto T = data.n_obs();
  const auto p = data.n_dims();
  if (T <= p)
    std::cerr << "mf2a: warning: T = " << T << " observations for p = " << p
              << " variables; T substantially larger than p is recommended\n";
  if (T < hp.K_init)
    throw ConfigError("init_state: fewer observations than K_init clusters");

  // k-means split; retry on a degenerate (empty) solution with a fresh seed
  RngStream init_rng(cfg.seed, RngStream::derive_id({kTagInit}));
  KmeansResult km;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    RngStream sub = init_rng.substream(static_cast<std::uint64_t>(attempt));
    km = kmeans(data.values, hp.K_init, sub);
    ok = !km.degenerate;
  }
  if (!ok)
    throw NumericalError("init_state: k-means produced an empty cluster in 5 attempts");

  MixtureState state;
  state.K = hp.K_init;
  state.K_plus = hp.K_init;
  state.alloc = km.labels;
  state.counts.assign(static_cast<std::size_t>(hp.K_init), 0);
  for (int a : state.alloc) state.counts[static_cast<std::size_t>(a)]++;

  state.weights = draw_dirichlet(VectorXd::Constant(hp.K_init, 1.0 / hp.K_init), init_rng);
  state.alpha_M = hp.nu_r > 2.0 ? hp.nu_r / (hp.nu_r - 2.0) : 1.0;  // F prior mean
  state.alpha_B = hp.a_alpha / hp.b_alpha;
  state.b_xi = (hp.a_g / hp.b_g.array()).matrix();  // prior means
  state.b_0_spike = hp.a1 / hp.b1;
  state.b_theta = hp.a2 / hp.b2;

  const MatrixXd omega_hat = initial_covariance(data.values);
  auto [lambda0, xi20] = decompose_covariance(omega_hat, hp.H);

  state.clusters.resize(static_cast<std::size_t>(hp.K_init));
  for (int k = 0; k < hp.K_init; ++k) {
    ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
    c.mu = km.centers.row(k).transpose();
    c.lambda = lambda0;
    c.xi2 = xi20;
    c.tau.resize(hp.H);
    c.indicator.resize(hp.H);
    c.theta.resize(hp.H);
    for (int h = 0; h < hp.H; ++h) {
      c.tau[h] = draw_beta(state.alpha_B / hp.H, 1.0, init_rng);
      c.indicator[h] = init_rng.uniform() <= c.tau[h] ? 1 : 0;
      c.theta[h] = c.indicator[h] == 1
                       ? draw_inverse_gamma(hp.a_theta, state.b_theta, init_rng)
                       : draw_inverse_gamma(hp.a0, state.b_0_spike, init_rng);
    }
    c.factors = MatrixXd::Zero(state.counts[static_cast<std::size_t>(k)], hp.H);
  }
  relabel_filled_first(state);
  return state;
}

// --- block 1 ----------------------------------------------------------------

void relabel_filled_first(MixtureState& state) {
  state.counts.assign(static_cast<std::size_t>(state.K), 0);
  for (int a : state.alloc) state.counts[static_cast<std::size_t>(a)]++;

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(state.K));
  for (int k = 0; k < state.K; ++k)
    if (state.counts[static_cast<std::size_t>(k)] > 0) order.push_back(k);
  const int k_plus = static_cast<int>(order.size());
  for (int k = 0; k < state.K; ++k)
    if (state.counts[static_cast<std::size_t>(k)] == 0) order.push_back(k);

  std::vector<int> new_pos(static_cast<std::size_t>(state.K));
  for (int pos = 0; pos < state.K; ++pos)
    new_pos[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;

  std::vector<ClusterParams> clusters(static_cast<std::size_t>(state.K));
  std::vector<int> counts(static_cast<std::size_t>(state.K));
  VectorXd weights(state.K);
  for (int pos = 0; pos < state.K; ++pos) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(pos)]);
    clusters[static_cast<std::size_t>(pos)] = std::move(state.clusters[src]);
    counts[static_cast<std::size_t>(pos)] = state.counts[src];
    weights[pos] = state.weights[static_cast<Eigen::Index>(src)];
  }
  for (int& a : state.alloc) a = new_pos[static_cast<std::size_t>(a)];
  state.clusters = std::move(clusters);
  state.counts = std::move(counts);
  state.weights = std::move(weights);
  state.K_plus = k_plus;
}

void update_allocations(MixtureState& state, const Dataset& data, RngStream& rng) {
  const auto T = data.n_obs();
  MatrixXd logits(T, state.K);
  for (int k = 0; k < state.K; ++k) {
    const ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
    LowRankGaussianEval eval({c.mu, c.lambda, c.xi2});
    const double lw = state.weights[k] > 0.0
                          ? std::log(state.weights[k])
                          : -std::numeric_limits<double>::infinity();
    logits.col(k) = eval.log_density_rows(data.values).array() + lw;
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    try {
      state.alloc[static_cast<std::size_t>(t)] =
          sample_categorical_from_logits(logits.row(t).transpose(), rng);
    } catch (const std::domain_error&) {
      std::ostringstream msg;
      msg << "update_allocations: no admissible component for observation " << t;
      throw NumericalError(msg.str());
    }
  }
  relabel_filled_first(state);
}

// --- block 2a ----------------------------------------------------------------

MatrixXd factor_posterior_precision(const MatrixXd& lambda, const VectorXd& xi2) {
  MatrixXd prec = MatrixXd::Identity(lambda.cols(), lambda.cols());
  prec.noalias() += lambda.transpose() * xi2.cwiseInverse().asDiagonal() * lambda;
  return prec;
}

void sample_factors(int k, MixtureState& state, const Dataset& data, RngStream& rng) {
  require_filled(state, k, "sample_factors");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const std::vector<int> idx = cluster_members(state, k);
  const auto n = static_cast<Eigen::Index>(idx.size());
  const auto H = c.lambda.cols();

  const CholeskyResult chol = cholesky_spd(factor_posterior_precision(c.lambda, c.xi2));
  const MatrixXd scaled = c.xi2.cwiseInverse().asDiagonal() * c.lambda;  // Xi^-1 Lambda

  MatrixXd resid = gather_rows(data.values, idx);
  resid.rowwise() -= c.mu.transpose();
  MatrixXd rhs = (resid * scaled).transpose();  // H x n, Lambda^T Xi^-1 (y_t - mu)

  // posterior means: P^{-1} rhs through the shared Cholesky
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(rhs);
  chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(rhs);

  MatrixXd z(H, n);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index h = 0; h < H; ++h) z(h, t) = draw_normal(rng);
  chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(z);

  c.factors = (rhs + z).transpose();
}

RowPosterior loading_row_posterior(const VectorXd& theta, double xi2_i,
                                   const MatrixXd& factors_t,
                                   const VectorXd& residual_i) {
  RowPosterior out;
  const double inv_xi2 = 1.0 / xi2_i;
  out.precision = theta.cwiseInverse().asDiagonal();
  out.precision.noalias() += inv_xi2 * factors_t * factors_t.transpose();
  const VectorXd rhs = inv_xi2 * (factors_t * residual_i);
  CholeskyResult chol = cholesky_spd(out.precision);
  out.mean = rhs;
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(out.mean);
  chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(out.mean);
  out.chol_lower = std::move(chol.lower);
  return out;
}

void sample_loading_rows(int k, MixtureState& state, const Dataset& data, RngStream& rng) {
  require_filled(state, k, "sample_loading_rows");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const std::vector<int> idx = cluster_members(state, k);
  const auto H = c.lambda.cols();

  const MatrixXd factors_t = c.factors.transpose();  // H x n
  MatrixXd y_k = gather_rows(data.values, idx);
  for (Eigen::Index i = 0; i < data.n_dims(); ++i) {
    const VectorXd residual_i = (y_k.col(i).array() - c.mu[i]).matrix();
    const RowPosterior post = loading_row_posterior(c.theta, c.xi2[i], factors_t, residual_i);
    VectorXd z = draw_std_normal_vec(H, rng);
    post.chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    c.lambda.row(i) = (post.mean + z).transpose();
  }
}

MatrixXd cluster_residuals(int k, const MixtureState& state, const Dataset& data) {
  require_filled(state, k, "cluster_residuals");
  const ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const std::vector<int> idx = cluster_members(state, k);
  MatrixXd resid = gather_rows(data.values, idx);
  resid.rowwise() -= c.mu.transpose();
  resid.noalias() -= c.factors * c.lambda.transpose();
  return resid;
}

std::pair<double, double> idio_posterior_params(double a_xi, double b_xi_i,
                                                const VectorXd& residuals_i) {
  return {a_xi + 0.5 * static_cast<double>(residuals_i.size()),
          b_xi_i + 0.5 * residuals_i.squaredNorm()};
}

void sample_idio_precisions(int k, MixtureState& state, const Dataset& data,
                            const Hyperparams& hp, RngStream& rng) {
  const MatrixXd resid = cluster_residuals(k, state, data);
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  for (Eigen::Index i = 0; i < data.n_dims(); ++i) {
    const auto [shape, rate] = idio_posterior_params(hp.a_xi, state.b_xi[i], resid.col(i));
    c.xi2[i] = 1.0 / draw_gamma(shape, rate, rng);
  }
}

MeanPosterior cluster_mean_posterior(const VectorXd& b0, const VectorXd& B0_diag,
                                     const VectorXd& xi2, int n_k,
                                     const VectorXd& resid_sum) {
  MeanPosterior out;
  out.var = (B0_diag.cwiseInverse() + static_cast<double>(n_k) * xi2.cwiseInverse())
                .cwiseInverse();
  out.mean = out.var.cwiseProduct(b0.cwiseQuotient(B0_diag) + resid_sum.cwiseQuotient(xi2));
  return out;
}

void sample_cluster_mean(int k, MixtureState& state, const Dataset& data,
                         const Hyperparams& hp, RngStream& rng) {
  require_filled(state, k, "sample_cluster_mean");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const std::vector<int> idx = cluster_members(state, k);

  MatrixXd defactored = gather_rows(data.values, idx);
  defactored.noalias() -= c.factors * c.lambda.transpose();
  const VectorXd resid_sum = defactored.colwise().sum().transpose();

  const MeanPosterior post = cluster_mean_posterior(hp.b0_mean, hp.B0_diag, c.xi2,
                                                    static_cast<int>(idx.size()), resid_sum);
  c.mu = post.mean + post.var.cwiseSqrt().cwiseProduct(draw_std_normal_vec(c.mu.size(), rng));
}

std::pair<double, double> indicator_log_weights(const VectorXd& lambda_col,
                                                double alpha_B, int H,
                                                double a0, double b0,
                                                double a_theta, double b_theta) {
  const double log_w0 = std::log(static_cast<double>(H)) - std::log(alpha_B + H) +
                        log_mv_t_isotropic(lambda_col, 2.0 * a0, b0 / a0);
  const double log_w1 = std::log(alpha_B) - std::log(alpha_B + H) +
                        log_mv_t_isotropic(lambda_col, 2.0 * a_theta, b_theta / a_theta);
  return {log_w0, log_w1};
}

void sample_indicators(int k, MixtureState& state, const Hyperparams& hp, RngStream& rng) {
  require_filled(state, k, "sample_indicators");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  VectorXd logits(2);
  for (Eigen::Index h = 0; h < c.lambda.cols(); ++h) {
    const auto [l0, l1] =
        indicator_log_weights(c.lambda.col(h), state.alpha_B, hp.H, hp.a0,
                              state.b_0_spike, hp.a_theta, state.b_theta);
    logits << l0, l1;
    c.indicator[h] = sample_categorical_from_logits(logits, rng);
  }
}

void sample_slab_probs(int k, MixtureState& state, RngStream& rng) {
  require_filled(state, k, "sample_slab_probs");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const int H = static_cast<int>(c.tau.size());
  for (int h = 0; h < H; ++h)
    c.tau[h] = draw_beta(state.alpha_B / H + c.indicator[h], 2.0 - c.indicator[h], rng);
}

std::pair<double, double> theta_posterior_params(int indicator, double p_dim,
                                                 double col_sq_sum, double a0,
                                                 double b0, double a_theta,
                                                 double b_theta) {
  if (indicator == 0) return {a0 + 0.5 * p_dim, b0 + 0.5 * col_sq_sum};
  return {a_theta + 0.5 * p_dim, b_theta + 0.5 * col_sq_sum};
}

void sample_thetas(int k, MixtureState& state, const Hyperparams& hp, RngStream& rng) {
  require_filled(state, k, "sample_thetas");
  ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
  const double p_dim = static_cast<double>(c.lambda.rows());
  for (Eigen::Index h = 0; h < c.lambda.cols(); ++h) {
    const auto [shape, rate] =
        theta_posterior_params(c.indicator[h], p_dim, c.lambda.col(h).squaredNorm(),
                               hp.a0, state.b_0_spike, hp.a_theta, state.b_theta);
    c.theta[h] = draw_inverse_gamma(shape, rate, rng);
  }
}

// --- block 2b ----------------------------------------------------------------

double alpha_B_step_size(int H, double alpha1, double alpha2) {
  return 1.0 + alpha1 * std::pow(1.0 - alpha2, static_cast<double>(H));
}

double log_target_alpha_B(double alpha_B, long H_plus_plus, long H_inf, int H,
                          double a_alpha, double b_alpha) {
  if (alpha_B <= 0) return -std::numeric_limits<double>::infinity();
  const double log_prior = a_alpha * std::log(b_alpha) - std::lgamma(a_alpha) +
                           (a_alpha - 1.0) * std::log(alpha_B) - b_alpha * alpha_B;
  return log_prior +
         static_cast<double>(H_plus_plus) * (std::log(alpha_B) - std::log(alpha_B + H)) +
         static_cast<double>(H_inf) * (std::log(static_cast<double>(H)) - std::log(alpha_B + H));
}

SharedPosteriors shared_hyper_posteriors(const MixtureState& state, const Hyperparams& hp) {
  SharedPosteriors out;
  const auto p = state.b_xi.size();
  out.b_xi_shape = hp.a_g + state.K_plus * hp.a_xi;
  out.b_xi_rates = hp.b_g;
  for (Eigen::Index i = 0; i < p; ++i)
    for (int k = 0; k < state.K_plus; ++k)
      out.b_xi_rates[i] += 1.0 / state.clusters[static_cast<std::size_t>(k)].xi2[i];

  double inv_theta_slab = 0.0, inv_theta_spike = 0.0;
  for (int k = 0; k < state.K_plus; ++k) {
    const ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
    for (Eigen::Index h = 0; h < c.theta.size(); ++h) {
      if (c.indicator[h] == 1) {
        out.h_plus_plus++;
        inv_theta_slab += 1.0 / c.theta[h];
      } else {
        inv_theta_spike += 1.0 / c.theta[h];
      }
    }
  }
  out.h_inf = static_cast<long>(hp.H) * state.K_plus - out.h_plus_plus;
  out.b0_shape = hp.a1 + static_cast<double>(out.h_inf) * hp.a0;
  out.b0_rate = hp.b1 + inv_theta_spike;
  out.b_theta_shape = hp.a2 + static_cast<double>(out.h_plus_plus) * hp.a_theta;
  out.b_theta_rate = hp.b2 + inv_theta_slab;
  return out;
}

MhDiagnostics update_shared_hyperparams(MixtureState& state, const Hyperparams& hp,
                                        RngStream& rng) {
  const SharedPosteriors post = shared_hyper_posteriors(state, hp);
  for (Eigen::Index i = 0; i < state.b_xi.size(); ++i)
    state.b_xi[i] = draw_gamma(post.b_xi_shape, post.b_xi_rates[i], rng);
  state.b_0_spike = draw_gamma(post.b0_shape, post.b0_rate, rng);
  state.b_theta = draw_gamma(post.b_theta_shape, post.b_theta_rate, rng);

  // random walk MH for alpha_B on the log scale, Jacobian included
  MhDiagnostics diag;
  const double step = alpha_B_step_size(hp.H, hp.alpha1_step, hp.alpha2_step);
  diag.applied_step_alpha_B = step;
  const double proposal = state.alpha_B * std::exp(step * draw_normal(rng));
  const double log_accept =
      log_target_alpha_B(proposal, post.h_plus_plus, post.h_inf, hp.H, hp.a_alpha,
                         hp.b_alpha) -
      log_target_alpha_B(state.alpha_B, post.h_plus_plus, post.h_inf, hp.H, hp.a_alpha,
                         hp.b_alpha) +
      std::log(proposal) - std::log(state.alpha_B);
  diag.proposals_alpha_B = 1;
  if (std::log(rng.uniform()) < log_accept) {
    state.alpha_B = proposal;
    diag.accept_count_alpha_B = 1;
  }
  return diag;
}

void sample_alpha_B_conditional(MixtureState& state, const Hyperparams& hp, RngStream& rng) {
  double log_tau_sum = 0.0;
  for (int k = 0; k < state.K_plus; ++k) {
    const ClusterParams& c = state.clusters[static_cast<std::size_t>(k)];
    for (Eigen::Index h = 0; h < c.tau.size(); ++h) log_tau_sum += std::log(c.tau[h]);
  }
  const double shape = hp.a_alpha + static_cast<double>(hp.H) * state.K_plus;
  const double rate = hp.b_alpha - log_tau_sum / hp.H;
  state.alpha_B = draw_gamma(shape, rate, rng);
}

// --- block 3 ------------------------------------------------------------------

double log_K_weight(int k, const std::vector<int>& counts, int K_plus,
                    double alpha_M, const BnbParams& bnb) {
  if (k < K_plus) return -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  const double ratio = alpha_M / kd;
  double w = log_bnb_pmf(k, bnb) + K_plus * std::log(alpha_M) +
             std::lgamma(kd + 1.0) - std::lgamma(kd - K_plus + 1.0) -
             K_plus * std::log(kd);
  for (int j = 0; j < K_plus; ++j)
    w += std::lgamma(counts[static_cast<std::size_t>(j)] + ratio) - std::lgamma(1.0 + ratio);
  return w;
}

std::vector<double> sample_K_log_weights(const std::vector<int>& counts, int K_plus,
                                         double alpha_M, const BnbParams& bnb, int cap) {
  if (cap < K_plus) throw ConfigError("sample_K: cap below K_plus");
  constexpr double kLogCutoff = -27.631021115928547;  // log(1e-12)
  std::vector<double> weights;
  weights.reserve(64);
  double running_max = -std::numeric_limits<double>::infinity();
  for (int k = K_plus; k <= cap; ++k) {
    const double w = log_K_weight(k, counts, K_plus, alpha_M, bnb);
    if (w - running_max < kLogCutoff) break;
    weights.push_back(w);
    running_max = std::max(running_max, w);
  }
  return weights;
}

int sample_K(const std::vector<int>& counts, int K_plus, double alpha_M,
             const BnbParams& bnb, int cap, RngStream& rng) {
  const std::vector<double> w = sample_K_log_weights(counts, K_plus, alpha_M, bnb, cap);
  const Eigen::Map<const VectorXd> logits(w.data(), static_cast<Eigen::Index>(w.size()));
  return K_plus + sample_categorical_from_logits(logits, rng);
}

double log_target_alpha_M(double alpha_M, const std::vector<int>& counts, int K_plus,
                          int K, long T, double nu_l, double nu_r) {
  if (alpha_M <= 0) return -std::numeric_limits<double>::infinity();
  const double ratio = alpha_M / static_cast<double>(K);
  double lt = log_f_density(alpha_M, nu_l, nu_r) + K_plus * std::log(alpha_M) +
              std::lgamma(alpha_M) - std::lgamma(static_cast<double>(T) + alpha_M);
  for (int j = 0; j < K_plus; ++j)
    lt += std::lgamma(counts[static_cast<std::size_t>(j)] + ratio) - std::lgamma(1.0 + ratio);
  return lt;
}

bool update_alpha_M(MixtureState& state, const std::vector<int>& counts,
                    const Hyperparams& hp, RngStream& rng) {
  const long T = std::accumulate(counts.begin(), counts.end(), 0L);
  const double proposal = state.alpha_M * std::exp(hp.mh_scale_alpha_M * draw_normal(rng));
  const double log_accept =
      log_target_alpha_M(proposal, counts, state.K_plus, state.K, T, hp.nu_l, hp.nu_r) -
      log_target_alpha_M(state.alpha_M, counts, state.K_plus, state.K, T, hp.nu_l, hp.nu_r) +
      std::log(proposal) - std::log(state.alpha_M);
  if (std::log(rng.uniform()) < log_accept) {
    state.alpha_M = proposal;
    return true;
  }
  return false;
}

// --- block 4 ------------------------------------------------------------------

ClusterParams draw_cluster_from_prior(const MixtureState& state, const Hyperparams& hp,
                                      Eigen::Index p, RngStream& rng) {
  ClusterParams c;
  c.mu = hp.b0_mean + hp.B0_diag.cwiseSqrt().cwiseProduct(draw_std_normal_vec(p, rng));
  c.xi2.resize(p);
  for (Eigen::Index i = 0; i < p; ++i)
    c.xi2[i] = draw_inverse_gamma(hp.a_xi, state.b_xi[i], rng);
  c.tau.resize(hp.H);
  c.indicator.resize(hp.H);
  c.theta.resize(hp.H);
  c.lambda.resize(p, hp.H);
  for (int h = 0; h < hp.H; ++h) {
    c.tau[h] = draw_beta(state.alpha_B / hp.H, 1.0, rng);
    c.indicator[h] = rng.uniform() <= c.tau[h] ? 1 : 0;
    c.theta[h] = c.indicator[h] == 1
                     ? draw_inverse_gamma(hp.a_theta, state.b_theta, rng)
                     : draw_inverse_gamma(hp.a0, state.b_0_spike, rng);
    c.lambda.col(h) = std::sqrt(c.theta[h]) * draw_std_normal_vec(p, rng);
  }
  c.factors = MatrixXd::Zero(0, hp.H);
  return c;
}

void add_empty_components(MixtureState& state, int K_new, const Hyperparams& hp,
                          RngStream& rng) {
  if (K_new < state.K_plus)
    throw std::domain_error("add_empty_components: K_new below K_plus");
  const Eigen::Index p = state.b_xi.size();
  state.clusters.resize(static_cast<std::size_t>(state.K_plus));
  state.counts.resize(static_cast<std::size_t>(state.K_plus));
  for (int k = state.K_plus; k < K_new; ++k) {
    state.clusters.push_back(draw_cluster_from_prior(state, hp, p, rng));
    state.counts.push_back(0);
  }
  state.K = K_new;
  const auto old_w = state.weights.size();
  state.weights.conservativeResize(K_new);
  for (Eigen::Index k = old_w; k < K_new; ++k) state.weights[k] = 0.0;
}

VectorXd weight_posterior_concentration(const std::vector<int>& counts, double alpha_M,
                                        int K) {
  VectorXd conc(K);
  for (int k = 0; k < K; ++k)
    conc[k] = alpha_M / K + static_cast<double>(counts[static_cast<std::size_t>(k)]);
  return conc;
}

VectorXd sample_weights(const std::vector<int>& counts, double alpha_M, int K,
                        RngStream& rng) {
  return draw_dirichlet(weight_posterior_concentration(counts, alpha_M, K), rng);
}

// --- full sweep ----------------------------------------------------------------

void run_iteration(MixtureState& state, const Dataset& data, const ChainConfig& cfg,
                   long iteration, MhDiagnostics& diag) {
  const Hyperparams& hp = cfg.hyper;

  RngStream b1 = block_stream(cfg, iteration, kTagBlock1);
  update_allocations(state, data, b1);

  parallel_for(state.K_plus, cfg.threads, [&](int k) {
    RngStream ck = block_stream(cfg, iteration, kTagBlock2Cluster,
                                static_cast<std::uint64_t>(k));
    sample_factors(k, state, data, ck);
    sample_loading_rows(k, state, data, ck);
    sample_idio_precisions(k, state, data, hp, ck);
    sample_cluster_mean(k, state, data, hp, ck);
    sample_indicators(k, state, hp, ck);
    sample_slab_probs(k, state, ck);
    sample_thetas(k, state, hp, ck);
  });

  RngStream b2b = block_stream(cfg, iteration, kTagBlock2Shared);
  if (cfg.use_conditional_alpha_B) {
    MhDiagnostics d = update_shared_hyperparams(state, hp, b2b);
    (void)d;  // acceptance stats from the MH path are discarded
    sample_alpha_B_conditional(state, hp, b2b);
  } else {
    const MhDiagnostics d = update_shared_hyperparams(state, hp, b2b);
    diag.accept_count_alpha_B += d.accept_count_alpha_B;
    diag.proposals_alpha_B += d.proposals_alpha_B;
    diag.applied_step_alpha_B = d.applied_step_alpha_B;
  }

  RngStream b3a = block_stream(cfg, iteration, kTagBlock3K);
  const int K_new = sample_K(state.counts, state.K_plus, state.alpha_M, hp.bnb,
                             cfg.k_max_cap, b3a);
  state.K = K_new;

  RngStream b3b = block_stream(cfg, iteration, kTagBlock3Alpha);
  diag.proposals_alpha_M += 1;
  if (update_alpha_M(state, state.counts, hp, b3b)) diag.accept_count_alpha_M += 1;

  RngStream b4 = block_stream(cfg, iteration, kTagBlock4);
  add_empty_components(state, K_new, hp, b4);
  state.weights = sample_weights(state.counts, state.alpha_M, K_new, b4);
}

ChainResult run_chain(const Dataset& data, const ChainConfig& cfg_in) {
  ChainConfig cfg = cfg_in;
  cfg.hyper.resolve_defaults(data);
  cfg.hyper.check();
  if (cfg.k_max_cap < cfg.hyper.K_init)
    throw ConfigError("run_chain: k_max_cap below K_init");

  ChainResult result;
  MixtureState state = init_state(data, cfg);

  for (long it = 1; it <= cfg.hyper.iters; ++it) {
    try {
      run_iteration(state, data, cfg, it, result.diagnostics);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << e.what() << " (iteration " << it << ", K_plus " << state.K_plus << ")";
      throw NumericalError(msg.str());
    }
    if (cfg.check_invariants) {
      const auto violations = validate(state, data);
      if (!violations.empty()) {
        std::ostringstream msg;
        msg << "state invariant violated at iteration " << it << ": ";
        for (const auto& v : violations) msg << v << "; ";
        throw NumericalError(msg.str());
      }
    }
    if (it > cfg.hyper.burnin && (it - cfg.hyper.burnin) % cfg.hyper.thin == 0) {
      const bool with_alloc =
          cfg.record_alloc_every > 0 && it % cfg.record_alloc_every == 0;
      result.trace.push_back(make_draw_record(it, state, with_alloc));
    }
  }

  if (cfg.mh_target_diag) {
    const double rm = result.diagnostics.rate_alpha_M();
    const double rb = result.diagnostics.rate_alpha_B();
    if (result.diagnostics.proposals_alpha_M > 0 && (rm <= 0.05 || rm >= 0.95))
      std::cerr << "mf2a: warning: alpha_M acceptance rate " << rm
                << " outside (0.05, 0.95)\n";
    if (result.diagnostics.proposals_alpha_B > 0 && (rb <= 0.05 || rb >= 0.95))
      std::cerr << "mf2a: warning: alpha_B acceptance rate " << rb
                << " outside (0.05, 0.95)\n";
  }
  return result;
}

}  // namespace mf2a
