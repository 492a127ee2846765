#include "mf2a/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mf2a/errors.hpp"

namespace mf2a {

namespace {

double column_median(VectorXd col) {
  std::sort(col.begin(), col.end());
  const auto n = col.size();
  return (n % 2 == 1) ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
}

}  // namespace

int default_num_factors(Eigen::Index p, int small_p_threshold) {
  if (p <= small_p_threshold) return static_cast<int>(p);
  return static_cast<int>((p - 1) / 2);
}

void Hyperparams::resolve_defaults(const Dataset& data) {
  const auto p = data.n_dims();
  VectorXd range(p);
  for (Eigen::Index i = 0; i < p; ++i)
    range[i] = data.values.col(i).maxCoeff() - data.values.col(i).minCoeff();
  if ((range.array() <= 0.0).any())
    throw DataError("constant data column: cannot set data-driven priors");

  if (b0_mean.size() == 0) {
    b0_mean.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) b0_mean[i] = column_median(data.values.col(i));
  }
  if (B0_diag.size() == 0) B0_diag = range.array().square();
  if (b_g.size() == 0) b_g = 100.0 / range.array().square();
  if (H == 0) H = default_num_factors(p, small_p_threshold);
  if (K_init == 0) K_init = expected_clusters > 0 ? 3 * expected_clusters : 10;
}

void Hyperparams::check() const {
  std::ostringstream msg;
  if (bnb.alpha_lambda <= 0 || bnb.a_pi <= 0 || bnb.b_pi <= 0)
    msg << "BNB parameters must be positive; ";
  if (bnb.a_pi <= 1) msg << "a_pi must exceed 1 for E(K) to exist; ";
  if (nu_l <= 0 || nu_r <= 0) msg << "F prior dof must be positive; ";
  if (a_alpha <= 0 || b_alpha <= 0) msg << "alpha_B prior must be positive; ";
  if (a_xi <= 0 || a_g <= 0) msg << "xi prior shapes must be positive; ";
  if (b_g.size() > 0 && (b_g.array() <= 0.0).any()) msg << "b_g must be positive; ";
  if (a_theta <= 0 || a2 <= 0 || b2 <= 0) msg << "slab constants must be positive; ";
  if (a0 <= 0 || a1 <= 0 || b1 <= 0) msg << "spike constants must be positive; ";
  if (a0 <= a_theta) msg << "spike dof a0 must exceed slab dof a_theta; ";
  if (H < 1 || K_init < 1) msg << "H and K_init must be >= 1 once resolved; ";
  if (iters < 0 || burnin < 0 || thin < 1) msg << "invalid iteration controls; ";
  if (burnin > iters) msg << "burnin exceeds iters; ";
  if (mh_scale_alpha_M <= 0) msg << "mh_scale_alpha_M must be positive; ";
  if (B0_diag.size() > 0 && (B0_diag.array() <= 0.0).any())
    msg << "B0_diag must be positive; ";
  const std::string s = msg.str();
  if (!s.empty()) throw ConfigError("hyperparameters: " + s);
}

bool DrawRecord::operator==(const DrawRecord& other) const {
  auto veq = [](const auto& a, const auto& b) {
    return a.size() == b.size() && a == b;
  };
  if (iter != other.iter || K != other.K || K_plus != other.K_plus ||
      counts != other.counts || alpha_M != other.alpha_M ||
      alpha_B != other.alpha_B || b_theta != other.b_theta ||
      b_0_spike != other.b_0_spike || alloc != other.alloc ||
      clusters.size() != other.clusters.size())
    return false;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto& a = clusters[k];
    const auto& b = other.clusters[k];
    if (!veq(a.mu, b.mu) || !veq(a.xi2, b.xi2) || !veq(a.theta, b.theta) ||
        !veq(a.tau, b.tau) || !veq(a.indicator, b.indicator))
      return false;
    if (a.lambda.rows() != b.lambda.rows() || a.lambda.cols() != b.lambda.cols() ||
        a.lambda != b.lambda)
      return false;
  }
  return true;
}

DrawRecord make_draw_record(long iter, const MixtureState& state, bool with_alloc) {
  DrawRecord rec;
  rec.iter = iter;
  rec.K = state.K;
  rec.K_plus = state.K_plus;
  rec.counts = state.counts;
  rec.alpha_M = state.alpha_M;
  rec.alpha_B = state.alpha_B;
  rec.b_theta = state.b_theta;
  rec.b_0_spike = state.b_0_spike;
  rec.clusters.reserve(state.K_plus);
  for (int k = 0; k < state.K_plus; ++k) {
    const ClusterParams& c = state.clusters[k];
    rec.clusters.push_back({c.mu, c.lambda, c.xi2, c.theta, c.tau, c.indicator});
  }
  if (with_alloc) rec.alloc = state.alloc;
  return rec;
}

std::vector<std::string> validate(const MixtureState& state, const Dataset& data) {
  std::vector<std::string> out;
  const auto T = data.n_obs();
  const auto p = data.n_dims();

  if (state.K < 1) out.push_back("K must be >= 1");
  if (state.K_plus < 0 || state.K_plus > state.K)
    out.push_back("K_plus must lie in [0, K]");
  if (static_cast<int>(state.clusters.size()) != state.K)
    out.push_back("cluster count != K");
  if (static_cast<int>(state.counts.size()) != state.K)
    out.push_back("counts length != K");
  if (state.weights.size() != state.K) out.push_back("weights length != K");
  if (std::abs(state.weights.sum() - 1.0) > 1e-8)
    out.push_back("weights violate simplex constraint");
  if ((state.weights.array() < 0.0).any()) out.push_back("negative weight");

  long total = 0;
  bool seen_empty = false;
  for (int k = 0; k < static_cast<int>(state.counts.size()); ++k) {
    total += state.counts[k];
    if (state.counts[k] < 0) out.push_back("negative count");
    if (state.counts[k] == 0) seen_empty = true;
    else if (seen_empty) out.push_back("empty component before filled one");
    if (k < state.K_plus && state.counts[k] == 0)
      out.push_back("zero count within first K_plus components");
    if (k >= state.K_plus && state.counts[k] != 0)
      out.push_back("nonzero count beyond K_plus");
  }
  if (total != T) out.push_back("counts do not sum to T");

  if (static_cast<Eigen::Index>(state.alloc.size()) != T)
    out.push_back("alloc length != T");
  std::vector<int> recount(state.K, 0);
  bool alloc_in_range = true;
  for (int a : state.alloc) {
    if (a < 0 || a >= state.K) {
      alloc_in_range = false;
      continue;
    }
    recount[a]++;
  }
  if (!alloc_in_range) out.push_back("allocation out of range");
  if (alloc_in_range && recount != state.counts)
    out.push_back("counts inconsistent with allocations");

  for (int k = 0; k < static_cast<int>(state.clusters.size()); ++k) {
    const ClusterParams& c = state.clusters[k];
    std::ostringstream tag;
    tag << "cluster " << k << ": ";
    if (c.mu.size() != p) out.push_back(tag.str() + "mu dimension");
    if (c.lambda.rows() != p) out.push_back(tag.str() + "lambda rows");
    if (c.xi2.size() != p || (c.xi2.array() <= 0.0).any())
      out.push_back(tag.str() + "xi2 must be positive length-p");
    if ((c.theta.array() <= 0.0).any()) out.push_back(tag.str() + "theta must be positive");
    if ((c.tau.array() <= 0.0).any() || (c.tau.array() >= 1.0).any())
      out.push_back(tag.str() + "tau must lie in (0,1)");
    if (((c.indicator.array() != 0) && (c.indicator.array() != 1)).any())
      out.push_back(tag.str() + "indicator must be binary");
    if (c.lambda.cols() != c.theta.size() || c.theta.size() != c.tau.size() ||
        c.tau.size() != c.indicator.size())
      out.push_back(tag.str() + "column-block sizes disagree");
    if (k < state.K_plus && c.factors.rows() != state.counts[k])
      out.push_back(tag.str() + "factor rows != cluster size");
    if (!c.mu.allFinite() || !c.lambda.allFinite() || !c.xi2.allFinite())
      out.push_back(tag.str() + "non-finite parameters");
  }

  if (!(state.alpha_M > 0)) out.push_back("alpha_M must be positive");
  if (!(state.alpha_B > 0)) out.push_back("alpha_B must be positive");
  if (!(state.b_theta > 0)) out.push_back("b_theta must be positive");
  if (!(state.b_0_spike > 0)) out.push_back("b_0 must be positive");
  if (state.b_xi.size() != p || (state.b_xi.array() <= 0.0).any())
    out.push_back("b_xi must be positive length-p");
  return out;
}

}  // namespace mf2a
