#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mf2a/errors.hpp"
#include "mf2a/evaluate.hpp"
#include "mf2a/io.hpp"
#include "mf2a/postprocess.hpp"
#include "mf2a/sampler.hpp"
#include "mf2a/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// precedence: MF2A_SEED env > --seed flag > config file > default
std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           std::optional<std::uint64_t> file_value,
                           std::uint64_t fallback) {
  if (const char* env = std::getenv("MF2A_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw mf2a::ConfigError("MF2A_SEED is not a valid integer");
    }
  }
  if (flag_given) return flag_value;
  if (file_value.has_value()) return *file_value;
  return fallback;
}

std::string csv_cell(double x) { return mf2a::format_double(x); }

void write_matrix_csv(const std::string& path, const mf2a::MatrixXd& m) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out << ',';
    out << 'x' << (j + 1);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv_cell(m(i, j));
    }
    out << '\n';
  }
  mf2a::write_text_atomic(path, out.str());
}

mf2a::MatrixXd read_matrix_csv(const std::string& path) {
  const mf2a::Dataset d = mf2a::read_dataset_csv(path);
  return d.values;
}

// ---------------------------------------------------------------------------

int cmd_simulate(int study, int p, int T, bool p_given, bool t_given,
                 std::uint64_t seed, const std::string& out_dir) {
  std::pair<mf2a::Dataset, mf2a::SimTruth> sim;
  if (study == 1) {
    sim = mf2a::gen_study1(p, T, seed);
  } else if (study == 2) {
    if (p_given || t_given)
      std::cerr << "mf2a: warning: --study 2 is a fixed design (p=20, T=700); "
                   "--p/--t ignored\n";
    sim = mf2a::gen_study2(seed);
  } else {
    throw mf2a::ConfigError("--study must be 1 or 2");
  }
  fs::create_directories(out_dir);
  mf2a::write_dataset_csv((fs::path(out_dir) / "data.csv").string(), sim.first);
  mf2a::write_truth_json((fs::path(out_dir) / "truth.json").string(), sim.second);
  std::cout << "wrote " << (fs::path(out_dir) / "data.csv").string() << " ("
            << sim.first.n_obs() << " x " << sim.first.n_dims() << ") and truth.json\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& config_path,
            bool seed_given, std::uint64_t seed_flag, bool iters_given, long iters_flag,
            bool burnin_given, double burnin_frac, bool thin_given, long thin_flag,
            int chains, bool no_standardize, int threads_flag, bool threads_given,
            const std::string& out_dir) {
  mf2a::Hyperparams hp;
  mf2a::ChainControls controls;
  std::optional<std::uint64_t> file_seed;
  bool file_has_burnin = false, file_has_iters = false, file_has_thin = false;
  if (!config_path.empty()) {
    auto kv = mf2a::parse_config_file(config_path);
    if (auto it = kv.find("seed"); it != kv.end()) {
      file_seed = std::stoull(it->second);
      kv.erase(it);
    }
    file_has_burnin = kv.count("burnin") > 0;
    file_has_iters = kv.count("iters") > 0;
    file_has_thin = kv.count("thin") > 0;
    mf2a::apply_config(kv, hp, controls);
  }
  if (iters_given || !file_has_iters) hp.iters = iters_flag;
  if (thin_given || !file_has_thin) hp.thin = thin_flag;
  if (burnin_given || !file_has_burnin)
    hp.burnin = std::llround(burnin_frac * static_cast<double>(hp.iters));
  if (threads_given) controls.threads = threads_flag;
  const std::uint64_t seed = resolve_seed(seed_given, seed_flag, file_seed, 1);
  if (chains < 1) throw mf2a::ConfigError("--chains must be >= 1");

  mf2a::Dataset data = mf2a::read_dataset_csv(data_path);
  const std::string digest = mf2a::file_digest(data_path);
  if (!no_standardize) data = mf2a::standardize(data);

  mf2a::RunManifest manifest;
  manifest.version = mf2a::software_version();
  manifest.dataset_digest = digest;
  manifest.dataset_path = data_path;
  manifest.chains = chains;
  manifest.started_at = now_iso8601();
  manifest.standardized = data.standardized;
  manifest.center = data.center;
  manifest.scale = data.scale;
  manifest.controls = controls;

  fs::create_directories(out_dir);
  std::vector<mf2a::ChainResult> results(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  std::vector<std::uint64_t> seeds;
  for (int c = 0; c < chains; ++c)
    seeds.push_back(c == 0 ? seed
                           : mf2a::RngStream::derive_id({seed, static_cast<std::uint64_t>(c)}));
  manifest.seeds = seeds;

  auto run_one = [&](int c) {
    try {
      mf2a::ChainConfig cfg;
      cfg.hyper = hp;
      cfg.seed = seeds[static_cast<std::size_t>(c)];
      cfg.record_alloc_every = controls.record_alloc_every;
      cfg.k_max_cap = controls.k_max_cap;
      cfg.threads = controls.threads;
      cfg.mh_target_diag = true;
      results[static_cast<std::size_t>(c)] = mf2a::run_chain(data, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (chains == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 0; c < chains; ++c) pool.emplace_back(run_one, c);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int c = 0; c < chains; ++c) {
    const std::string name = "trace_chain_" + std::to_string(c) + ".jsonl";
    mf2a::write_trace((fs::path(out_dir) / name).string(),
                      results[static_cast<std::size_t>(c)].trace);
    manifest.trace_files.push_back(name);
    manifest.diagnostics.push_back(results[static_cast<std::size_t>(c)].diagnostics);
  }
  manifest.finished_at = now_iso8601();
  // resolve the data-driven defaults for the record before snapshotting
  mf2a::Hyperparams resolved = hp;
  resolved.resolve_defaults(data);
  manifest.config = resolved;
  mf2a::write_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);

  std::size_t total = 0;
  for (const auto& r : results) total += r.trace.size();
  std::cout << "fit complete: " << chains << " chain(s), " << total
            << " retained draws, output in " << out_dir << "\n";
  return 0;
}

int cmd_summarize(const std::string& run_dir, const std::string& data_path,
                  bool seed_given, std::uint64_t seed_flag, const std::string& out_dir) {
  const mf2a::RunManifest manifest =
      mf2a::read_manifest((fs::path(run_dir) / "manifest.json").string());

  if (!data_path.empty()) {
    const std::string digest = mf2a::file_digest(data_path);
    if (digest != manifest.dataset_digest)
      throw mf2a::DataError("dataset digest mismatch: fit saw " + manifest.dataset_digest +
                            ", " + data_path + " hashes to " + digest);
  }

  std::vector<mf2a::DrawRecord> trace;
  std::vector<std::string> kplus_lines;
  for (std::size_t c = 0; c < manifest.trace_files.size(); ++c) {
    const auto part =
        mf2a::read_trace((fs::path(run_dir) / manifest.trace_files[c]).string());
    for (const auto& rec : part)
      kplus_lines.push_back(std::to_string(c) + "," + std::to_string(rec.iter) + "," +
                            std::to_string(rec.K_plus));
    trace.insert(trace.end(), part.begin(), part.end());
  }

  const std::uint64_t seed =
      resolve_seed(seed_given, seed_flag, std::nullopt,
                   manifest.seeds.empty() ? 1 : manifest.seeds.front());
  const mf2a::IdentificationResult ident = mf2a::identify_posterior(trace, seed);
  const mf2a::IdentifiedPosterior& post = ident.posterior;

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  // summary.json: headline estimates + attrition + standardisation metadata
  json s;
  s["K_hat"] = post.K_hat;
  s["H_hat"] = post.H_hat;
  s["M_retained"] = post.M_retained;
  s["attrition"] = {{"total_draws", post.attrition.total_draws},
                    {"kept_kplus_mode", post.attrition.kept_kplus_mode},
                    {"kept_permutation", post.attrition.kept_permutation},
                    {"kept_h_mode", post.attrition.kept_h_mode},
                    {"removed_kplus", post.attrition.removed_kplus()},
                    {"removed_permutation", post.attrition.removed_permutation()},
                    {"removed_h", post.attrition.removed_h()}};
  s["standardized"] = manifest.standardized;
  s["center"] = std::vector<double>(manifest.center.begin(), manifest.center.end());
  s["scale"] = std::vector<double>(manifest.scale.begin(), manifest.scale.end());
  s["dataset_digest"] = manifest.dataset_digest;
  s["relabel_seed"] = seed;
  mf2a::write_text_atomic((out / "summary.json").string(), s.dump(2) + "\n");

  // cluster means
  {
    std::ostringstream means;
    means << "cluster";
    for (Eigen::Index i = 0; i < post.mu_mean.front().size(); ++i) means << ",x" << (i + 1);
    means << '\n';
    for (int k = 0; k < post.K_hat; ++k) {
      means << (k + 1);
      for (Eigen::Index i = 0; i < post.mu_mean[static_cast<std::size_t>(k)].size(); ++i)
        means << ',' << csv_cell(post.mu_mean[static_cast<std::size_t>(k)][i]);
      means << '\n';
    }
    mf2a::write_text_atomic((out / "cluster_means.csv").string(), means.str());
  }

  for (int k = 0; k < post.K_hat; ++k) {
    write_matrix_csv((out / ("omega_mean_" + std::to_string(k + 1) + ".csv")).string(),
                     post.omega_mean[static_cast<std::size_t>(k)]);
    write_matrix_csv((out / ("omega_meansq_" + std::to_string(k + 1) + ".csv")).string(),
                     post.omega_meansq[static_cast<std::size_t>(k)]);
  }

  // posterior tables of K, K_plus over all draws; H over the relabeled set
  {
    std::map<int, long> k_counts, kplus_counts;
    for (const auto& rec : trace) {
      k_counts[rec.K]++;
      kplus_counts[rec.K_plus]++;
    }
    std::ostringstream kt, kpt;
    kt << "K,count\n";
    for (const auto& [k, n] : k_counts) kt << k << ',' << n << '\n';
    kpt << "K_plus,count\n";
    for (const auto& [k, n] : kplus_counts) kpt << k << ',' << n << '\n';
    mf2a::write_text_atomic((out / "posterior_K.csv").string(), kt.str());
    mf2a::write_text_atomic((out / "posterior_Kplus.csv").string(), kpt.str());
  }
  {
    std::ostringstream ht;
    ht << "cluster,H,count\n";
    for (int k = 0; k < post.K_hat; ++k)
      for (const auto& [h, n] : post.h_posterior_counts[static_cast<std::size_t>(k)])
        ht << (k + 1) << ',' << h << ',' << n << '\n';
    mf2a::write_text_atomic((out / "posterior_H.csv").string(), ht.str());
  }

  // K_plus per retained iteration, per chain
  {
    std::ostringstream kp;
    kp << "chain,iter,K_plus\n";
    for (const auto& line : kplus_lines) kp << line << '\n';
    mf2a::write_text_atomic((out / "kplus_trace.csv").string(), kp.str());
  }

  // modal allocation over final draws carrying allocations
  {
    int T = 0;
    for (const auto& rec : ident.final_draws)
      if (rec.alloc.has_value()) {
        T = static_cast<int>(rec.alloc->size());
        break;
      }
    if (T > 0) {
      const auto modal = mf2a::modal_allocation(ident.final_draws, T, post.K_hat);
      std::ostringstream al;
      al << "t,cluster\n";
      for (int t = 0; t < T; ++t)
        al << (t + 1) << ',' << (modal[static_cast<std::size_t>(t)] + 1) << '\n';
      mf2a::write_text_atomic((out / "allocation.csv").string(), al.str());
    } else {
      std::cerr << "mf2a: warning: no retained draw carries allocations; "
                   "allocation.csv not written\n";
    }
  }

  std::cout << "summary: K_hat=" << post.K_hat << " H_hat=[";
  for (std::size_t k = 0; k < post.H_hat.size(); ++k)
    std::cout << (k ? "," : "") << post.H_hat[k];
  std::cout << "] M=" << post.M_retained << " (of " << post.attrition.total_draws
            << " draws) -> " << out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& summary_dir, const std::string& truth_path,
                 const std::string& out_dir) {
  const fs::path sum(summary_dir);
  if (!fs::exists(sum / "summary.json"))
    throw mf2a::DataError("no summary.json in " + summary_dir);
  if (!fs::exists(truth_path)) throw mf2a::DataError("truth file not found: " + truth_path);

  json s = json::parse(mf2a::read_text((sum / "summary.json").string()));
  const int K_hat = s.at("K_hat").get<int>();
  mf2a::SimTruth truth = mf2a::read_truth_json(truth_path);

  // map the truth to the standardised scale the fit ran on
  if (s.at("standardized").get<bool>()) {
    const auto c = s.at("center").get<std::vector<double>>();
    const auto sc = s.at("scale").get<std::vector<double>>();
    const Eigen::Map<const mf2a::VectorXd> scale(sc.data(), static_cast<Eigen::Index>(sc.size()));
    const auto inv = scale.cwiseInverse();
    for (auto& om : truth.omega) om = inv.asDiagonal() * om * inv.asDiagonal();
  }

  // estimated labels
  const mf2a::Dataset alloc_csv = mf2a::read_dataset_csv((sum / "allocation.csv").string());
  std::vector<int> est(static_cast<std::size_t>(alloc_csv.n_obs()));
  for (Eigen::Index t = 0; t < alloc_csv.n_obs(); ++t)
    est[static_cast<std::size_t>(t)] = static_cast<int>(alloc_csv.values(t, 1));
  if (est.size() != truth.labels.size())
    throw mf2a::DataError("allocation and truth label lengths differ");

  mf2a::ScoreReport report;
  report.ari = mf2a::adjusted_rand_index(est, truth.labels);
  report.confusion = mf2a::confusion_matrix(est, truth.labels);
  report.matching = mf2a::optimal_matching(report.confusion);
  report.error_pct = 100.0 *
                     static_cast<double>(static_cast<long>(est.size()) -
                                         report.matching.matched_count) /
                     static_cast<double>(est.size());

  std::vector<mf2a::MatrixXd> omega_mean, omega_meansq;
  for (int k = 0; k < K_hat; ++k) {
    omega_mean.push_back(
        read_matrix_csv((sum / ("omega_mean_" + std::to_string(k + 1) + ".csv")).string()));
    omega_meansq.push_back(read_matrix_csv(
        (sum / ("omega_meansq_" + std::to_string(k + 1) + ".csv")).string()));
  }
  // allocation clusters are 1..K_hat but a cluster may be absent from the
  // modal allocation; realign the matching onto the full 1..K_hat index
  std::vector<int> est_to_true(static_cast<std::size_t>(K_hat), -1);
  for (std::size_t j = 0; j < report.confusion.col_labels.size(); ++j) {
    const int cluster = report.confusion.col_labels[j];
    if (cluster >= 1 && cluster <= K_hat)
      est_to_true[static_cast<std::size_t>(cluster - 1)] = report.matching.est_to_true[j];
  }
  report.mse_omega =
      mf2a::mse_omega_from_moments(omega_mean, omega_meansq, truth.omega, est_to_true);

  fs::create_directories(out_dir);
  std::ostringstream scores;
  scores << "metric,value\n";
  scores << "ari," << csv_cell(report.ari) << '\n';
  scores << "error_pct," << csv_cell(report.error_pct) << '\n';
  for (std::size_t k = 0; k < report.mse_omega.size(); ++k)
    scores << "mse_omega_" << (k + 1) << ',' << csv_cell(report.mse_omega[k]) << '\n';
  mf2a::write_text_atomic((fs::path(out_dir) / "scores.csv").string(), scores.str());

  std::ostringstream conf;
  conf << "true_label";
  for (int l : report.confusion.col_labels) conf << ",est_" << l;
  conf << '\n';
  for (Eigen::Index i = 0; i < report.confusion.counts.rows(); ++i) {
    conf << report.confusion.row_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < report.confusion.counts.cols(); ++j)
      conf << ',' << report.confusion.counts(i, j);
    conf << '\n';
  }
  mf2a::write_text_atomic((fs::path(out_dir) / "confusion.csv").string(), conf.str());

  std::cout << "ari=" << report.ari << " error_pct=" << report.error_pct << " mse=[";
  for (std::size_t k = 0; k < report.mse_omega.size(); ++k)
    std::cout << (k ? "," : "") << report.mse_omega[k];
  std::cout << "] -> " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& summary_dir, const std::string& out_dir) {
  const fs::path sum(summary_dir);
  if (!fs::exists(sum / "summary.json"))
    throw mf2a::DataError("no summary.json in " + summary_dir);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  // H posterior counts -> normalised mass per cluster
  {
    const std::string text = mf2a::read_text((sum / "posterior_H.csv").string());
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::map<int, std::vector<std::pair<int, long>>> per_cluster;
    std::map<int, long> totals;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string a, b, c;
      std::getline(ls, a, ',');
      std::getline(ls, b, ',');
      std::getline(ls, c, ',');
      const int cluster = std::stoi(a), h = std::stoi(b);
      const long n = std::stol(c);
      per_cluster[cluster].emplace_back(h, n);
      totals[cluster] += n;
    }
    std::ostringstream mass;
    mass << "cluster,H,mass\n";
    for (const auto& [cluster, rows] : per_cluster)
      for (const auto& [h, n] : rows)
        mass << cluster << ',' << h << ','
             << csv_cell(static_cast<double>(n) / static_cast<double>(totals[cluster]))
             << '\n';
    mf2a::write_text_atomic((out / "h_posterior_mass.csv").string(), mass.str());
  }

  // K_plus trace passes through unchanged
  mf2a::write_text_atomic((out / "kplus_trace.csv").string(),
                          mf2a::read_text((sum / "kplus_trace.csv").string()));

  // assignment timeline: observation index doubles as the time axis
  {
    const mf2a::Dataset alloc_csv = mf2a::read_dataset_csv((sum / "allocation.csv").string());
    std::ostringstream tl;
    tl << "t,time,cluster\n";
    for (Eigen::Index t = 0; t < alloc_csv.n_obs(); ++t)
      tl << static_cast<long>(alloc_csv.values(t, 0)) << ','
         << static_cast<long>(alloc_csv.values(t, 0)) << ','
         << static_cast<long>(alloc_csv.values(t, 1)) << '\n';
    mf2a::write_text_atomic((out / "assignment_timeline.csv").string(), tl.str());
  }

  std::cout << "report files written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic mixture of finite mixtures of factor analysers"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a benchmark dataset");
  int study = 1, sim_p = 10, sim_t = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "sim_out";
  sim->add_option("--study", study, "design 1 (balanced) or 2 (unbalanced, fixed size)");
  auto* popt = sim->add_option("--p", sim_p, "number of variables (study 1)");
  auto* topt = sim->add_option("--t", sim_t, "number of observations (study 1)");
  auto* sseed = sim->add_option("--seed", sim_seed, "generator seed");
  sim->add_option("--out", sim_out, "output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "run the telescoping sampler");
  std::string fit_data, fit_config, fit_out = "run_out";
  std::uint64_t fit_seed = 1;
  long fit_iters = 50000, fit_thin = 1;
  double fit_burnin_frac = 0.2;
  int fit_chains = 1, fit_threads = 1;
  bool no_standardize = false;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--config", fit_config, "key=value config file");
  auto* fseed = fit->add_option("--seed", fit_seed, "chain seed");
  auto* fiters = fit->add_option("--iters", fit_iters, "total iterations");
  auto* fburn = fit->add_option("--burnin-frac", fit_burnin_frac, "burn-in fraction");
  auto* fthin = fit->add_option("--thin", fit_thin, "thinning interval");
  fit->add_option("--chains", fit_chains, "number of parallel chains");
  auto* fthreads = fit->add_option("--threads", fit_threads, "worker threads per chain");
  fit->add_flag("--no-standardize", no_standardize, "skip standardisation");
  fit->add_option("--out", fit_out, "output directory")->required();

  // summarize
  auto* summ = app.add_subcommand("summarize", "identify the posterior from traces");
  std::string summ_run, summ_data, summ_out = "summary_out";
  std::uint64_t summ_seed = 1;
  summ->add_option("--run", summ_run, "fit output directory")->required();
  summ->add_option("--data", summ_data, "dataset CSV for digest verification");
  auto* mseed = summ->add_option("--seed", summ_seed, "relabelling k-means seed");
  summ->add_option("--out", summ_out, "output directory")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score a summary against ground truth");
  std::string eval_summary, eval_truth, eval_out = "eval_out";
  eval->add_option("--summary", eval_summary, "summarize output directory")->required();
  eval->add_option("--truth", eval_truth, "truth JSON from simulate")->required();
  eval->add_option("--out", eval_out, "output directory");

  // report
  auto* rep = app.add_subcommand("report", "emit plot-ready long-format CSVs");
  std::string rep_summary, rep_out = "report_out";
  rep->add_option("--summary", rep_summary, "summarize output directory")->required();
  rep->add_option("--out", rep_out, "output directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return cmd_simulate(study, sim_p, sim_t, popt->count() > 0, topt->count() > 0,
                          resolve_seed(sseed->count() > 0, sim_seed, std::nullopt, 1),
                          sim_out);
    if (fit->parsed())
      return cmd_fit(fit_data, fit_config, fseed->count() > 0, fit_seed,
                     fiters->count() > 0, fit_iters, fburn->count() > 0, fit_burnin_frac,
                     fthin->count() > 0, fit_thin, fit_chains, no_standardize,
                     fit_threads, fthreads->count() > 0, fit_out);
    if (summ->parsed())
      return cmd_summarize(summ_run, summ_data, mseed->count() > 0, summ_seed, summ_out);
    if (eval->parsed()) return cmd_evaluate(eval_summary, eval_truth, eval_out);
    if (rep->parsed()) return cmd_report(rep_summary, rep_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const mf2a::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mf2a::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const mf2a::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
