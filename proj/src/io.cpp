#include "mf2a/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mf2a/errors.hpp"

namespace mf2a {

using nlohmann::json;

std::string software_version() { return "0.1.0"; }

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// --- dataset CSV --------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed numeric field '" + s + "' in " + context);
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file: " + path);
  const auto header = split(strip_cr(line), ',');

  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "label") label_col = static_cast<int>(i);

  const int p = static_cast<int>(header.size()) - (label_col >= 0 ? 1 : 0);
  if (p < 1) throw DataError("dataset has no numeric columns: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    line_no++;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()) + " in " + path);
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == label_col) {
        const double lv = parse_number(fields[i], "label column");
        labels.push_back(static_cast<int>(lv));
      } else {
        row.push_back(parse_number(fields[i], "row " + std::to_string(line_no)));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("dataset has no observations: " + path);

  Dataset data;
  data.values.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int i = 0; i < p; ++i) data.values(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i)];
  if (label_col >= 0) data.truth_labels = std::move(labels);
  data.center = VectorXd::Zero(p);
  data.scale = VectorXd::Ones(p);
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < data.n_dims(); ++i) {
    if (i) out << ',';
    out << 'x' << (i + 1);
  }
  if (data.truth_labels.has_value()) out << ",label";
  out << '\n';
  for (Eigen::Index t = 0; t < data.n_obs(); ++t) {
    for (Eigen::Index i = 0; i < data.n_dims(); ++i) {
      if (i) out << ',';
      out << format_double(data.values(t, i));
    }
    if (data.truth_labels.has_value())
      out << ',' << (*data.truth_labels)[static_cast<std::size_t>(t)];
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

// --- trace ---------------------------------------------------------------------

namespace {

void append_vec(std::string& s, const VectorXd& v) {
  s += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  s += ']';
}

void append_ivec(std::string& s, const std::vector<int>& v) {
  s += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  s += ']';
}

VectorXd json_to_vec(const json& j) {
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string trace_line(const DrawRecord& rec) {
  std::string s = "{\"iter\":" + std::to_string(rec.iter);
  s += ",\"K\":" + std::to_string(rec.K);
  s += ",\"K_plus\":" + std::to_string(rec.K_plus);
  s += ",\"counts\":";
  append_ivec(s, rec.counts);
  s += ",\"alpha_M\":" + format_double(rec.alpha_M);
  s += ",\"alpha_B\":" + format_double(rec.alpha_B);
  s += ",\"b_theta\":" + format_double(rec.b_theta);
  s += ",\"b_0\":" + format_double(rec.b_0_spike);
  s += ",\"clusters\":[";
  for (std::size_t k = 0; k < rec.clusters.size(); ++k) {
    const auto& c = rec.clusters[k];
    if (k) s += ',';
    s += "{\"mu\":";
    append_vec(s, c.mu);
    s += ",\"lambda_rowmajor\":[";
    for (Eigen::Index i = 0; i < c.lambda.rows(); ++i)
      for (Eigen::Index h = 0; h < c.lambda.cols(); ++h) {
        if (i || h) s += ',';
        s += format_double(c.lambda(i, h));
      }
    s += "],\"xi2\":";
    append_vec(s, c.xi2);
    s += ",\"theta\":";
    append_vec(s, c.theta);
    s += ",\"tau\":";
    append_vec(s, c.tau);
    s += ",\"indicator\":[";
    for (Eigen::Index h = 0; h < c.indicator.size(); ++h) {
      if (h) s += ',';
      s += std::to_string(c.indicator[h]);
    }
    s += "]}";
  }
  s += ']';
  if (rec.alloc.has_value()) {
    s += ",\"alloc\":";
    append_ivec(s, *rec.alloc);
  }
  s += '}';
  return s;
}

DrawRecord parse_trace_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trace line: ") + e.what());
  }
  DrawRecord rec;
  rec.iter = j.at("iter").get<long>();
  rec.K = j.at("K").get<int>();
  rec.K_plus = j.at("K_plus").get<int>();
  rec.counts = j.at("counts").get<std::vector<int>>();
  rec.alpha_M = j.at("alpha_M").get<double>();
  rec.alpha_B = j.at("alpha_B").get<double>();
  rec.b_theta = j.at("b_theta").get<double>();
  rec.b_0_spike = j.at("b_0").get<double>();
  for (const auto& cj : j.at("clusters")) {
    DrawRecord::Cluster c;
    c.mu = json_to_vec(cj.at("mu"));
    c.xi2 = json_to_vec(cj.at("xi2"));
    c.theta = json_to_vec(cj.at("theta"));
    c.tau = json_to_vec(cj.at("tau"));
    const auto ind = cj.at("indicator").get<std::vector<int>>();
    c.indicator.resize(static_cast<Eigen::Index>(ind.size()));
    for (std::size_t h = 0; h < ind.size(); ++h)
      c.indicator[static_cast<Eigen::Index>(h)] = ind[h];
    const auto flat = cj.at("lambda_rowmajor").get<std::vector<double>>();
    const auto rows = c.mu.size();
    if (rows == 0 || static_cast<Eigen::Index>(flat.size()) % rows != 0)
      throw DataError("trace cluster: lambda_rowmajor length incompatible with mu");
    const auto cols = static_cast<Eigen::Index>(flat.size()) / rows;
    c.lambda.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index h = 0; h < cols; ++h)
        c.lambda(i, h) = flat[static_cast<std::size_t>(i * cols + h)];
    rec.clusters.push_back(std::move(c));
  }
  if (j.contains("alloc")) rec.alloc = j.at("alloc").get<std::vector<int>>();
  return rec;
}

void write_trace(const std::string& path, const std::vector<DrawRecord>& trace) {
  std::string out;
  for (const auto& rec : trace) {
    out += trace_line(rec);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<DrawRecord> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file: " + path);
  std::vector<DrawRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_trace_line(line));
  }
  return out;
}

// --- truth ---------------------------------------------------------------------

void write_truth_json(const std::string& path, const SimTruth& truth) {
  json j;
  j["k_true"] = truth.K_true;
  j["h_true"] = truth.H_true;
  j["labels"] = truth.labels;
  j["weights"] = std::vector<double>(truth.weights.begin(), truth.weights.end());
  json clusters = json::array();
  for (int k = 0; k < truth.K_true; ++k) {
    json c;
    const auto& mu = truth.mu[static_cast<std::size_t>(k)];
    const auto& lambda = truth.lambda[static_cast<std::size_t>(k)];
    const auto& xi2 = truth.xi2[static_cast<std::size_t>(k)];
    const auto& omega = truth.omega[static_cast<std::size_t>(k)];
    c["mu"] = std::vector<double>(mu.begin(), mu.end());
    c["xi2"] = std::vector<double>(xi2.begin(), xi2.end());
    c["lambda_cols"] = lambda.cols();
    std::vector<double> lam;
    for (Eigen::Index i = 0; i < lambda.rows(); ++i)
      for (Eigen::Index h = 0; h < lambda.cols(); ++h) lam.push_back(lambda(i, h));
    c["lambda_rowmajor"] = lam;
    std::vector<double> om;
    for (Eigen::Index i = 0; i < omega.rows(); ++i)
      for (Eigen::Index l = 0; l < omega.cols(); ++l) om.push_back(omega(i, l));
    c["omega_rowmajor"] = om;
    clusters.push_back(std::move(c));
  }
  j["clusters"] = std::move(clusters);
  write_text_atomic(path, j.dump(2) + "\n");
}

SimTruth read_truth_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed truth file: ") + e.what());
  }
  SimTruth t;
  t.K_true = j.at("k_true").get<int>();
  t.H_true = j.at("h_true").get<std::vector<int>>();
  t.labels = j.at("labels").get<std::vector<int>>();
  const auto w = j.at("weights").get<std::vector<double>>();
  t.weights = Eigen::Map<const VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  for (const auto& cj : j.at("clusters")) {
    const auto mu = cj.at("mu").get<std::vector<double>>();
    const auto xi2 = cj.at("xi2").get<std::vector<double>>();
    const auto lam = cj.at("lambda_rowmajor").get<std::vector<double>>();
    const auto om = cj.at("omega_rowmajor").get<std::vector<double>>();
    const auto cols = cj.at("lambda_cols").get<Eigen::Index>();
    const auto p = static_cast<Eigen::Index>(mu.size());
    t.mu.push_back(Eigen::Map<const VectorXd>(mu.data(), p));
    t.xi2.push_back(Eigen::Map<const VectorXd>(xi2.data(), p));
    MatrixXd lambda(p, cols);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index h = 0; h < cols; ++h)
        lambda(i, h) = lam[static_cast<std::size_t>(i * cols + h)];
    t.lambda.push_back(std::move(lambda));
    MatrixXd omega(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index l = 0; l < p; ++l)
        omega(i, l) = om[static_cast<std::size_t>(i * p + l)];
    t.omega.push_back(std::move(omega));
  }
  return t;
}

// --- config ----------------------------------------------------------------------

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    line = strip_cr(line);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

namespace {

double cfg_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": malformed number '" + value + "'");
  }
}

long cfg_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": malformed integer '" + value + "'");
  }
}

VectorXd cfg_vector(const std::string& key, const std::string& value) {
  const auto parts = split(value, ',');
  VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = cfg_double(key, parts[i]);
  return v;
}

}  // namespace

void apply_config(const std::map<std::string, std::string>& kv, Hyperparams& hp,
                  ChainControls& controls) {
  for (const auto& [key, value] : kv) {
    if (key == "alpha_lambda") hp.bnb.alpha_lambda = cfg_double(key, value);
    else if (key == "a_pi") hp.bnb.a_pi = cfg_double(key, value);
    else if (key == "b_pi") hp.bnb.b_pi = cfg_double(key, value);
    else if (key == "nu_l") hp.nu_l = cfg_double(key, value);
    else if (key == "nu_r") hp.nu_r = cfg_double(key, value);
    else if (key == "a_alpha") hp.a_alpha = cfg_double(key, value);
    else if (key == "b_alpha") hp.b_alpha = cfg_double(key, value);
    else if (key == "a_xi") hp.a_xi = cfg_double(key, value);
    else if (key == "a_g") hp.a_g = cfg_double(key, value);
    else if (key == "b_g") hp.b_g = cfg_vector(key, value);
    else if (key == "a_theta") hp.a_theta = cfg_double(key, value);
    else if (key == "a2") hp.a2 = cfg_double(key, value);
    else if (key == "b2") hp.b2 = cfg_double(key, value);
    else if (key == "a0") hp.a0 = cfg_double(key, value);
    else if (key == "a1") hp.a1 = cfg_double(key, value);
    else if (key == "b1") hp.b1 = cfg_double(key, value);
    else if (key == "b0_mean") hp.b0_mean = cfg_vector(key, value);
    else if (key == "B0_diag") hp.B0_diag = cfg_vector(key, value);
    else if (key == "H") hp.H = static_cast<int>(cfg_long(key, value));
    else if (key == "K_init") hp.K_init = static_cast<int>(cfg_long(key, value));
    else if (key == "expected_clusters") hp.expected_clusters = static_cast<int>(cfg_long(key, value));
    else if (key == "small_p_threshold") hp.small_p_threshold = static_cast<int>(cfg_long(key, value));
    else if (key == "iters") hp.iters = cfg_long(key, value);
    else if (key == "burnin") hp.burnin = cfg_long(key, value);
    else if (key == "thin") hp.thin = cfg_long(key, value);
    else if (key == "mh_scale_alpha_M") hp.mh_scale_alpha_M = cfg_double(key, value);
    else if (key == "alpha1_step") hp.alpha1_step = cfg_double(key, value);
    else if (key == "alpha2_step") hp.alpha2_step = cfg_double(key, value);
    else if (key == "record_alloc_every") controls.record_alloc_every = cfg_long(key, value);
    else if (key == "k_max_cap") controls.k_max_cap = static_cast<int>(cfg_long(key, value));
    else if (key == "threads") controls.threads = static_cast<int>(cfg_long(key, value));
    else throw ConfigError("unknown config key: " + key);
  }
}

// --- manifest ----------------------------------------------------------------------

namespace {

json hyper_to_json(const Hyperparams& hp) {
  json j;
  j["alpha_lambda"] = hp.bnb.alpha_lambda;
  j["a_pi"] = hp.bnb.a_pi;
  j["b_pi"] = hp.bnb.b_pi;
  j["nu_l"] = hp.nu_l;
  j["nu_r"] = hp.nu_r;
  j["a_alpha"] = hp.a_alpha;
  j["b_alpha"] = hp.b_alpha;
  j["a_xi"] = hp.a_xi;
  j["a_g"] = hp.a_g;
  j["b_g"] = std::vector<double>(hp.b_g.begin(), hp.b_g.end());
  j["a_theta"] = hp.a_theta;
  j["a2"] = hp.a2;
  j["b2"] = hp.b2;
  j["a0"] = hp.a0;
  j["a1"] = hp.a1;
  j["b1"] = hp.b1;
  j["b0_mean"] = std::vector<double>(hp.b0_mean.begin(), hp.b0_mean.end());
  j["B0_diag"] = std::vector<double>(hp.B0_diag.begin(), hp.B0_diag.end());
  j["H"] = hp.H;
  j["K_init"] = hp.K_init;
  j["expected_clusters"] = hp.expected_clusters;
  j["small_p_threshold"] = hp.small_p_threshold;
  j["iters"] = hp.iters;
  j["burnin"] = hp.burnin;
  j["thin"] = hp.thin;
  j["mh_scale_alpha_M"] = hp.mh_scale_alpha_M;
  j["alpha1_step"] = hp.alpha1_step;
  j["alpha2_step"] = hp.alpha2_step;
  return j;
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams hp;
  hp.bnb.alpha_lambda = j.at("alpha_lambda").get<double>();
  hp.bnb.a_pi = j.at("a_pi").get<double>();
  hp.bnb.b_pi = j.at("b_pi").get<double>();
  hp.nu_l = j.at("nu_l").get<double>();
  hp.nu_r = j.at("nu_r").get<double>();
  hp.a_alpha = j.at("a_alpha").get<double>();
  hp.b_alpha = j.at("b_alpha").get<double>();
  hp.a_xi = j.at("a_xi").get<double>();
  hp.a_g = j.at("a_g").get<double>();
  const auto bg = j.at("b_g").get<std::vector<double>>();
  hp.b_g = Eigen::Map<const VectorXd>(bg.data(), static_cast<Eigen::Index>(bg.size()));
  hp.a_theta = j.at("a_theta").get<double>();
  hp.a2 = j.at("a2").get<double>();
  hp.b2 = j.at("b2").get<double>();
  hp.a0 = j.at("a0").get<double>();
  hp.a1 = j.at("a1").get<double>();
  hp.b1 = j.at("b1").get<double>();
  const auto b0 = j.at("b0_mean").get<std::vector<double>>();
  hp.b0_mean = Eigen::Map<const VectorXd>(b0.data(), static_cast<Eigen::Index>(b0.size()));
  const auto B0 = j.at("B0_diag").get<std::vector<double>>();
  hp.B0_diag = Eigen::Map<const VectorXd>(B0.data(), static_cast<Eigen::Index>(B0.size()));
  hp.H = j.at("H").get<int>();
  hp.K_init = j.at("K_init").get<int>();
  hp.expected_clusters = j.at("expected_clusters").get<int>();
  hp.small_p_threshold = j.at("small_p_threshold").get<int>();
  hp.iters = j.at("iters").get<long>();
  hp.burnin = j.at("burnin").get<long>();
  hp.thin = j.at("thin").get<long>();
  hp.mh_scale_alpha_M = j.at("mh_scale_alpha_M").get<double>();
  hp.alpha1_step = j.at("alpha1_step").get<double>();
  hp.alpha2_step = j.at("alpha2_step").get<double>();
  return hp;
}

}  // namespace

void write_manifest(const std::string& path, const RunManifest& m) {
  json j;
  j["version"] = m.version;
  j["dataset_digest"] = m.dataset_digest;
  j["dataset_path"] = m.dataset_path;
  j["seeds"] = m.seeds;
  j["chains"] = m.chains;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["standardized"] = m.standardized;
  j["center"] = std::vector<double>(m.center.begin(), m.center.end());
  j["scale"] = std::vector<double>(m.scale.begin(), m.scale.end());
  j["config"] = hyper_to_json(m.config);
  j["record_alloc_every"] = m.controls.record_alloc_every;
  j["k_max_cap"] = m.controls.k_max_cap;
  j["threads"] = m.controls.threads;
  json diags = json::array();
  for (const auto& d : m.diagnostics) {
    json dj;
    dj["accept_count_alpha_M"] = d.accept_count_alpha_M;
    dj["accept_count_alpha_B"] = d.accept_count_alpha_B;
    dj["proposals_alpha_M"] = d.proposals_alpha_M;
    dj["proposals_alpha_B"] = d.proposals_alpha_B;
    dj["applied_step_alpha_B"] = d.applied_step_alpha_B;
    diags.push_back(std::move(dj));
  }
  j["mh_diagnostics"] = std::move(diags);
  j["trace_files"] = m.trace_files;
  write_text_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  RunManifest m;
  m.version = j.at("version").get<std::string>();
  m.dataset_digest = j.at("dataset_digest").get<std::string>();
  m.dataset_path = j.at("dataset_path").get<std::string>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.chains = j.at("chains").get<int>();
  m.started_at = j.at("started_at").get<std::string>();
  m.finished_at = j.at("finished_at").get<std::string>();
  m.standardized = j.at("standardized").get<bool>();
  const auto c = j.at("center").get<std::vector<double>>();
  m.center = Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  const auto s = j.at("scale").get<std::vector<double>>();
  m.scale = Eigen::Map<const VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  m.config = hyper_from_json(j.at("config"));
  m.controls.record_alloc_every = j.at("record_alloc_every").get<long>();
  m.controls.k_max_cap = j.at("k_max_cap").get<int>();
  m.controls.threads = j.at("threads").get<int>();
  for (const auto& dj : j.at("mh_diagnostics")) {
    MhDiagnostics d;
    d.accept_count_alpha_M = dj.at("accept_count_alpha_M").get<long>();
    d.accept_count_alpha_B = dj.at("accept_count_alpha_B").get<long>();
    d.proposals_alpha_M = dj.at("proposals_alpha_M").get<long>();
    d.proposals_alpha_B = dj.at("proposals_alpha_B").get<long>();
    d.applied_step_alpha_B = dj.at("applied_step_alpha_B").get<double>();
    m.diagnostics.push_back(d);
  }
  m.trace_files = j.at("trace_files").get<std::vector<std::string>>();
  return m;
}

// --- misc -------------------------------------------------------------------------

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace mf2a
