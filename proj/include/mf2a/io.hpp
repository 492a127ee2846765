#ifndef MF2A_IO_HPP
#define MF2A_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mf2a/model.hpp"
#include "mf2a/sampler.hpp"
#include "mf2a/simulate.hpp"

namespace mf2a {

// shortest exact decimal is not required anywhere; trace and CSV floats are
// written with 17 significant digits so parsing reproduces the exact bits
std::string format_double(double x);

// --- dataset CSV ------------------------------------------------------------
// UTF-8, header row, '.' decimal point. An optional case-sensitive `label`
// column carries ground-truth clusters; all other columns are numeric.

Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

// --- trace (JSON lines) ------------------------------------------------------

std::string trace_line(const DrawRecord& rec);
DrawRecord parse_trace_line(const std::string& line);
void write_trace(const std::string& path, const std::vector<DrawRecord>& trace);
std::vector<DrawRecord> read_trace(const std::string& path);

// --- truth file ---------------------------------------------------------------

void write_truth_json(const std::string& path, const SimTruth& truth);
SimTruth read_truth_json(const std::string& path);

// --- config (flat key=value) ---------------------------------------------------

std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies recognised keys onto hyperparameters / chain controls; throws
// ConfigError on unknown keys or malformed values.
struct ChainControls {
  long record_alloc_every = 1;
  int k_max_cap = 500;
  int threads = 1;
};
void apply_config(const std::map<std::string, std::string>& kv, Hyperparams& hp,
                  ChainControls& controls);

// --- run manifest ----------------------------------------------------------------

struct RunManifest {
  std::string version;
  std::string dataset_digest;
  std::string dataset_path;
  std::vector<std::uint64_t> seeds;
  int chains = 1;
  std::string started_at;
  std::string finished_at;
  bool standardized = false;
  VectorXd center;
  VectorXd scale;
  Hyperparams config;
  ChainControls controls;
  std::vector<MhDiagnostics> diagnostics;
  std::vector<std::string> trace_files;
};

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// --- misc -------------------------------------------------------------------------

// FNV-1a 64-bit over the raw file bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

std::string software_version();

}  // namespace mf2a

#endif
