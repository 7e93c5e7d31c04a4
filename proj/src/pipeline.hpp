#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace jams {

// find-modes output: the merged mode set plus search statistics.
struct ModesFile {
  std::string target_name;
  int dim = 0;
  ModeSet modes;
  ModeFindStats stats;
};

void save_modes(const std::string& path, const ModesFile& mf);
ModesFile load_modes(const std::string& path);

void save_report(const std::string& path, const BurninReport& rep);
BurninReport load_report(const std::string& path);

// One (jump flavor, replication) cell of a run.
struct ReplicationResult {
  std::string flavor;
  long long replication = 0;  // 1-based; run seed = spec.seed + replication
  bool ok = false;
  std::string error;  // failure message when !ok
  int error_code = 0;
  Vector mean;
  double rmse = std::numeric_limits<double>::quiet_NaN();  // NaN if truth unknown
  std::vector<long long> occupancy;
  long long n_recorded = 0;
  long long n_target_evals = 0;
  Matrix jump_attempts, jump_accepts;
  std::vector<long long> local_attempts, local_accepts;
  Vector final_weights;
  double wall_seconds = 0.0;
};

// Runs the mode search and writes <out>/modes.txt; prints the evaluation
// statistics to `log` when given.
ModesFile cmd_find_modes(const ExperimentSpec& spec, std::ostream* log = nullptr);

// Runs the covariance rounds and writes <out>/burnin_report.txt.  With an
// empty `modes_path` the mode search runs first (full burn-in); otherwise the
// saved modes are reused.
BurninReport cmd_burnin(const ExperimentSpec& spec, const std::string& modes_path = "",
                        std::ostream* log = nullptr);

// Runs every (jump flavor, replication) combination from the saved burn-in
// report, writing <out>/<flavor>-rep<r>/{samples.csv,summary.json,timing.txt}.
// Throws on the first failure.
std::vector<ReplicationResult> cmd_sample(const ExperimentSpec& spec,
                                          const std::string& report_path,
                                          std::ostream* log = nullptr);

// Full pipeline per replication (burn-in with seed+r, then one run per jump
// flavor), plus <out>/bench_report.json and <out>/bench_long.csv.  Individual
// replication failures are recorded, not fatal; returns Partial when some
// (not all) replications succeeded.
ErrorCode cmd_bench(const ExperimentSpec& spec, std::ostream* log = nullptr,
                    std::vector<ReplicationResult>* results = nullptr);

}  // namespace jams
