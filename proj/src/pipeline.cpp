#include "pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "error.hpp"
#include "workers.hpp"

namespace jams {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int resolve_workers(int w) {
  if (w > 0) return w;
  const unsigned h = std::thread::hardware_concurrency();
  return h > 0 ? static_cast<int>(h) : 1;
}

void write_vector(std::ostream& os, const char* key, const Vector& v) {
  os << key;
  for (int j = 0; j < v.size(); ++j) os << ' ' << fmt(v[j]);
  os << '\n';
}

void write_matrix(std::ostream& os, const char* key, const Matrix& m) {
  for (int r = 0; r < m.rows(); ++r) {
    os << key;
    for (int c = 0; c < m.cols(); ++c) os << ' ' << fmt(m(r, c));
    os << '\n';
  }
}

// Whitespace-token stream over a whole file; all formats below are plain
// keyword-prefixed lines so token order fully determines the document.
class TokenReader {
 public:
  explicit TokenReader(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string tok;
    while (in >> tok) toks_.push_back(std::move(tok));
  }

  std::string next(const char* what) {
    if (pos_ >= toks_.size()) {
      throw ConfigError("'" + path_ + "': truncated file, expected " + what);
    }
    return toks_[pos_++];
  }

  void expect(const char* lit) {
    const std::string tok = next(lit);
    if (tok != lit) {
      throw ConfigError("'" + path_ + "': expected '" + lit + "', found '" + tok + "'");
    }
  }

  double num(const char* what) {
    const std::string tok = next(what);
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + path_ + "': bad number '" + tok + "' for " + what);
    }
  }

  long long inum(const char* what) {
    const std::string tok = next(what);
    try {
      size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + path_ + "': bad integer '" + tok + "' for " + what);
    }
  }

  Vector vec(int n, const char* what) {
    Vector v(n);
    for (int j = 0; j < n; ++j) v[j] = num(what);
    return v;
  }

  Matrix mat(int rows, int cols, const char* key) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      expect(key);
      for (int c = 0; c < cols; ++c) m(r, c) = num(key);
    }
    return m;
  }

 private:
  std::string path_;
  std::vector<std::string> toks_;
  size_t pos_ = 0;
};

void write_stats(std::ostream& os, const ModeFindStats& s) {
  os << "stats " << s.n_starts << ' ' << s.n_converged << ' ' << s.evals_min << ' ' << s.evals_max
     << ' ' << fmt(s.evals_mean) << ' ' << s.target_evals << '\n';
}

ModeFindStats read_stats(TokenReader& tr) {
  tr.expect("stats");
  ModeFindStats s;
  s.n_starts = tr.inum("stats.n_starts");
  s.n_converged = tr.inum("stats.n_converged");
  s.evals_min = tr.inum("stats.evals_min");
  s.evals_max = tr.inum("stats.evals_max");
  s.evals_mean = tr.num("stats.evals_mean");
  s.target_evals = tr.inum("stats.target_evals");
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

void close_out(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (int j = 0; j < v.size(); ++j) a.push_back(v[j]);
  return a;
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json stats_json(const ModeFindStats& s) {
  return json{{"n_starts", s.n_starts},     {"n_converged", s.n_converged},
              {"evals_min", s.evals_min},   {"evals_max", s.evals_max},
              {"evals_mean", s.evals_mean}, {"target_evals", s.target_evals}};
}

}  // namespace

void save_modes(const std::string& path, const ModesFile& mf) {
  mf.modes.validate();
  std::ofstream os = open_out(path);
  os << "jams_modes 1\n";
  os << "target " << mf.target_name << '\n';
  os << "dim " << mf.dim << '\n';
  os << "count " << mf.modes.count() << '\n';
  write_stats(os, mf.stats);
  for (int i = 0; i < mf.modes.count(); ++i) {
    os << "mode\n";
    os << "log_pi " << fmt(mf.modes.log_pi[static_cast<size_t>(i)]) << '\n';
    write_vector(os, "mu", mf.modes.mu[static_cast<size_t>(i)]);
    write_matrix(os, "hess", mf.modes.hessian[static_cast<size_t>(i)]);
  }
  close_out(os, path);
}

ModesFile load_modes(const std::string& path) {
  TokenReader tr(path);
  tr.expect("jams_modes");
  tr.expect("1");
  ModesFile mf;
  tr.expect("target");
  mf.target_name = tr.next("target name");
  tr.expect("dim");
  mf.dim = static_cast<int>(tr.inum("dim"));
  tr.expect("count");
  const int count = static_cast<int>(tr.inum("count"));
  mf.stats = read_stats(tr);
  for (int i = 0; i < count; ++i) {
    tr.expect("mode");
    tr.expect("log_pi");
    mf.modes.log_pi.push_back(tr.num("log_pi"));
    tr.expect("mu");
    mf.modes.mu.push_back(tr.vec(mf.dim, "mu"));
    mf.modes.hessian.push_back(tr.mat(mf.dim, mf.dim, "hess"));
  }
  mf.modes.validate();
  return mf;
}

void save_report(const std::string& path, const BurninReport& rep) {
  rep.validate();
  std::ofstream os = open_out(path);
  os << "jams_burnin_report 1\n";
  os << "target " << rep.target_name << '\n';
  os << "dim " << rep.dim << '\n';
  os << "count " << rep.modes.count() << '\n';
  os << "rounds_used " << rep.rounds_used << '\n';
  os << "round_limit_exceeded " << (rep.round_limit_exceeded ? 1 : 0) << '\n';
  os << "eval_budget " << rep.eval_budget << '\n';
  write_stats(os, rep.find_stats);
  for (const Vector& b : rep.inhomogeneity) write_vector(os, "inhom", b);
  for (int i = 0; i < rep.modes.count(); ++i) {
    const auto s = static_cast<size_t>(i);
    os << "mode\n";
    os << "log_pi " << fmt(rep.modes.log_pi[s]) << '\n';
    write_vector(os, "mu", rep.modes.mu[s]);
    write_matrix(os, "hess", rep.modes.hessian[s]);
    write_matrix(os, "sigma", rep.sigma0[s].value());
    write_vector(os, "mean", rep.mode_mean[s]);
    os << "n " << rep.mode_count[s] << '\n';
  }
  close_out(os, path);
}

BurninReport load_report(const std::string& path) {
  TokenReader tr(path);
  tr.expect("jams_burnin_report");
  tr.expect("1");
  BurninReport rep;
  tr.expect("target");
  rep.target_name = tr.next("target name");
  tr.expect("dim");
  rep.dim = static_cast<int>(tr.inum("dim"));
  tr.expect("count");
  const int count = static_cast<int>(tr.inum("count"));
  tr.expect("rounds_used");
  rep.rounds_used = static_cast<int>(tr.inum("rounds_used"));
  tr.expect("round_limit_exceeded");
  rep.round_limit_exceeded = tr.inum("round_limit_exceeded") != 0;
  tr.expect("eval_budget");
  rep.eval_budget = tr.inum("eval_budget");
  rep.find_stats = read_stats(tr);
  for (int k = 0; k < rep.rounds_used; ++k) {
    tr.expect("inhom");
    rep.inhomogeneity.push_back(tr.vec(count, "inhom"));
  }
  for (int i = 0; i < count; ++i) {
    tr.expect("mode");
    tr.expect("log_pi");
    rep.modes.log_pi.push_back(tr.num("log_pi"));
    tr.expect("mu");
    rep.modes.mu.push_back(tr.vec(rep.dim, "mu"));
    rep.modes.hessian.push_back(tr.mat(rep.dim, rep.dim, "hess"));
    rep.sigma0.emplace_back(tr.mat(rep.dim, rep.dim, "sigma"));
    tr.expect("mean");
    rep.mode_mean.push_back(tr.vec(rep.dim, "mean"));
    tr.expect("n");
    rep.mode_count.push_back(tr.inum("n"));
  }
  rep.validate();
  return rep;
}

ModesFile cmd_find_modes(const ExperimentSpec& spec, std::ostream* log) {
  spec.validate();
  const TargetPtr target = spec.load_target();
  ModesFile mf;
  mf.target_name = target->name();
  mf.dim = spec.dim;
  mf.modes = find_modes(*target, spec.burnin, spec.seed, resolve_workers(spec.workers), &mf.stats);
  fs::create_directories(spec.output_dir);
  save_modes(spec.output_dir + "/modes.txt", mf);
  if (log) {
    *log << "found " << mf.modes.count() << " modes from " << mf.stats.n_starts << " starts ("
         << mf.stats.n_converged << " converged)\n"
         << "evaluations per optimisation run: min " << mf.stats.evals_min << ", mean "
         << mf.stats.evals_mean << ", max " << mf.stats.evals_max << "\n"
         << "total target evaluations: " << mf.stats.target_evals << "\n";
  }
  return mf;
}

BurninReport cmd_burnin(const ExperimentSpec& spec, const std::string& modes_path,
                        std::ostream* log) {
  spec.validate();
  const TargetPtr target = spec.load_target();
  const int workers = resolve_workers(spec.workers);
  BurninReport rep;
  if (modes_path.empty()) {
    rep = run_burnin(*target, spec.burnin, spec.seed, workers);
  } else {
    const ModesFile mf = load_modes(modes_path);
    if (mf.target_name != target->name()) {
      throw ConfigError("modes file is for target '" + mf.target_name + "', spec uses '" +
                        target->name() + "'");
    }
    if (mf.dim != spec.dim) throw ConfigError("modes file dimension does not match spec");
    rep = run_burnin_from_modes(*target, mf.modes, mf.stats, spec.burnin, spec.seed, workers);
  }
  fs::create_directories(spec.output_dir);
  save_report(spec.output_dir + "/burnin_report.txt", rep);
  if (log) {
    *log << "burn-in: " << rep.modes.count() << " modes, " << rep.rounds_used << " rounds";
    if (rep.round_limit_exceeded) *log << " (round limit hit before the stopping rule)";
    if (!rep.inhomogeneity.empty()) {
      *log << ", final max b = " << rep.inhomogeneity.back().maxCoeff();
    }
    *log << ", eval budget " << rep.eval_budget << "\n";
  }
  return rep;
}

namespace {

const char* move_name(MoveType m) { return m == MoveType::kLocal ? "local" : "jump"; }

// One (flavor, replication) run: streams samples.csv, writes summary.json and
// timing.txt, returns the in-memory tallies.
ReplicationResult run_one(const ExperimentSpec& spec, const Target& target,
                          const BurninReport& report, const std::string& flavor,
                          long long replication) {
  ReplicationResult res;
  res.flavor = flavor;
  res.replication = replication;

  RunConfig cfg = spec.run;
  cfg.seed = spec.seed + static_cast<std::uint64_t>(replication);
  cfg.jump_kind = spec.resolve_jump(flavor);
  cfg.store_samples = false;

  const std::string dir = spec.output_dir + "/" + flavor + "-rep" + std::to_string(replication);
  fs::create_directories(dir);
  const std::string csv_path = dir + "/samples.csv";
  std::ofstream csv = open_out(csv_path);
  csv << "iter,mode,move,accepted";
  for (int j = 0; j < spec.dim; ++j) csv << ",x" << j;
  csv << '\n';

  std::string line;
  line.reserve(64 + 32 * static_cast<size_t>(spec.dim));
  const SampleSink sink = [&csv, &line](const SampleRow& row) {
    line.clear();
    line += std::to_string(row.iter);
    line += ',';
    line += std::to_string(row.mode + 1);
    line += ',';
    line += move_name(row.move);
    line += ',';
    line += row.accepted ? '1' : '0';
    char buf[40];
    for (int j = 0; j < row.x.size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", row.x[j]);
      line += buf;
    }
    line += '\n';
    csv << line;
  };

  const RunRecord rec = run_chain(target, report, cfg, sink);
  close_out(csv, csv_path);

  res.mean = rec.mean;
  res.occupancy = rec.occupancy;
  res.n_recorded = rec.n_recorded;
  res.n_target_evals = rec.n_target_evals;
  res.jump_attempts = rec.jump_attempts;
  res.jump_accepts = rec.jump_accepts;
  res.local_attempts = rec.local_attempts;
  res.local_accepts = rec.local_accepts;
  res.final_weights = rec.final_weights;
  res.wall_seconds = rec.wall_seconds;
  if (const auto truth = target.true_mean())
    res.rmse = rmse(rec, *truth) / std::sqrt(static_cast<double>(spec.dim));

  const AcceptanceSummary acc = acceptance_summary(rec);
  json occ_fracs = json::array();
  for (long long c : rec.occupancy) {
    occ_fracs.push_back(rec.n_recorded > 0
                            ? static_cast<double>(c) / static_cast<double>(rec.n_recorded)
                            : 0.0);
  }
  json local_rates = json::array();
  for (int i = 0; i < report.modes.count(); ++i) {
    const auto r = acc.local_rate(i);
    local_rates.push_back(r ? json(*r) : json(nullptr));
  }
  const auto overall = acc.jump_rate_overall();

  json j;
  j["acceptance"] = json{{"jump_attempts", mat_json(rec.jump_attempts)},
                         {"jump_accepts", mat_json(rec.jump_accepts)},
                         {"jump_rate_overall", overall ? json(*overall) : json(nullptr)},
                         {"local_attempts", rec.local_attempts},
                         {"local_accepts", rec.local_accepts},
                         {"local_rates", local_rates}};
  j["burnin"] = json{{"eval_budget", report.eval_budget},
                     {"rounds_used", report.rounds_used},
                     {"round_limit_exceeded", report.round_limit_exceeded},
                     {"mode_count", report.mode_count},
                     {"mode_log_pi", report.modes.log_pi},
                     {"find_stats", stats_json(report.find_stats)}};
  j["config"] = spec.to_text();
  j["dim"] = spec.dim;
  j["flavor"] = flavor;
  j["estimate"] = json{{"mean", vec_json(rec.mean)},
                       {"rmse_over_sqrt_d", std::isnan(res.rmse) ? json(nullptr) : json(res.rmse)}};
  j["occupancy"] = json{{"counts", rec.occupancy}, {"fractions", occ_fracs}};
  j["replication"] = replication;
  j["run"] = json{{"n_iters", rec.n_iters},
                  {"n_recorded", rec.n_recorded},
                  {"n_target_evals", rec.n_target_evals},
                  {"scaling_updates", rec.scaling_updates},
                  {"covariance_refreshes", rec.covariance_refreshes},
                  {"gated_skips", rec.gated_skips},
                  {"final_weights", vec_json(rec.final_weights)}};
  j["seed"] = cfg.seed;
  j["target"] = target.name();

  const std::string sum_path = dir + "/summary.json";
  std::ofstream sum = open_out(sum_path);
  sum << j.dump(2) << '\n';
  close_out(sum, sum_path);

  // Wall time lives outside summary.json so identical runs stay byte-identical.
  const std::string t_path = dir + "/timing.txt";
  std::ofstream ts = open_out(t_path);
  char tbuf[64];
  std::snprintf(tbuf, sizeof tbuf, "run_seconds %.3f\n", rec.wall_seconds);
  ts << tbuf;
  close_out(ts, t_path);

  res.ok = true;
  return res;
}

}  // namespace

std::vector<ReplicationResult> cmd_sample(const ExperimentSpec& spec,
                                          const std::string& report_path, std::ostream* log) {
  spec.validate();
  const TargetPtr target = spec.load_target();
  const BurninReport report = load_report(report_path);
  if (report.target_name != target->name()) {
    throw ConfigError("burn-in report is for target '" + report.target_name + "', spec uses '" +
                      target->name() + "'");
  }
  if (report.dim != spec.dim) throw ConfigError("burn-in report dimension does not match spec");

  struct Cell {
    std::string flavor;
    long long rep;
  };
  std::vector<Cell> cells;
  for (const std::string& f : spec.jump_flavors) {
    for (long long r = 1; r <= spec.replications; ++r) cells.push_back({f, r});
  }
  std::vector<ReplicationResult> results(cells.size());
  parallel_for(cells.size(), resolve_workers(spec.workers), [&](size_t idx) {
    results[idx] = run_one(spec, *target, report, cells[idx].flavor, cells[idx].rep);
  });
  if (log) {
    for (const ReplicationResult& r : results) {
      *log << r.flavor << " rep " << r.replication << ": " << r.n_recorded << " samples";
      if (!std::isnan(r.rmse)) *log << ", rmse/sqrt(d) = " << r.rmse;
      *log << "\n";
    }
  }
  return results;
}

namespace {

json aggregate_flavor(const std::vector<const ReplicationResult*>& reps, int n_modes) {
  json arr = json::array();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_rate = false;
  std::vector<double> rmses;
  for (const ReplicationResult* r : reps) {
    json e;
    e["replication"] = r->replication;
    e["ok"] = r->ok;
    if (!r->ok) {
      e["error"] = r->error;
      arr.push_back(std::move(e));
      continue;
    }
    AcceptanceSummary acc{r->jump_attempts, r->jump_accepts, r->local_attempts, r->local_accepts};
    const auto overall = acc.jump_rate_overall();
    e["jump_rate_overall"] = overall ? json(*overall) : json(nullptr);
    if (overall) {
      any_rate = true;
      lo = std::min(lo, *overall);
      hi = std::max(hi, *overall);
    }
    json pair_rates = json::array();
    for (int i = 0; i < n_modes; ++i) {
      json row = json::array();
      for (int k = 0; k < n_modes; ++k) {
        const auto rate = acc.jump_rate(i, k);
        row.push_back(rate ? json(*rate) : json(nullptr));
      }
      pair_rates.push_back(std::move(row));
    }
    e["pair_rates"] = std::move(pair_rates);
    json occ = json::array();
    for (long long c : r->occupancy) {
      occ.push_back(r->n_recorded > 0 ? static_cast<double>(c) / static_cast<double>(r->n_recorded)
                                      : 0.0);
    }
    e["occupancy_fractions"] = std::move(occ);
    if (!std::isnan(r->rmse)) {
      e["rmse_over_sqrt_d"] = r->rmse;
      rmses.push_back(r->rmse);
    }
    arr.push_back(std::move(e));
  }
  json out;
  out["replications"] = std::move(arr);
  out["lowest_jump_rate"] = any_rate ? json(lo) : json(nullptr);
  out["highest_jump_rate"] = any_rate ? json(hi) : json(nullptr);
  if (!rmses.empty()) {
    double sum = 0.0, mn = rmses[0], mx = rmses[0];
    for (double v : rmses) {
      sum += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    out["rmse_over_sqrt_d"] =
        json{{"mean", sum / static_cast<double>(rmses.size())}, {"min", mn}, {"max", mx}};
  } else {
    out["rmse_over_sqrt_d"] = nullptr;
  }
  return out;
}

void write_long_csv(const std::string& path, const std::vector<ReplicationResult>& results) {
  std::ofstream os = open_out(path);
  os << "flavor,replication,metric,i,j,value\n";
  for (const ReplicationResult& r : results) {
    if (!r.ok) continue;
    AcceptanceSummary acc{r.jump_attempts, r.jump_accepts, r.local_attempts, r.local_accepts};
    const auto emit = [&os, &r](const char* metric, int i, int j, double v) {
      os << r.flavor << ',' << r.replication << ',' << metric << ',' << i << ',' << j << ','
         << fmt(v) << '\n';
    };
    if (const auto overall = acc.jump_rate_overall()) emit("jump_rate_overall", 0, 0, *overall);
    const int n = static_cast<int>(r.occupancy.size());
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        if (const auto rate = acc.jump_rate(i, k)) emit("jump_rate", i + 1, k + 1, *rate);
      }
      if (const auto rate = acc.local_rate(i)) emit("local_rate", i + 1, 0, *rate);
      if (r.n_recorded > 0) {
        emit("occupancy", i + 1, 0,
             static_cast<double>(r.occupancy[static_cast<size_t>(i)]) /
                 static_cast<double>(r.n_recorded));
      }
    }
    if (!std::isnan(r.rmse)) emit("rmse_over_sqrt_d", 0, 0, r.rmse);
    for (int j = 0; j < r.mean.size(); ++j) emit("mean", 0, j, r.mean[j]);
  }
  close_out(os, path);
}

}  // namespace

ErrorCode cmd_bench(const ExperimentSpec& spec, std::ostream* log,
                    std::vector<ReplicationResult>* out_results) {
  spec.validate();
  const TargetPtr target = spec.load_target();
  const int workers = resolve_workers(spec.workers);
  fs::create_directories(spec.output_dir);

  // Each replication gets a full pipeline at seed+r; the burn-in is shared by
  // all jump flavors of that replication (it never jumps, so the flavor does
  // not enter).  Parallelism goes to the replication level when there are
  // several, otherwise to the burn-in internals.
  const long long n_reps = spec.replications;
  struct RepBurnin {
    BurninReport report;
    bool ok = false;
    std::string error;
    int code = 0;
  };
  std::vector<RepBurnin> burnins(static_cast<size_t>(n_reps));
  const int outer = n_reps > 1 ? workers : 1;
  const int inner = n_reps > 1 ? 1 : workers;
  parallel_for(static_cast<size_t>(n_reps), outer, [&](size_t idx) {
    const long long r = static_cast<long long>(idx) + 1;
    try {
      burnins[idx].report = run_burnin(*target, spec.burnin,
                                       spec.seed + static_cast<std::uint64_t>(r), inner);
      burnins[idx].ok = true;
    } catch (const Error& e) {
      burnins[idx].error = e.what();
      burnins[idx].code = static_cast<int>(e.code());
    } catch (const std::exception& e) {
      burnins[idx].error = e.what();
      burnins[idx].code = static_cast<int>(ErrorCode::Numeric);
    }
  });

  struct Cell {
    std::string flavor;
    long long rep;
  };
  std::vector<Cell> cells;
  for (const std::string& f : spec.jump_flavors) {
    for (long long r = 1; r <= n_reps; ++r) cells.push_back({f, r});
  }
  std::vector<ReplicationResult> results(cells.size());
  parallel_for(cells.size(), workers, [&](size_t idx) {
    ReplicationResult& res = results[idx];
    const RepBurnin& b = burnins[static_cast<size_t>(cells[idx].rep - 1)];
    if (!b.ok) {
      res.flavor = cells[idx].flavor;
      res.replication = cells[idx].rep;
      res.ok = false;
      res.error = "burn-in failed: " + b.error;
      res.error_code = b.code;
      return;
    }
    try {
      res = run_one(spec, *target, b.report, cells[idx].flavor, cells[idx].rep);
    } catch (const Error& e) {
      res.flavor = cells[idx].flavor;
      res.replication = cells[idx].rep;
      res.ok = false;
      res.error = e.what();
      res.error_code = static_cast<int>(e.code());
    } catch (const std::exception& e) {
      res.flavor = cells[idx].flavor;
      res.replication = cells[idx].rep;
      res.ok = false;
      res.error = e.what();
      res.error_code = static_cast<int>(ErrorCode::Numeric);
    }
  });

  long long n_ok = 0;
  for (const ReplicationResult& r : results) n_ok += r.ok ? 1 : 0;
  const long long n_fail = static_cast<long long>(results.size()) - n_ok;

  json j;
  j["config"] = spec.to_text();
  j["dim"] = spec.dim;
  j["target"] = target->name();
  j["seed"] = spec.seed;
  j["replications"] = n_reps;
  j["succeeded"] = n_ok;
  j["failed"] = n_fail;
  json flavors;
  for (const std::string& f : spec.jump_flavors) {
    std::vector<const ReplicationResult*> reps;
    int modes_here = 0;
    for (const ReplicationResult& r : results) {
      if (r.flavor != f) continue;
      reps.push_back(&r);
      if (r.ok) modes_here = static_cast<int>(r.occupancy.size());
    }
    flavors[f] = aggregate_flavor(reps, modes_here);
  }
  j["flavors"] = std::move(flavors);

  const std::string rep_path = spec.output_dir + "/bench_report.json";
  std::ofstream rp = open_out(rep_path);
  rp << j.dump(2) << '\n';
  close_out(rp, rep_path);
  write_long_csv(spec.output_dir + "/bench_long.csv", results);

  if (log) {
    for (const ReplicationResult& r : results) {
      *log << r.flavor << " rep " << r.replication << ": ";
      if (r.ok) {
        AcceptanceSummary acc{r.jump_attempts, r.jump_accepts, r.local_attempts, r.local_accepts};
        const auto overall = acc.jump_rate_overall();
        *log << "ok";
        if (overall) *log << ", jump acceptance " << *overall;
        if (!std::isnan(r.rmse)) *log << ", rmse/sqrt(d) " << r.rmse;
      } else {
        *log << "FAILED: " << r.error;
      }
      *log << "\n";
    }
    *log << n_ok << "/" << results.size() << " replication runs succeeded\n";
  }

  ErrorCode code = ErrorCode::Ok;
  if (n_fail > 0 && n_ok > 0) {
    code = ErrorCode::Partial;
  } else if (n_fail > 0) {
    // Nothing succeeded: surface the first failure's category.
    code = ErrorCode::Numeric;
    for (const ReplicationResult& r : results) {
      if (!r.ok && r.error_code != 0) {
        code = static_cast<ErrorCode>(r.error_code);
        break;
      }
    }
  }
  if (out_results) *out_results = std::move(results);
  return code;
}

}  // namespace jams
