// Command-line front end; everything goes through the C API in jams.h.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "jams.h"

extern char** environ;

namespace {

struct CommonArgs {
  std::string config;
  std::string target;
  int dim = 0;
  std::string data;
  std::string out;
  std::vector<std::string> sets;  // key=value overrides
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = -1;
  std::string modes;   // burnin
  std::string report;  // sample
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "config file (see README for the format)");
  cmd->add_option("--target", a.target,
                  "built-in target: gaussian_mixture | banana_t | sensor (instead of --config)");
  cmd->add_option("--dim", a.dim, "target dimension (with --target)");
  cmd->add_option("--data", a.data, "sensor observations file (sets target.data)");
  cmd->add_option("--seed", a.seed, "base random seed")->each([&a](const std::string&) {
    a.seed_given = true;
  });
  cmd->add_option("--workers", a.workers, "worker threads (0 = all hardware threads)");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--set", a.sets, "override one config key, e.g. --set run.iters=100000")
      ->take_all();
}

int fail(jams_status st) {
  std::fprintf(stderr, "error: %s\n", jams_last_error());
  return static_cast<int>(st);
}

// Environment overrides: JAMS_SEED=7, JAMS_RUN_ITERS=1000, JAMS_ADAPT_BETA=...
// The first _-segment selects the block when it names one.
std::vector<std::pair<std::string, std::string>> env_overrides() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; *e; ++e) {
    const char* s = *e;
    if (std::strncmp(s, "JAMS_", 5) != 0) continue;
    const char* eq = std::strchr(s, '=');
    if (!eq) continue;
    std::string name(s + 5, static_cast<size_t>(eq - s - 5));
    if (name.empty()) continue;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string key = name;
    const auto us = name.find('_');
    if (us != std::string::npos) {
      const std::string head = name.substr(0, us);
      if (head == "target" || head == "burnin" || head == "run" || head == "adapt") {
        key = head + "." + name.substr(us + 1);
      }
    }
    out.emplace_back(std::move(key), std::string(eq + 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Precedence: defaults < config file < environment < flags.
jams_spec* build_spec(const CommonArgs& a, jams_status* st) {
  jams_spec* spec = nullptr;
  if (!a.config.empty()) {
    if (!a.target.empty() || a.dim > 0) {
      std::fprintf(stderr,
                   "error: --target/--dim build a default spec and cannot be combined with "
                   "--config; use --set target.dim=... instead\n");
      *st = JAMS_ERR_CONFIG;
      return nullptr;
    }
    *st = jams_spec_from_file(a.config.c_str(), &spec);
  } else {
    const std::string target = a.target.empty() ? "gaussian_mixture" : a.target;
    *st = jams_spec_default(target.c_str(), a.dim, &spec);
  }
  if (*st != JAMS_OK) return nullptr;

  const auto apply = [&](const std::string& key, const std::string& value) {
    if (*st != JAMS_OK) return;
    *st = jams_spec_set(spec, key.c_str(), value.c_str());
  };
  for (const auto& [key, value] : env_overrides()) apply(key, value);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      *st = JAMS_ERR_CONFIG;
      break;
    }
    apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (*st == JAMS_OK && !a.data.empty()) apply("target.data", a.data);
  if (*st == JAMS_OK && a.seed_given) *st = jams_spec_set_seed(spec, a.seed);
  if (*st == JAMS_OK && a.workers >= 0) *st = jams_spec_set_workers(spec, a.workers);
  if (*st == JAMS_OK && !a.out.empty()) *st = jams_spec_set_output_dir(spec, a.out.c_str());
  if (*st != JAMS_OK) {
    jams_spec_free(spec);
    return nullptr;
  }
  return spec;
}

std::string default_report_path(const jams_spec* spec) {
  char* dir = nullptr;
  if (jams_spec_get_output_dir(spec, &dir) != JAMS_OK || !dir) return "burnin_report.txt";
  std::string path = std::string(dir) + "/burnin_report.txt";
  jams_string_free(dir);
  return path;
}

int run_find_modes(const CommonArgs& a) {
  jams_status st = JAMS_OK;
  jams_spec* spec = build_spec(a, &st);
  if (!spec) return static_cast<int>(st);
  jams_modes* modes = nullptr;
  st = jams_find_modes(spec, &modes);
  if (st != JAMS_OK) {
    jams_spec_free(spec);
    return fail(st);
  }
  char* text = nullptr;
  if (jams_modes_summary(modes, &text) == JAMS_OK && text) {
    std::fputs(text, stdout);
    jams_string_free(text);
  }
  jams_modes_free(modes);
  jams_spec_free(spec);
  return 0;
}

int run_burnin(const CommonArgs& a) {
  jams_status st = JAMS_OK;
  jams_spec* spec = build_spec(a, &st);
  if (!spec) return static_cast<int>(st);
  jams_report* report = nullptr;
  st = jams_burnin(spec, a.modes.empty() ? nullptr : a.modes.c_str(), &report);
  if (st != JAMS_OK) {
    jams_spec_free(spec);
    return fail(st);
  }
  char* text = nullptr;
  if (jams_report_summary(report, &text) == JAMS_OK && text) {
    std::fputs(text, stdout);
    jams_string_free(text);
  }
  jams_report_free(report);
  jams_spec_free(spec);
  return 0;
}

int run_sample(const CommonArgs& a) {
  jams_status st = JAMS_OK;
  jams_spec* spec = build_spec(a, &st);
  if (!spec) return static_cast<int>(st);
  const std::string report = a.report.empty() ? default_report_path(spec) : a.report;
  st = jams_sample(spec, report.c_str());
  jams_spec_free(spec);
  return st == JAMS_OK ? 0 : fail(st);
}

int run_bench(const CommonArgs& a) {
  jams_status st = JAMS_OK;
  jams_spec* spec = build_spec(a, &st);
  if (!spec) return static_cast<int>(st);
  st = jams_bench(spec);
  jams_spec_free(spec);
  return st == JAMS_OK ? 0 : fail(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jams: adaptive multimodal MCMC sampler"};
  app.require_subcommand(1);

  CommonArgs find_args, burnin_args, sample_args, bench_args;

  CLI::App* find_cmd =
      app.add_subcommand("find-modes", "mode search: uniform starts + BFGS + merge");
  add_common(find_cmd, find_args);

  CLI::App* burnin_cmd =
      app.add_subcommand("burnin", "covariance-estimation rounds (mode search included "
                                   "unless --modes is given)");
  add_common(burnin_cmd, burnin_args);
  burnin_cmd->add_option("--modes", burnin_args.modes, "reuse a saved modes.txt");

  CLI::App* sample_cmd =
      app.add_subcommand("sample", "main runs from a saved burn-in report");
  add_common(sample_cmd, sample_args);
  sample_cmd->add_option("--report", sample_args.report,
                         "burn-in report file (default <out>/burnin_report.txt)");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "replication benchmark: burn-in + runs per seed");
  add_common(bench_cmd, bench_args);

  CLI11_PARSE(app, argc, argv);

  if (find_cmd->parsed()) return run_find_modes(find_args);
  if (burnin_cmd->parsed()) return run_burnin(burnin_args);
  if (sample_cmd->parsed()) return run_sample(sample_args);
  if (bench_cmd->parsed()) return run_bench(bench_args);
  return 0;
}
