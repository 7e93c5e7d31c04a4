#include "jams.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "pipeline.hpp"

struct jams_spec {
  jams::ExperimentSpec spec;
};
struct jams_modes {
  jams::ModesFile mf;
};
struct jams_report {
  jams::BurninReport rep;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
jams_status guard(F&& fn) {
  try {
    fn();
    return JAMS_OK;
  } catch (const jams::Error& e) {
    g_last_error = e.what();
    return static_cast<jams_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return JAMS_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JAMS_ERR_NUMERIC;
  }
}

jams_status bad_arg(const char* what) {
  g_last_error = what;
  return JAMS_ERR_CONFIG;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

jams_status jams_spec_default(const char* target, int dim, jams_spec** out) {
  if (!target || !out) return bad_arg("jams_spec_default: null argument");
  *out = nullptr;
  return guard([&] {
    auto* h = new jams_spec{jams::ExperimentSpec::defaults(target, dim)};
    *out = h;
  });
}

jams_status jams_spec_from_text(const char* text, jams_spec** out) {
  if (!text || !out) return bad_arg("jams_spec_from_text: null argument");
  *out = nullptr;
  return guard([&] { *out = new jams_spec{jams::ExperimentSpec::from_text(text)}; });
}

jams_status jams_spec_from_file(const char* path, jams_spec** out) {
  if (!path || !out) return bad_arg("jams_spec_from_file: null argument");
  *out = nullptr;
  return guard([&] { *out = new jams_spec{jams::ExperimentSpec::from_file(path)}; });
}

jams_status jams_spec_to_text(const jams_spec* spec, char** out_text) {
  if (!spec || !out_text) return bad_arg("jams_spec_to_text: null argument");
  *out_text = nullptr;
  return guard([&] { *out_text = dup_string(spec->spec.to_text()); });
}

jams_status jams_spec_set(jams_spec* spec, const char* key, const char* value) {
  if (!spec || !key || !value) return bad_arg("jams_spec_set: null argument");
  return guard([&] { spec->spec.set(key, value); });
}

jams_status jams_spec_set_seed(jams_spec* spec, uint64_t seed) {
  if (!spec) return bad_arg("jams_spec_set_seed: null spec");
  spec->spec.seed = seed;
  return JAMS_OK;
}

jams_status jams_spec_set_workers(jams_spec* spec, int workers) {
  if (!spec) return bad_arg("jams_spec_set_workers: null spec");
  if (workers < 0) return bad_arg("jams_spec_set_workers: workers must be >= 0");
  spec->spec.workers = workers;
  return JAMS_OK;
}

jams_status jams_spec_set_output_dir(jams_spec* spec, const char* dir) {
  if (!spec || !dir) return bad_arg("jams_spec_set_output_dir: null argument");
  if (!*dir) return bad_arg("jams_spec_set_output_dir: empty path");
  spec->spec.output_dir = dir;
  return JAMS_OK;
}

jams_status jams_spec_get_output_dir(const jams_spec* spec, char** out_dir) {
  if (!spec || !out_dir) return bad_arg("jams_spec_get_output_dir: null argument");
  *out_dir = nullptr;
  return guard([&] { *out_dir = dup_string(spec->spec.output_dir); });
}

void jams_spec_free(jams_spec* spec) { delete spec; }

jams_status jams_find_modes(const jams_spec* spec, jams_modes** out) {
  if (!spec || !out) return bad_arg("jams_find_modes: null argument");
  *out = nullptr;
  return guard([&] { *out = new jams_modes{jams::cmd_find_modes(spec->spec, &std::cerr)}; });
}

jams_status jams_modes_load(const char* path, jams_modes** out) {
  if (!path || !out) return bad_arg("jams_modes_load: null argument");
  *out = nullptr;
  return guard([&] { *out = new jams_modes{jams::load_modes(path)}; });
}

jams_status jams_modes_save(const jams_modes* modes, const char* path) {
  if (!modes || !path) return bad_arg("jams_modes_save: null argument");
  return guard([&] { jams::save_modes(path, modes->mf); });
}

int jams_modes_count(const jams_modes* modes) {
  return modes ? modes->mf.modes.count() : 0;
}

jams_status jams_modes_summary(const jams_modes* modes, char** out_text) {
  if (!modes || !out_text) return bad_arg("jams_modes_summary: null argument");
  *out_text = nullptr;
  return guard([&] {
    const jams::ModesFile& mf = modes->mf;
    std::ostringstream os;
    os << "target " << mf.target_name << ", dim " << mf.dim << ", " << mf.modes.count()
       << " modes\n";
    os << "starts " << mf.stats.n_starts << ", converged " << mf.stats.n_converged
       << ", evals/run min " << mf.stats.evals_min << " mean " << mf.stats.evals_mean << " max "
       << mf.stats.evals_max << ", target evals " << mf.stats.target_evals << "\n";
    for (int i = 0; i < mf.modes.count(); ++i) {
      os << "mode " << (i + 1) << ": log_pi " << mf.modes.log_pi[static_cast<size_t>(i)] << "\n";
    }
    *out_text = dup_string(os.str());
  });
}

void jams_modes_free(jams_modes* modes) { delete modes; }

jams_status jams_burnin(const jams_spec* spec, const char* modes_path, jams_report** out) {
  if (!spec || !out) return bad_arg("jams_burnin: null argument");
  *out = nullptr;
  return guard([&] {
    const std::string path = modes_path ? modes_path : "";
    *out = new jams_report{jams::cmd_burnin(spec->spec, path, &std::cerr)};
  });
}

jams_status jams_report_load(const char* path, jams_report** out) {
  if (!path || !out) return bad_arg("jams_report_load: null argument");
  *out = nullptr;
  return guard([&] { *out = new jams_report{jams::load_report(path)}; });
}

jams_status jams_report_save(const jams_report* report, const char* path) {
  if (!report || !path) return bad_arg("jams_report_save: null argument");
  return guard([&] { jams::save_report(path, report->rep); });
}

jams_status jams_report_summary(const jams_report* report, char** out_text) {
  if (!report || !out_text) return bad_arg("jams_report_summary: null argument");
  *out_text = nullptr;
  return guard([&] {
    const jams::BurninReport& r = report->rep;
    std::ostringstream os;
    os << "target " << r.target_name << ", dim " << r.dim << ", " << r.modes.count()
       << " modes, " << r.rounds_used << " rounds"
       << (r.round_limit_exceeded ? " (round limit exceeded)" : "") << "\n";
    if (!r.inhomogeneity.empty()) {
      os << "final inhomogeneity max " << r.inhomogeneity.back().maxCoeff() << "\n";
    }
    os << "eval budget " << r.eval_budget << "\n";
    for (int i = 0; i < r.modes.count(); ++i) {
      os << "mode " << (i + 1) << ": log_pi " << r.modes.log_pi[static_cast<size_t>(i)]
         << ", chain length " << r.mode_count[static_cast<size_t>(i)] << "\n";
    }
    *out_text = dup_string(os.str());
  });
}

void jams_report_free(jams_report* report) { delete report; }

jams_status jams_sample(const jams_spec* spec, const char* report_path) {
  if (!spec || !report_path) return bad_arg("jams_sample: null argument");
  return guard([&] { jams::cmd_sample(spec->spec, report_path, &std::cerr); });
}

jams_status jams_bench(const jams_spec* spec) {
  if (!spec) return bad_arg("jams_bench: null spec");
  jams_status st = JAMS_OK;
  const jams_status guard_st = guard([&] {
    const jams::ErrorCode code = jams::cmd_bench(spec->spec, &std::cerr);
    if (code != jams::ErrorCode::Ok) {
      g_last_error = code == jams::ErrorCode::Partial
                         ? "some replications failed (see bench_report.json)"
                         : "all replications failed (see bench_report.json)";
    }
    st = static_cast<jams_status>(code);
  });
  return guard_st != JAMS_OK ? guard_st : st;
}

const char* jams_last_error(void) { return g_last_error.c_str(); }

void jams_string_free(char* s) { std::free(s); }

}  // extern "C"
