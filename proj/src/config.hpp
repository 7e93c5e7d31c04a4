#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sampler.hpp"
#include "sensor.hpp"

namespace jams {

// Complete experiment description.  The text form is a flat key/value file
// with one level of named blocks:
//
//   # comment
//   replications 20
//   seed 1
//   workers 0              # 0 = all hardware threads
//   out out
//   target {
//     name gaussian_mixture   # gaussian_mixture | banana_t | sensor
//     dim 10
//     data sensors.txt        # sensor target only
//   }
//   burnin {
//     starts 1500
//     box_low -2              # one value (broadcast) or dim values
//     box_high 2
//     merge_q 1
//     b_acc 1.1
//     max_rounds 30
//     round0 1000
//   }
//   run {
//     iters 500000
//     epsilon 0.1
//     jump deterministic      # any of: deterministic gaussian student-t
//     jump_dof 7
//     jr_quantile 0.999       # jumping-region chi-square quantile
//     local gaussian          # gaussian | student-t
//     local_dof 7
//     q student-t             # gaussian | student-t
//     q_dof 7
//     record_stride 1
//     discard 0
//     snapshot_stride 0
//     air off                 # on | off
//   }
//   adapt {
//     alpha 0.7
//     beta 1e-4
//     ac1 auto                # auto = max(1000, dim^2/2)
//     ac2 1000
//     alpha_opt 0.234
//     eps_w 0.01
//     air_c 100
//     air_kappa 1
//     air_kappa_star 0.5
//     local_scale auto        # auto = 2.38^2/dim
//     sigma_cap auto          # auto = 1e6 * max initial eigenvalue
//   }
//
// Unknown keys are rejected.  `defaults(target, dim)` pre-fills every field
// with that target's published settings, so a config file only needs the
// values it changes.
struct ExperimentSpec {
  std::string target = "gaussian_mixture";
  int dim = 10;
  std::string data_path;  // sensor observations file
  long long replications = 20;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_dir = "out";

  BurninConfig burnin;
  RunConfig run;
  std::vector<std::string> jump_flavors = {"deterministic"};
  double jump_dof = 7.0;
  double jr_quantile = 0.999;

  static ExperimentSpec defaults(const std::string& target, int dim = 0);
  static ExperimentSpec from_text(const std::string& text);
  static ExperimentSpec from_file(const std::string& path);

  std::string to_text() const;
  void validate() const;

  // Route one key to the same setters the parser uses.  `key` is either a
  // top-level name ("seed") or block-qualified ("run.iters"); `value` may
  // hold several whitespace-separated tokens.  Used by the CLI flag and
  // environment-variable overrides.
  void set(const std::string& key, const std::string& value);

  TargetPtr load_target() const;
  JumpKind resolve_jump(const std::string& flavor) const;
};

// Squared-Mahalanobis radius of the jumping region: the `q` quantile of a
// chi-square with `dim` degrees of freedom.
double jump_region_radius(int dim, double q);

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b);

}  // namespace jams
