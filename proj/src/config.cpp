#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "error.hpp"

namespace jams {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RawItem {
  std::string block;  // empty for top-level keys
  std::string key;
  std::vector<std::string> tokens;

  std::string where() const { return block.empty() ? key : block + "." + key; }
};

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<RawItem> parse_items(const std::string& text) {
  std::vector<RawItem> items;
  std::istringstream is(text);
  std::string line, block;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() == 2 && toks[1] == "{") {
      if (!block.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) + ": blocks cannot nest");
      }
      block = toks[0];
      continue;
    }
    if (toks.size() == 1 && toks[0] == "}") {
      if (block.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) + ": stray '}'");
      }
      block.clear();
      continue;
    }
    if (toks.size() < 2) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key value...'");
    }
    RawItem item;
    item.block = block;
    item.key = toks[0];
    item.tokens.assign(toks.begin() + 1, toks.end());
    items.push_back(std::move(item));
  }
  if (!block.empty()) throw ConfigError("config: unterminated block '" + block + "'");
  return items;
}

double to_double(const RawItem& it, const std::string& tok) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config " + it.where() + ": '" + tok + "' is not a number");
  }
}

long long to_ll(const RawItem& it, const std::string& tok) {
  try {
    size_t used = 0;
    long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config " + it.where() + ": '" + tok + "' is not an integer");
  }
}

std::uint64_t to_u64(const RawItem& it, const std::string& tok) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config " + it.where() + ": '" + tok + "' is not an unsigned integer");
  }
}

bool to_onoff(const RawItem& it, const std::string& tok) {
  if (tok == "on") return true;
  if (tok == "off") return false;
  throw ConfigError("config " + it.where() + ": expected 'on' or 'off', got '" + tok + "'");
}

void expect_one(const RawItem& it) {
  if (it.tokens.size() != 1) {
    throw ConfigError("config " + it.where() + ": expected exactly one value");
  }
}

// One value broadcast to every coordinate, or one value per coordinate.
Vector to_box_side(const RawItem& it, int dim) {
  if (it.tokens.size() == 1) {
    return Vector::Constant(dim, to_double(it, it.tokens[0]));
  }
  if (static_cast<int>(it.tokens.size()) != dim) {
    throw ConfigError("config " + it.where() + ": expected 1 or dim values");
  }
  Vector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = to_double(it, it.tokens[static_cast<size_t>(j)]);
  return v;
}

void set_family(EllipticalKind& kind, const RawItem& it, const std::string& tok) {
  if (tok == "gaussian") {
    kind.family = EllipticalKind::kNormal;
  } else if (tok == "student-t") {
    kind.family = EllipticalKind::kStudentT;
    if (!(kind.dof > 2.0)) kind.dof = 7.0;
  } else {
    throw ConfigError("config " + it.where() + ": expected 'gaussian' or 'student-t'");
  }
}

void apply_item(ExperimentSpec& spec, const RawItem& it) {
  const std::string& tok0 = it.tokens[0];
  const auto both_adapt = [&spec](auto&& fn) {
    fn(spec.run.adaptation);
    fn(spec.burnin.adaptation);
  };

  if (it.block.empty()) {
    expect_one(it);
    if (it.key == "replications") {
      spec.replications = to_ll(it, tok0);
    } else if (it.key == "seed") {
      spec.seed = to_u64(it, tok0);
    } else if (it.key == "workers") {
      spec.workers = static_cast<int>(to_ll(it, tok0));
    } else if (it.key == "out") {
      spec.output_dir = tok0;
    } else {
      throw ConfigError("config: unknown key '" + it.key + "'");
    }
    return;
  }

  if (it.block == "target") {
    expect_one(it);
    if (it.key == "name") {
      spec.target = tok0;
    } else if (it.key == "dim") {
      spec.dim = static_cast<int>(to_ll(it, tok0));
    } else if (it.key == "data") {
      spec.data_path = tok0;
    } else {
      throw ConfigError("config: unknown key 'target." + it.key + "'");
    }
    return;
  }

  if (it.block == "burnin") {
    if (it.key == "box_low") {
      spec.burnin.box_low = to_box_side(it, spec.dim);
      return;
    }
    if (it.key == "box_high") {
      spec.burnin.box_high = to_box_side(it, spec.dim);
      return;
    }
    expect_one(it);
    if (it.key == "starts") {
      spec.burnin.n_starts = to_ll(it, tok0);
    } else if (it.key == "merge_q") {
      spec.burnin.merge_q = to_double(it, tok0);
    } else if (it.key == "b_acc") {
      spec.burnin.b_acc = to_double(it, tok0);
    } else if (it.key == "max_rounds") {
      spec.burnin.max_rounds = static_cast<int>(to_ll(it, tok0));
    } else if (it.key == "round0") {
      spec.burnin.round0_len = to_ll(it, tok0);
    } else {
      throw ConfigError("config: unknown key 'burnin." + it.key + "'");
    }
    return;
  }

  if (it.block == "run") {
    if (it.key == "jump") {
      spec.jump_flavors = it.tokens;
      return;
    }
    expect_one(it);
    if (it.key == "iters") {
      spec.run.n_iters = to_ll(it, tok0);
    } else if (it.key == "epsilon") {
      spec.run.epsilon = to_double(it, tok0);
    } else if (it.key == "jump_dof") {
      spec.jump_dof = to_double(it, tok0);
    } else if (it.key == "jr_quantile") {
      spec.jr_quantile = to_double(it, tok0);
    } else if (it.key == "local") {
      set_family(spec.run.local_kind, it, tok0);
      spec.burnin.local_kind = spec.run.local_kind;
    } else if (it.key == "local_dof") {
      spec.run.local_kind.dof = to_double(it, tok0);
      spec.burnin.local_kind = spec.run.local_kind;
    } else if (it.key == "q") {
      set_family(spec.run.q_kind, it, tok0);
      spec.burnin.q_kind = spec.run.q_kind;
    } else if (it.key == "q_dof") {
      spec.run.q_kind.dof = to_double(it, tok0);
      spec.burnin.q_kind = spec.run.q_kind;
    } else if (it.key == "record_stride") {
      spec.run.record_stride = to_ll(it, tok0);
    } else if (it.key == "discard") {
      spec.run.discard = to_ll(it, tok0);
    } else if (it.key == "snapshot_stride") {
      spec.run.snapshot_stride = to_ll(it, tok0);
    } else if (it.key == "air") {
      spec.run.air_mode = to_onoff(it, tok0);
      const bool on = spec.run.air_mode;
      const auto set = [on](AdaptationConfig& a) { a.air_enabled = on; };
      set(spec.run.adaptation);
      set(spec.burnin.adaptation);
    } else {
      throw ConfigError("config: unknown key 'run." + it.key + "'");
    }
    return;
  }

  if (it.block == "adapt") {
    expect_one(it);
    if (it.key == "alpha") {
      both_adapt([&](AdaptationConfig& a) { a.alpha = to_double(it, tok0); });
    } else if (it.key == "beta") {
      both_adapt([&](AdaptationConfig& a) { a.beta = to_double(it, tok0); });
    } else if (it.key == "ac1") {
      const long long v = tok0 == "auto" ? AdaptationConfig::auto_ac1(spec.dim) : to_ll(it, tok0);
      both_adapt([v](AdaptationConfig& a) { a.ac1 = v; });
    } else if (it.key == "ac2") {
      both_adapt([&](AdaptationConfig& a) { a.ac2 = to_ll(it, tok0); });
    } else if (it.key == "alpha_opt") {
      both_adapt([&](AdaptationConfig& a) { a.alpha_opt = to_double(it, tok0); });
    } else if (it.key == "eps_w") {
      both_adapt([&](AdaptationConfig& a) { a.eps_w_tilde = to_double(it, tok0); });
    } else if (it.key == "air_c") {
      both_adapt([&](AdaptationConfig& a) { a.air_c = to_double(it, tok0); });
    } else if (it.key == "air_kappa") {
      both_adapt([&](AdaptationConfig& a) { a.air_kappa = to_double(it, tok0); });
    } else if (it.key == "air_kappa_star") {
      both_adapt([&](AdaptationConfig& a) { a.air_kappa_star = to_double(it, tok0); });
    } else if (it.key == "local_scale") {
      const double v = tok0 == "auto" ? 2.38 * 2.38 / spec.dim : to_double(it, tok0);
      both_adapt([v](AdaptationConfig& a) { a.local_scale = v; });
    } else if (it.key == "pool_window") {
      const double v =
          tok0 == "auto" ? AdaptationConfig::auto_pool_window(spec.dim) : to_double(it, tok0);
      both_adapt([v](AdaptationConfig& a) { a.pool_window = v; });
    } else if (it.key == "sigma_cap") {
      const double v =
          tok0 == "auto" ? std::numeric_limits<double>::infinity() : to_double(it, tok0);
      both_adapt([v](AdaptationConfig& a) { a.sigma_eigen_cap = v; });
    } else {
      throw ConfigError("config: unknown key 'adapt." + it.key + "'");
    }
    return;
  }

  throw ConfigError("config: unknown block '" + it.block + "'");
}

void emit_box_side(std::ostringstream& os, const char* key, const Vector& v) {
  os << "  " << key;
  const bool uniform = (v.array() == v[0]).all();
  if (uniform) {
    os << ' ' << fmt(v[0]);
  } else {
    for (int j = 0; j < v.size(); ++j) os << ' ' << fmt(v[j]);
  }
  os << '\n';
}

const char* family_name(const EllipticalKind& k) {
  return k.family == EllipticalKind::kNormal ? "gaussian" : "student-t";
}

}  // namespace

ExperimentSpec ExperimentSpec::defaults(const std::string& target, int dim) {
  ExperimentSpec s;
  s.target = target;
  if (target == "gaussian_mixture") {
    s.dim = dim > 0 ? dim : 10;
    s.burnin.n_starts = 1500;
    s.burnin.box_low = Vector::Constant(s.dim, -2.0);
    s.burnin.box_high = Vector::Constant(s.dim, 2.0);
  } else if (target == "banana_t") {
    s.dim = dim > 0 ? dim : 10;
    s.burnin.n_starts = 40000;
    s.burnin.box_low = Vector::Constant(s.dim, -2.0);
    s.burnin.box_high = Vector::Constant(s.dim, 12.0);
  } else if (target == "sensor") {
    if (dim > 0 && dim != 2 * SensorData::kUnknown) {
      throw ConfigError("sensor target has fixed dimension 16");
    }
    s.dim = 2 * SensorData::kUnknown;
    s.burnin.n_starts = 10000;
    s.burnin.box_low = Vector::Constant(s.dim, 0.0);
    s.burnin.box_high = Vector::Constant(s.dim, 1.0);
    s.run.adaptation.ac2 = 500;
  } else {
    throw ConfigError("unknown target '" + target +
                      "' (expected gaussian_mixture, banana_t or sensor)");
  }
  s.run.adaptation.ac1 = AdaptationConfig::auto_ac1(s.dim);
  s.run.adaptation.local_scale = 2.38 * 2.38 / s.dim;
  s.run.adaptation.pool_window = AdaptationConfig::auto_pool_window(s.dim);
  s.burnin.adaptation = s.run.adaptation;
  s.burnin.q_kind = s.run.q_kind;
  s.burnin.local_kind = s.run.local_kind;
  return s;
}

ExperimentSpec ExperimentSpec::from_text(const std::string& text) {
  const std::vector<RawItem> items = parse_items(text);

  // Defaults depend on the target block, so scan for it first; every item is
  // then applied in file order on top of those defaults.
  std::string target = "gaussian_mixture";
  int dim = 0;
  for (const RawItem& it : items) {
    if (it.block != "target") continue;
    if (it.key == "name" && !it.tokens.empty()) target = it.tokens[0];
    if (it.key == "dim" && !it.tokens.empty()) dim = static_cast<int>(to_ll(it, it.tokens[0]));
  }
  ExperimentSpec spec = defaults(target, dim);
  for (const RawItem& it : items) apply_item(spec, it);
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string ExperimentSpec::to_text() const {
  std::ostringstream os;
  os << "replications " << replications << '\n';
  os << "seed " << seed << '\n';
  os << "workers " << workers << '\n';
  os << "out " << output_dir << '\n';
  os << "target {\n";
  os << "  name " << target << '\n';
  os << "  dim " << dim << '\n';
  if (!data_path.empty()) os << "  data " << data_path << '\n';
  os << "}\n";
  os << "burnin {\n";
  os << "  starts " << burnin.n_starts << '\n';
  emit_box_side(os, "box_low", burnin.box_low);
  emit_box_side(os, "box_high", burnin.box_high);
  os << "  merge_q " << fmt(burnin.merge_q) << '\n';
  os << "  b_acc " << fmt(burnin.b_acc) << '\n';
  os << "  max_rounds " << burnin.max_rounds << '\n';
  os << "  round0 " << burnin.round0_len << '\n';
  os << "}\n";
  os << "run {\n";
  os << "  iters " << run.n_iters << '\n';
  os << "  epsilon " << fmt(run.epsilon) << '\n';
  os << "  jump";
  for (const std::string& f : jump_flavors) os << ' ' << f;
  os << '\n';
  os << "  jump_dof " << fmt(jump_dof) << '\n';
  os << "  jr_quantile " << fmt(jr_quantile) << '\n';
  os << "  local " << family_name(run.local_kind) << '\n';
  os << "  local_dof " << fmt(run.local_kind.dof) << '\n';
  os << "  q " << family_name(run.q_kind) << '\n';
  os << "  q_dof " << fmt(run.q_kind.dof) << '\n';
  os << "  record_stride " << run.record_stride << '\n';
  os << "  discard " << run.discard << '\n';
  os << "  snapshot_stride " << run.snapshot_stride << '\n';
  os << "  air " << (run.air_mode ? "on" : "off") << '\n';
  os << "}\n";
  const AdaptationConfig& a = run.adaptation;
  os << "adapt {\n";
  os << "  alpha " << fmt(a.alpha) << '\n';
  os << "  beta " << fmt(a.beta) << '\n';
  os << "  ac1 " << a.ac1 << '\n';
  os << "  ac2 " << a.ac2 << '\n';
  os << "  alpha_opt " << fmt(a.alpha_opt) << '\n';
  os << "  eps_w " << fmt(a.eps_w_tilde) << '\n';
  os << "  air_c " << fmt(a.air_c) << '\n';
  os << "  air_kappa " << fmt(a.air_kappa) << '\n';
  os << "  air_kappa_star " << fmt(a.air_kappa_star) << '\n';
  os << "  local_scale " << fmt(a.local_scale) << '\n';
  os << "  pool_window " << fmt(a.pool_window) << '\n';
  os << "  sigma_cap "
     << (std::isfinite(a.sigma_eigen_cap) ? fmt(a.sigma_eigen_cap) : std::string("auto")) << '\n';
  os << "}\n";
  return os.str();
}

void ExperimentSpec::validate() const {
  if (target != "gaussian_mixture" && target != "banana_t" && target != "sensor") {
    throw ConfigError("unknown target '" + target + "'");
  }
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (target == "sensor" && dim != 2 * SensorData::kUnknown) {
    throw ConfigError("sensor target has fixed dimension 16");
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (output_dir.empty()) throw ConfigError("output directory must not be empty");
  if (jump_flavors.empty()) throw ConfigError("at least one jump flavor is required");
  for (const std::string& f : jump_flavors) {
    if (f != "deterministic" && f != "gaussian" && f != "student-t") {
      throw ConfigError("unknown jump flavor '" + f +
                        "' (expected deterministic, gaussian or student-t)");
    }
  }
  if (!(jump_dof > 2.0)) throw ConfigError("jump_dof must be > 2");
  if (!(jr_quantile > 0.0 && jr_quantile < 1.0)) throw ConfigError("jr_quantile must be in (0,1)");
  burnin.validate(dim);
  run.validate();
}

void ExperimentSpec::set(const std::string& key, const std::string& value) {
  RawItem it;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    it.block = key.substr(0, dot);
    it.key = key.substr(dot + 1);
  } else {
    it.key = key;
  }
  it.tokens = tokenize(value);
  if (it.tokens.empty()) throw ConfigError("config " + it.where() + ": empty value");
  apply_item(*this, it);
}

TargetPtr ExperimentSpec::load_target() const {
  if (target == "gaussian_mixture") return gaussian_mixture_target(dim);
  if (target == "banana_t") return banana_t_mixture_target(dim);
  if (target == "sensor") {
    if (data_path.empty()) throw ConfigError("sensor target requires target.data");
    return sensor_network_target(SensorData::load(data_path));
  }
  throw ConfigError("unknown target '" + target + "'");
}

JumpKind ExperimentSpec::resolve_jump(const std::string& flavor) const {
  if (flavor == "deterministic") {
    return JumpKind::deterministic(jump_region_radius(dim, jr_quantile));
  }
  if (flavor == "gaussian") return JumpKind::independent_normal();
  if (flavor == "student-t") return JumpKind::independent_t(jump_dof);
  throw ConfigError("unknown jump flavor '" + flavor + "'");
}

double jump_region_radius(int dim, double q) {
  if (dim < 1) throw ConfigError("jump_region_radius: dim must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("jump_region_radius: quantile must be in (0,1)");
  return boost::math::quantile(boost::math::chi_squared(static_cast<double>(dim)), q);
}

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
  return a.to_text() == b.to_text();
}

}  // namespace jams
