#include "gpduo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gpduo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {
        "command", "seed", "threads", "output.dir", "output.prefix",
        "params.a", "params.b", "params.beta",
        "grid.half_extent", "grid.points", "grid.stencil", "grid.extent_factor",
        "solver.dt0", "solver.dt_max", "solver.grow", "solver.backtrack", "solver.dt_min",
        "solver.tol_grad", "solver.tol_e", "solver.stall_window", "solver.max_iters",
        "solver.anderson_depth", "solver.linear_tol", "solver.linear_max_iter",
        "init.kind", "init.width", "init.mass_fraction2", "init.seed_fraction2",
        "probe.starts",
        "sweep.schedule", "sweep.b", "sweep.varsigma0", "sweep.beta_bar", "sweep.gamma",
        "sweep.delta0", "sweep.m_first", "sweep.m_last", "sweep.warm_start",
        "sweep.seed_fraction2", "sweep.reseed_fraction2",
        "phase.b", "phase.a_values", "phase.beta_values",
        "townes.tol", "townes.step", "townes.r_max"};
    for (const char* s : {"potential1", "potential2"})
      for (const char* f : {"kind", "degree", "k1", "k2", "g"})
        k.push_back(std::string(s) + "." + f);
    return k;
  }();
  return keys;
}

ConfigFile ConfigFile::parse(const std::string& text) {
  static const std::set<std::string> known(known_config_keys().begin(),
                                           known_config_keys().end());
  ConfigFile cfg;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'", lineno);
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", lineno);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", lineno);
    if (cfg.entries_.count(key))
      throw ConfigError("duplicate key '" + key + "' (first on line " +
                            std::to_string(cfg.entries_[key].line) + ")",
                        lineno);
    cfg.entries_[key] = {value, lineno};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e->value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != e->value.size() || !std::isfinite(v))
    throw ConfigError("'" + key + "' must be a finite number, got '" + e->value + "'", e->line);
  return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(e->value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != e->value.size() || v < -2147483647L || v > 2147483647L)
    throw ConfigError("'" + key + "' must be an integer, got '" + e->value + "'", e->line);
  return static_cast<int>(v);
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(e->value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != e->value.size() || e->value.front() == '-')
    throw ConfigError("'" + key + "' must be an unsigned integer, got '" + e->value + "'",
                      e->line);
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  throw ConfigError("'" + key + "' must be true or false", e->line);
}

std::vector<double> ConfigFile::get_list(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return {};
  std::vector<double> out;
  std::stringstream ss(e->value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(v))
      throw ConfigError("'" + key + "' must be a comma-separated list of numbers", e->line);
    out.push_back(v);
  }
  return out;
}

void ConfigFile::set(const std::string& key, const std::string& value) {
  entries_[key] = {value, 0};
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& [k, e] : entries_) out += k + "=" + e.value + "\n";
  return out;
}

std::string config_hash(const ConfigFile& cfg) {
  // Worker count and output location do not change results.
  ConfigFile stripped = cfg;
  stripped.entries_.erase("threads");
  stripped.entries_.erase("output.dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stripped.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

HomogeneousPotential potential_from_config(const ConfigFile& cfg, const std::string& section) {
  const std::string kind = cfg.get_string(section + ".kind", "isotropic");
  try {
    if (kind == "isotropic") return HomogeneousPotential::isotropic(cfg.get_double(section + ".degree", 2.0));
    if (kind == "anisotropic")
      return HomogeneousPotential::anisotropic(cfg.get_double(section + ".k1", 1.0),
                                               cfg.get_double(section + ".k2", 1.0));
    if (kind == "angular") {
      const std::vector<double> g = cfg.get_list(section + ".g");
      return HomogeneousPotential::angular(cfg.get_double(section + ".degree", 2.0), g);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + ": " + e.what());
  }
  throw ConfigError(section + ".kind must be isotropic, anisotropic or angular, got '" + kind + "'");
}

std::string describe(const HomogeneousPotential& V) {
  char buf[96];
  switch (V.kind()) {
    case HomogeneousPotential::Kind::isotropic:
      std::snprintf(buf, sizeof buf, "isotropic p=%g", V.degree());
      break;
    case HomogeneousPotential::Kind::anisotropic_quadratic:
      std::snprintf(buf, sizeof buf, "anisotropic k1=%g k2=%g", V.k1(), V.k2());
      break;
    case HomogeneousPotential::Kind::angular:
      std::snprintf(buf, sizeof buf, "angular p=%g samples=%zu", V.degree(),
                    V.angular_samples().size());
      break;
  }
  return buf;
}

namespace {

MinimizerConfig solver_from_config(const ConfigFile& cfg) {
  MinimizerConfig s;
  s.dt0 = cfg.get_double("solver.dt0", s.dt0);
  s.dt_max = cfg.get_double("solver.dt_max", s.dt_max);
  s.grow = cfg.get_double("solver.grow", s.grow);
  s.backtrack = cfg.get_double("solver.backtrack", s.backtrack);
  s.dt_min = cfg.get_double("solver.dt_min", s.dt_min);
  s.tol_grad = cfg.get_double("solver.tol_grad", s.tol_grad);
  s.tol_e = cfg.get_double("solver.tol_e", s.tol_e);
  s.stall_window = cfg.get_int("solver.stall_window", s.stall_window);
  s.max_iters = cfg.get_int("solver.max_iters", s.max_iters);
  s.anderson_depth = cfg.get_int("solver.anderson_depth", s.anderson_depth);
  s.linear_tol = cfg.get_double("solver.linear_tol", s.linear_tol);
  s.linear_max_iter = cfg.get_int("solver.linear_max_iter", s.linear_max_iter);
  if (!(s.dt0 > 0.0) || !(s.dt_max >= s.dt0) || !(s.grow >= 1.0) ||
      !(s.backtrack > 0.0 && s.backtrack < 1.0) || !(s.tol_grad > 0.0) || !(s.tol_e > 0.0) ||
      !(s.linear_tol > 0.0) || s.max_iters < 0 || s.stall_window < 1 || s.anderson_depth < 0 ||
      s.linear_max_iter < 1)
    throw ConfigError("solver: need 0 < dt0 <= dt_max, grow >= 1, backtrack in (0, 1), "
                      "positive tolerances and nonnegative iteration limits");
  return s;
}

Stencil stencil_from_config(const ConfigFile& cfg) {
  try {
    return stencil_from_order(cfg.get_int("grid.stencil", 6));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid.stencil: ") + e.what());
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

RunConfig make_run_config(const std::string& command, const ConfigFile& cfg) {
  static const std::set<std::string> commands = {"townes", "solve", "sweep", "phase", "report"};
  if (!commands.count(command)) throw ConfigError("unknown command '" + command + "'");
  if (cfg.has("command") && cfg.get_string("command", "") != command)
    throw ConfigError("config is for command '" + cfg.get_string("command", "") +
                      "', not '" + command + "'");

  RunConfig rc;
  rc.command = command;
  rc.seed = cfg.get_u64("seed", 0);
  rc.threads = cfg.get_int("threads", 1);
  require(rc.threads >= 1, "threads must be >= 1");
  rc.out_dir = cfg.get_string("output.dir", rc.out_dir);
  rc.prefix = cfg.get_string("output.prefix", command);
  rc.hash = config_hash(cfg);

  rc.params.a = cfg.get_double("params.a", 0.0);
  rc.params.b = cfg.get_double("params.b", 0.0);
  rc.params.beta = cfg.get_double("params.beta", 0.0);
  require(rc.params.a >= 0.0 && rc.params.b >= 0.0 && rc.params.beta >= 0.0,
          "params: a, b, beta must be >= 0");
  rc.params.V1 = potential_from_config(cfg, "potential1");
  rc.params.V2 = potential_from_config(cfg, "potential2");

  const double L = cfg.get_double("grid.half_extent", 8.0);
  const int n = cfg.get_int("grid.points", 257);
  try {
    rc.grid = make_grid(L, n, stencil_from_config(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  rc.solver = solver_from_config(cfg);
  rc.solver.grid = rc.grid;

  rc.init_kind = cfg.get_string("init.kind", "gaussian");
  require(rc.init_kind == "gaussian" || rc.init_kind == "trial",
          "init.kind must be gaussian or trial");
  rc.init_width = cfg.get_double("init.width", 1.0);
  rc.init_mass_fraction2 = cfg.get_double("init.mass_fraction2", 0.5);
  rc.init_seed_fraction2 = cfg.get_double("init.seed_fraction2", 0.5);
  require(rc.init_width > 0.0, "init.width must be positive");
  require(rc.init_mass_fraction2 >= 0.0 && rc.init_mass_fraction2 <= 1.0,
          "init.mass_fraction2 must be in [0, 1]");
  require(rc.init_seed_fraction2 >= 0.0 && rc.init_seed_fraction2 < 1.0,
          "init.seed_fraction2 must be in [0, 1)");
  rc.probe_starts = cfg.get_int("probe.starts", 0);
  require(rc.probe_starts == 0 || rc.probe_starts >= 2, "probe.starts must be 0 or >= 2");

  SweepSpec& s = rc.sweep;
  try {
    s.schedule = schedule_from_string(cfg.get_string("sweep.schedule", "regionI"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  s.b = cfg.get_double("sweep.b", 0.5 * townes().a_star);
  s.varsigma0 = cfg.get_double("sweep.varsigma0", s.varsigma0);
  s.beta_bar = cfg.get_double("sweep.beta_bar", 0.5 * townes().a_star);
  s.gamma = cfg.get_double("sweep.gamma", s.gamma);
  s.delta0 = cfg.get_double("sweep.delta0", s.delta0);
  s.m_first = cfg.get_int("sweep.m_first", s.m_first);
  s.m_last = cfg.get_int("sweep.m_last", s.m_last);
  s.warm_start = cfg.get_bool("sweep.warm_start", s.warm_start);
  s.seed_fraction2 = cfg.get_double("sweep.seed_fraction2", s.seed_fraction2);
  s.reseed_fraction2 = cfg.get_double("sweep.reseed_fraction2", s.reseed_fraction2);
  s.V1 = rc.params.V1;
  s.V2 = rc.params.V2;
  s.grid.extent_factor = cfg.get_double("grid.extent_factor", s.grid.extent_factor);
  s.grid.points = cfg.get_int("grid.points", s.grid.points);
  s.grid.stencil = stencil_from_config(cfg);
  require(s.grid.extent_factor > 0.0, "grid.extent_factor must be positive");
  require(s.grid.points >= 16, "grid.points must be >= 16");
  s.solver = rc.solver;
  if (command == "sweep") {
    try {
      (void)sweep_points(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  rc.phase_b = cfg.get_double("phase.b", 0.5 * townes().a_star);
  const std::vector<double> as = cfg.get_list("phase.a_values");
  const std::vector<double> bs = cfg.get_list("phase.beta_values");
  for (double a : as)
    for (double beta : bs) rc.phase_points.emplace_back(a, beta);
  if (command == "phase") {
    require(!rc.phase_points.empty(), "phase: need phase.a_values and phase.beta_values");
    for (const auto& [a, beta] : rc.phase_points)
      require(minimizer_exists(townes().a_star, a, rc.phase_b, beta),
              "phase: point (a=" + std::to_string(a) + ", beta=" + std::to_string(beta) +
                  ") is outside the existence region");
  }

  rc.townes.tol = cfg.get_double("townes.tol", rc.townes.tol);
  rc.townes.step = cfg.get_double("townes.step", rc.townes.step);
  rc.townes.r_max = cfg.get_double("townes.r_max", rc.townes.r_max);
  require(rc.townes.tol >= 1e-12, "townes.tol must be >= 1e-12");
  require(rc.townes.step > 0.0 && rc.townes.step <= 1e-3 * rc.townes.shoot_r_max,
          "townes.step must be in (0, 0.03]");
  require(rc.townes.r_max > 0.0, "townes.r_max must be positive");
  return rc;
}

}  // namespace gpduo
