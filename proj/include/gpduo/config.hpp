#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpduo/asymptotics.hpp"
#include "gpduo/minimizer.hpp"
#include "gpduo/townes.hpp"

namespace gpduo {

/// Bad configuration text or values. `line` is 0 when the problem is not tied
/// to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Flat "key = value" text with '#' comments; keys are dotted paths
/// (e.g. solver.tol_grad). Duplicate and unknown keys are errors.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  /// Adds or replaces a value (command-line overrides).
  void set(const std::string& key, const std::string& value);

  /// Sorted "key=value" lines.
  std::string canonical() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  friend std::string config_hash(const ConfigFile& cfg);
};

/// Every key accepted in a configuration file.
const std::vector<std::string>& known_config_keys();

/// 64-bit FNV-1a of the canonical text without `threads` and `output.dir`,
/// as 16 hex digits.
std::string config_hash(const ConfigFile& cfg);

struct RunConfig {
  std::string command;
  PhysParams params;
  Grid2D grid{8.0, 257};
  MinimizerConfig solver;
  std::string init_kind = "gaussian";
  double init_width = 1.0;
  double init_mass_fraction2 = 0.5;
  double init_seed_fraction2 = 0.5;
  int probe_starts = 0;
  SweepSpec sweep;
  double phase_b = 0.0;
  std::vector<std::pair<double, double>> phase_points;
  TownesOptions townes;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "gpduo_out";
  std::string prefix;
  std::string hash;
};

/// Builds the run description for `command` from a parsed file. Throws
/// ConfigError for malformed or out-of-range values.
RunConfig make_run_config(const std::string& command, const ConfigFile& cfg);

HomogeneousPotential potential_from_config(const ConfigFile& cfg, const std::string& section);
std::string describe(const HomogeneousPotential& V);

}  // namespace gpduo
