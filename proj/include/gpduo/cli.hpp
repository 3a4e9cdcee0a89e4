#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpduo {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_io = 4 };

/// Unreadable or unwritable file, or input data in the wrong shape.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed command line. `inputs` holds positional arguments: the config file
/// for townes/solve/sweep/phase, the CSV files for report.
struct Invocation {
  std::string command{};
  std::vector<std::string> inputs{};
  std::string config_path{};
  std::optional<std::string> out_dir{};
  std::optional<int> threads{};
  std::optional<std::uint64_t> seed{};
  std::optional<double> tol{};
};

/// Runs one command. Human-readable output goes to `out`; failures are
/// reported on `err` as a single JSON line. Returns the process exit code.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace gpduo
