#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fa1f::cli {

/// Bad flags, bad config file, or values outside their domain. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::vector<double> q_list;
  int dim = 0;  // 0 = subcommand default
  std::size_t samples = 100000;
  std::size_t n_traj = 2000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string method = "variational";
  double q0 = 0.5;
  double c = 1.0;
  std::optional<int> ell;
  std::optional<int> side;
  std::optional<double> t_max;
  std::string box;    // "AxB..." extents
  std::string torus;  // "AxB..." extents
  std::string graph;  // edge-list file
  std::vector<int> origin;  // exact: origin coordinates inside --box/--torus
  std::vector<int> z;
  std::vector<int> cone;
  std::string out;
  std::string config_file;
};

/// Flags override values from the --config file; unknown keys are rejected.
/// Throws UsageError. Returns nullopt when help was requested (printed to out).
std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::ostream& out);

/// Runs the subcommand, writes its CSV atomically and prints a summary to out.
/// Library errors propagate.
void run(const RunConfig& config, std::ostream& out);

/// parse_config + run with exit-code mapping: 0 success, 1 usage or config
/// error, 2 numerical failure.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output path: --out, else $FA1F_OUT_DIR/<subcommand>.csv, else ./<subcommand>.csv.
std::string output_path(const RunConfig& config);

/// Canonical "key=value" dump of everything that determines the output bytes.
std::string describe(const RunConfig& config);

}  // namespace fa1f::cli
