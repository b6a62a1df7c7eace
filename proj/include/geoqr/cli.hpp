#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geoqr/engine.hpp"

namespace geoqr::cli {

struct RunConfig {
  std::string data;
  std::optional<std::string> graph;
  std::string response;
  std::vector<std::string> linear;
  std::vector<std::string> smooth;
  std::optional<std::string> spatial;  // region column
  std::vector<double> quantiles{0.15, 0.5, 0.85};
  McmcConfig mcmc;
  int basis_size = 22;
  bool standardize = true;
  std::string output;

  void validate() const;
  ModelSpec model(double quantile, std::size_t index) const;
};

// Reads a JSON object whose keys mirror the long flag names.
RunConfig load_run_config(const std::string& path);

struct DescribeConfig {
  std::string data;
  std::string response;
  std::vector<std::string> columns;  // empty: every column except region/stratifier
  std::optional<std::string> stratifier;
  std::optional<std::string> exposure;
  std::optional<std::string> region;
  double low_q = 0.15;
  double high_q = 0.85;
  double lowess_span = 2.0 / 3.0;
  int lowess_iters = 3;
  std::string output;
};

struct SimulateConfig {
  char scenario = 'A';
  std::size_t n = 500;
  std::size_t grid_side = 8;
  std::size_t per_region = 10;
  std::uint64_t seed = 58581;
  std::string output;
};

// Output directory name for a quantile, e.g. 0.15 -> "q15".
std::string quantile_dir(double tau);

void cmd_describe(const DescribeConfig& config);
// Returns the per-quantile result directories written.
std::vector<std::string> cmd_fit(const RunConfig& config);
void cmd_compare(const std::vector<std::string>& result_dirs, std::ostream& out);
void cmd_simulate(const SimulateConfig& config);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geoqr::cli
