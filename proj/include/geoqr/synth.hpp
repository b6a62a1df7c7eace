#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geoqr/graph.hpp"
#include "geoqr/ingest.hpp"

namespace geoqr {

double normal_quantile(double p);

// Synthetic data set with known conditional quantiles.
//   A: y = 1 + 2x + e, x ~ U(-1, 1), e ~ N(0, 1)
//   B: y = sin(2 pi x) + e, x ~ U(0, 1), e ~ N(0, 0.3^2)
//   C: y = s(region) + e on a rook lattice, s centred, e ~ N(0, 0.5^2)
struct Scenario {
  char label = 'A';
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Dataset data;
  std::optional<RegionGraph> graph;
  double intercept = 0.0;
  double slope = 0.0;
  double noise_sd = 1.0;
  std::vector<double> field;  // scenario C, graph label order

  // Offset of the true tau-quantile above the noise-free mean.
  double quantile_offset(double tau) const { return noise_sd * normal_quantile(tau); }
  // True tau-quantile of y for observation i.
  double true_quantile(std::size_t i, double tau) const;
};

double scenario_b_curve(double x);

Scenario scenario_a_linear(std::size_t n, std::uint64_t seed);
Scenario scenario_b_smooth(std::size_t n, std::uint64_t seed);
Scenario scenario_c_spatial(std::size_t grid_side, std::size_t per_region, std::uint64_t seed);

RegionGraph rook_lattice(std::size_t side);

// key<TAB>value lines describing the generating truth.
void write_truth(std::ostream& out, const Scenario& s);

}  // namespace geoqr
