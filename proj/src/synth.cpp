#include "geoqr/synth.hpp"

#include <boost/math/distributions/normal.hpp>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "geoqr/error.hpp"
#include "geoqr/rng.hpp"

namespace geoqr {

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

double scenario_b_curve(double x) { return std::sin(2.0 * std::numbers::pi * x); }

double Scenario::true_quantile(std::size_t i, double tau) const {
  const double off = quantile_offset(tau);
  switch (label) {
    case 'A': return intercept + slope * data.column("x")[i] + off;
    case 'B': return scenario_b_curve(data.column("x")[i]) + off;
    case 'C': {
      const auto r = static_cast<std::size_t>(data.column("region")[i]) - 1;
      return field.at(r) + off;
    }
  }
  throw Error("unknown scenario");
}

Scenario scenario_a_linear(std::size_t n, std::uint64_t seed) {
  if (n < 50) throw Error("scenario A needs n >= 50");
  Rng rng(seed);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 2.0 * rng.uniform() - 1.0;
    y[i] = 1.0 + 2.0 * x[i] + rng.normal();
  }
  return Scenario{'A', n, seed, Dataset({"y", "x"}, {std::move(y), std::move(x)}), std::nullopt, 1.0, 2.0, 1.0, {}};
}

Scenario scenario_b_smooth(std::size_t n, std::uint64_t seed) {
  if (n < 200) throw Error("scenario B needs n >= 200");
  Rng rng(seed);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform();
    y[i] = scenario_b_curve(x[i]) + 0.3 * rng.normal();
  }
  return Scenario{'B', n, seed, Dataset({"y", "x"}, {std::move(y), std::move(x)}), std::nullopt, 0.0, 0.0, 0.3, {}};
}

RegionGraph rook_lattice(std::size_t side) {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> adj(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t k = r * side + c;
      labels.push_back(std::to_string(k + 1));
      if (r > 0) adj[k].push_back(k - side);
      if (c > 0) adj[k].push_back(k - 1);
      if (c + 1 < side) adj[k].push_back(k + 1);
      if (r + 1 < side) adj[k].push_back(k + side);
    }
  }
  return RegionGraph(std::move(labels), std::move(adj));
}

Scenario scenario_c_spatial(std::size_t grid_side, std::size_t per_region, std::uint64_t seed) {
  if (grid_side < 4) throw Error("scenario C needs grid_side >= 4");
  if (per_region < 5) throw Error("scenario C needs per_region >= 5");
  const std::size_t regions = grid_side * grid_side;
  std::vector<double> field(regions);
  double mean = 0.0;
  for (std::size_t r = 0; r < grid_side; ++r) {
    for (std::size_t c = 0; c < grid_side; ++c) {
      const double u = (static_cast<double>(r) + 0.5) / static_cast<double>(grid_side);
      const double v = (static_cast<double>(c) + 0.5) / static_cast<double>(grid_side);
      const double s = std::sin(2.0 * std::numbers::pi * u) + std::cos(std::numbers::pi * v);
      field[r * grid_side + c] = s;
      mean += s;
    }
  }
  mean /= static_cast<double>(regions);
  for (auto& s : field) s -= mean;

  const double noise_sd = 0.5;
  Rng rng(seed);
  const std::size_t n = regions * per_region;
  std::vector<double> y(n), region(n);
  for (std::size_t k = 0; k < regions; ++k) {
    for (std::size_t j = 0; j < per_region; ++j) {
      const std::size_t i = k * per_region + j;
      region[i] = static_cast<double>(k + 1);
      y[i] = field[k] + noise_sd * rng.normal();
    }
  }
  return Scenario{'C',
                  n,
                  seed,
                  Dataset({"y", "region"}, {std::move(y), std::move(region)}, std::string("region")),
                  rook_lattice(grid_side),
                  0.0,
                  0.0,
                  noise_sd,
                  std::move(field)};
}

void write_truth(std::ostream& out, const Scenario& s) {
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
  };
  out << "# schema: geoqr/truth/1\n";
  out << "key\tvalue\n";
  out << "scenario\t" << s.label << '\n';
  out << "n\t" << s.n << '\n';
  out << "seed\t" << s.seed << '\n';
  out << "noise_sd\t" << num(s.noise_sd) << '\n';
  switch (s.label) {
    case 'A':
      out << "intercept\t" << num(s.intercept) << '\n';
      out << "slope\t" << num(s.slope) << '\n';
      break;
    case 'B':
      out << "curve\tsin(2*pi*x)\n";
      break;
    case 'C':
      for (std::size_t r = 0; r < s.field.size(); ++r) {
        out << "field." << s.graph->labels()[r] << '\t' << num(s.field[r]) << '\n';
      }
      break;
  }
}

}  // namespace geoqr
