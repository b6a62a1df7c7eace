#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "geoqr/error.hpp"
#include "geoqr/synth.hpp"

using namespace geoqr;

namespace {
bool same_data(const Dataset& a, const Dataset& b) {
  if (a.names() != b.names() || a.rows() != b.rows()) return false;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    auto x = a.column(j), y = b.column(j);
    if (!std::equal(x.begin(), x.end(), y.begin())) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("normal quantiles") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.85) == doctest::Approx(1.0364333894937898));
  CHECK(normal_quantile(0.15) == doctest::Approx(-normal_quantile(0.85)));
}

TEST_CASE("scenario A") {
  auto s = scenario_a_linear(200, 1);
  CHECK(s.data.rows() == 200);
  CHECK(s.data.names() == std::vector<std::string>{"y", "x"});
  for (double x : s.data.column("x")) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  CHECK(s.intercept + s.slope * 0.0 + s.quantile_offset(0.5) == 1.0);
  CHECK(s.quantile_offset(0.85) == doctest::Approx(1.0364333894937898));
  const double x0 = s.data.column("x")[0];
  CHECK(s.true_quantile(0, 0.85) == doctest::Approx(1 + 2 * x0 + 1.0364333894937898));
  CHECK(same_data(s.data, scenario_a_linear(200, 1).data));
  CHECK_FALSE(same_data(s.data, scenario_a_linear(200, 2).data));
  CHECK_THROWS_AS(scenario_a_linear(49, 1), Error);
}

TEST_CASE("scenario B") {
  CHECK(scenario_b_curve(0.25) == doctest::Approx(1.0));
  auto s = scenario_b_smooth(300, 4);
  CHECK(scenario_b_curve(0.75) + s.quantile_offset(0.15) == doctest::Approx(-1.3109300168481369));
  CHECK(s.noise_sd == 0.3);
  for (double x : s.data.column("x")) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK(same_data(s.data, scenario_b_smooth(300, 4).data));
  CHECK_THROWS_AS(scenario_b_smooth(199, 1), Error);
}

TEST_CASE("scenario C") {
  for (std::size_t side : {4u, 8u}) {
    auto s = scenario_c_spatial(side, 5, 3);
    REQUIRE(s.graph);
    CHECK(s.graph->size() == side * side);
    CHECK(s.graph->edge_count() == 2 * side * (side - 1));
    CHECK(connected_components(*s.graph).size() == 1);
    CHECK(std::abs(std::accumulate(s.field.begin(), s.field.end(), 0.0)) <= 1e-12);
    CHECK(s.data.rows() == side * side * 5);
    CHECK(s.data.region_column() == std::optional<std::string>("region"));
    // every region value names a graph label
    for (double r : s.data.column("region")) CHECK(s.graph->find(std::to_string(static_cast<long>(r))).has_value());
    CHECK(same_data(s.data, scenario_c_spatial(side, 5, 3).data));
  }
  CHECK_THROWS_AS(scenario_c_spatial(3, 5, 1), Error);
  CHECK_THROWS_AS(scenario_c_spatial(4, 4, 1), Error);
}

TEST_CASE("generated data survives the file formats") {
  auto s = scenario_c_spatial(5, 6, 11);
  std::stringstream raw, gra;
  write_raw(raw, s.data);
  write_gra(gra, *s.graph);
  auto back = read_raw(raw).data.with_region_column("region");
  CHECK(same_data(back, s.data));
  CHECK(parse_gra(gra) == *s.graph);
}

TEST_CASE("write_truth") {
  std::ostringstream a;
  write_truth(a, scenario_a_linear(60, 5));
  CHECK(a.str() == "# schema: geoqr/truth/1\nkey\tvalue\nscenario\tA\nn\t60\nseed\t5\nnoise_sd\t1\nintercept\t1\nslope\t2\n");

  std::ostringstream c;
  auto s = scenario_c_spatial(4, 5, 2);
  write_truth(c, s);
  CHECK(c.str().find("field.16\t") != std::string::npos);
}
