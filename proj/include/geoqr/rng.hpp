#pragma once

#include <cstdint>
#include <random>

namespace geoqr {

// Seeded generator with hand-rolled variate transforms, so a seed yields the
// same stream on every standard library (std::normal_distribution and
// friends are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();  // rate 1
  // Marsaglia-Tsang; `shape` > 0, unit rate.
  double gamma(double shape);
  // 1 / Gamma(shape, rate = scale).
  double inverse_gamma(double shape, double scale);
  // Michael-Schucany-Haas transformation.
  double inverse_gaussian(double mean, double shape);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace geoqr
