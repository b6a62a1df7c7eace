#include "geoqr/rng.hpp"

#include <cmath>
#include <limits>

#include "geoqr/error.hpp"

namespace geoqr {

double Rng::uniform() {
  // 53 random bits, shifted half a step off zero.
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw Error("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^(1/a).
    return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::inverse_gamma(double shape, double scale) {
  if (!(scale > 0.0)) throw Error("inverse gamma scale must be positive");
  const double g = gamma(shape);
  return scale / std::max(g, std::numeric_limits<double>::min());
}

double Rng::inverse_gaussian(double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw Error("inverse Gaussian parameters must be positive");
  const double z = normal();
  const double y = z * z;
  const double my = mean * y;
  // Smaller root mu (s - a) / (s + a) of the MSH quadratic, written without
  // the s - a cancellation that bites when mean * y dominates shape.
  const double root = std::sqrt(4.0 * mean * shape * y + my * my) + my;
  double x = 4.0 * mean * mean * shape * y / (root * root);
  if (!(x > 0.0)) x = mean;
  if (uniform() * (mean + x) <= mean) return x;
  return mean * mean / x;
}

}  // namespace geoqr
