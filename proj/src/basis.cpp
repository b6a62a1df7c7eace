#include "geoqr/basis.hpp"

#include <cmath>
#include <string>

#include "geoqr/error.hpp"

namespace geoqr {

SplineBasis knot_sequence(double x_min, double x_max, int m, int degree) {
  if (!(x_min < x_max)) throw Error("spline basis needs x_min < x_max");
  if (degree < 0) throw Error("spline degree must be non-negative");
  if (m <= degree) throw Error("spline basis needs more basis functions than its degree");
  SplineBasis b;
  b.degree = degree;
  b.m = m;
  b.x_min = x_min;
  b.x_max = x_max;
  const double h = b.spacing();
  b.knots.resize(m + degree + 1);
  for (int k = 0; k < m + degree + 1; ++k) b.knots[k] = x_min + (k - degree) * h;
  // Pin the domain ends so range checks against the data are exact.
  b.knots[degree] = x_min;
  b.knots[m] = x_max;
  return b;
}

BasisRow evaluate(const SplineBasis& basis, double x) {
  if (!basis.contains(x)) {
    throw Error("value " + std::to_string(x) + " outside spline domain [" + std::to_string(basis.x_min) + ", " +
                std::to_string(basis.x_max) + "]");
  }
  const int p = basis.degree;
  const double* t = basis.knots.data();
  // Half-open spans [t_s, t_{s+1}); the last span is closed at x_max.
  int s = p + static_cast<int>(std::floor((x - basis.x_min) / basis.spacing()));
  if (s > basis.m - 1) s = basis.m - 1;
  if (s < p) s = p;
  while (s > p && x < t[s]) --s;
  while (s < basis.m - 1 && x >= t[s + 1]) ++s;

  // Triangular Cox-de Boor recursion over the p+1 active functions.
  std::vector<double> n(p + 1, 0.0), left(p + 1, 0.0), right(p + 1, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[s + 1 - j];
    right[j] = t[s + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return BasisRow{s - p, std::move(n)};
}

Eigen::MatrixXd design_matrix(std::span<const double> x, const SplineBasis& basis) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), basis.m);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!basis.contains(x[i])) {
      throw Error("observation " + std::to_string(i) + " (x = " + std::to_string(x[i]) +
                  ") lies outside the spline domain");
    }
    auto row = evaluate(basis, x[i]);
    for (std::size_t k = 0; k < row.values.size(); ++k) {
      out(static_cast<Eigen::Index>(i), row.first + static_cast<Eigen::Index>(k)) = row.values[k];
    }
  }
  return out;
}

Eigen::MatrixXd difference_operator(int m, int order) {
  if (order < 1) throw Error("difference order must be at least 1");
  if (m <= order) throw Error("difference penalty needs m > order");
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(m, m);
  for (int k = 0; k < order; ++k) {
    const auto rows = d.rows() - 1;
    d = (d.bottomRows(rows) - d.topRows(rows)).eval();
  }
  return d;
}

Eigen::MatrixXd difference_penalty(int m, int order) {
  Eigen::MatrixXd d = difference_operator(m, order);
  return d.transpose() * d;
}

}  // namespace geoqr
