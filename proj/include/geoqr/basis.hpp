#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace geoqr {

// Equally spaced B-spline basis. The knot vector extends `degree` knots past
// each end of [x_min, x_max] at the interior spacing, so x_min is knot
// `degree` and x_max is knot `m` (zero-based).
struct SplineBasis {
  int degree = 3;
  int m = 22;
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<double> knots;

  double spacing() const { return (x_max - x_min) / (m - degree); }
  bool contains(double x) const { return x >= x_min && x <= x_max; }
};

SplineBasis knot_sequence(double x_min, double x_max, int m = 22, int degree = 3);

// The degree+1 basis functions that can be nonzero at x, starting at index
// `first`.
struct BasisRow {
  int first = 0;
  std::vector<double> values;
};

BasisRow evaluate(const SplineBasis& basis, double x);

Eigen::MatrixXd design_matrix(std::span<const double> x, const SplineBasis& basis);

// K = D'D with D the (m - order) x m matrix of order-th forward differences.
Eigen::MatrixXd difference_penalty(int m, int order = 2);
Eigen::MatrixXd difference_operator(int m, int order = 2);

}  // namespace geoqr
