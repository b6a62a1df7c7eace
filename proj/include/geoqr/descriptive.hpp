#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "geoqr/ingest.hpp"

namespace geoqr {

enum class TestMethod { Exact, NormalApproximation };
const char* method_name(TestMethod m);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::Exact;
};

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

// W is the rank sum of `a` in the pooled sample. Exact null distribution when
// the pooled size is at most 10 with no ties; otherwise a normal
// approximation with tie-corrected variance and continuity correction.
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
};

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of midranks; p from the t approximation on n - 2 df.
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd p_value;
};

CorrelationMatrix correlation_matrix(const Dataset& d, const std::vector<std::string>& cols);

// Cleveland's robust locally weighted linear smoother. Returns fitted values
// in the order of the input points.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double span = 2.0 / 3.0,
                           int robustness_iters = 3);

struct MedianIqr {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

MedianIqr median_iqr(std::span<const double> values);

}  // namespace geoqr
