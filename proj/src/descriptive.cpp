#include "geoqr/descriptive.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "geoqr/error.hpp"

namespace geoqr {

const char* method_name(TestMethod m) {
  return m == TestMethod::Exact ? "exact" : "normal-approximation";
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

// counts[s] = number of size-k subsets of {1..n} with rank sum s.
std::vector<double> rank_sum_counts(int n, int k) {
  const int max_sum = n * (n + 1) / 2;
  // table[j][s]: subsets of size j drawn from the ranks seen so far
  std::vector<std::vector<double>> table(k + 1, std::vector<double>(max_sum + 1, 0.0));
  table[0][0] = 1.0;
  for (int r = 1; r <= n; ++r) {
    for (int j = std::min(r, k); j >= 1; --j) {
      for (int s = max_sum; s >= r; --s) table[j][s] += table[j - 1][s - r];
    }
  }
  return table[k];
}

double normal_upper(double z) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(boost::math::complement(standard, z));
}

}  // namespace

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("Wilcoxon rank-sum test needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) throw Error("Wilcoxon rank-sum test: non-finite value");
  }
  const auto ranks = midranks(pooled);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  TestResult out;
  out.statistic = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

  // tie-group sizes
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    if (t > 1) ties = true;
    tie_term += t * t * t - t;
    i = j;
  }

  if (pooled.size() <= 10 && !ties) {
    const auto counts = rank_sum_counts(static_cast<int>(pooled.size()), static_cast<int>(a.size()));
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto w = static_cast<int>(std::lround(out.statistic));
    double le = 0.0, ge = 0.0;
    for (int s = 0; s < static_cast<int>(counts.size()); ++s) {
      if (s <= w) le += counts[s];
      if (s >= w) ge += counts[s];
    }
    out.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
    out.method = TestMethod::Exact;
    return out;
  }

  out.method = TestMethod::NormalApproximation;
  const double mean = na * (n + 1.0) / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  const double d = out.statistic - mean;
  if (!(var > 0.0) || d == 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(d) - 0.5) / std::sqrt(var);
  out.p_value = std::min(1.0, 2.0 * normal_upper(z));
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation: length mismatch");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("correlation undefined for a constant vector");
  return sxy / std::sqrt(sxx * syy);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("Spearman correlation: length mismatch");
  if (x.size() < 3) throw Error("Spearman correlation needs at least three pairs");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  Correlation out;
  out.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);
  const double df = static_cast<double>(x.size()) - 2.0;
  const double denom = 1.0 - out.rho * out.rho;
  if (denom <= 0.0) {
    out.p_value = 0.0;
    return out;
  }
  const double t = std::abs(out.rho) * std::sqrt(df / denom);
  boost::math::students_t_distribution<double> dist(df);
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  return out;
}

CorrelationMatrix correlation_matrix(const Dataset& d, const std::vector<std::string>& cols) {
  const auto k = static_cast<Eigen::Index>(cols.size());
  CorrelationMatrix out;
  out.names = cols;
  out.rho = Eigen::MatrixXd::Identity(k, k);
  out.p_value = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const auto& a = cols[static_cast<std::size_t>(i)];
      const auto& b = cols[static_cast<std::size_t>(j)];
      Correlation c;
      try {
        c = spearman(d.column(a), d.column(b));
      } catch (const Error& e) {
        throw Error("correlation of '" + a + "' and '" + b + "': " + e.what());
      }
      out.rho(i, j) = out.rho(j, i) = c.rho;
      out.p_value(i, j) = out.p_value(j, i) = c.p_value;
    }
  }
  return out;
}

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double span, int robustness_iters) {
  const std::size_t n = x.size();
  if (y.size() != n) throw Error("lowess: x and y differ in length");
  if (n < 2) throw Error("lowess needs at least two points");
  if (!(span > 0.0 && span <= 1.0)) throw Error("lowess span must lie in (0, 1]");
  if (robustness_iters < 0) throw Error("lowess robustness iterations must be non-negative");

  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n) - 1e-12)), 2, n);
  std::vector<double> fitted(n), robust(n, 1.0), dist(n), scratch(n);

  for (int pass = 0; pass <= robustness_iters; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dist[j] = std::abs(x[j] - x[i]);
      scratch = dist;
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
      const double h = scratch[k - 1];

      double sw = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double w = 0.0;
        if (h > 0.0) {
          const double u = dist[j] / h;
          if (u < 1.0) {
            const double c = 1.0 - u * u * u;
            w = c * c * c;
          }
        } else if (dist[j] == 0.0) {
          w = 1.0;
        }
        w *= robust[j];
        dist[j] = w;  // reuse as weight
        sw += w;
        sx += w * x[j];
        sy += w * y[j];
      }
      if (!(sw > 0.0)) {
        fitted[i] = y[i];
        continue;
      }
      const double xb = sx / sw, yb = sy / sw;
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        sxx += dist[j] * (x[j] - xb) * (x[j] - xb);
        sxy += dist[j] * (x[j] - xb) * (y[j] - yb);
      }
      const double range = h > 0.0 ? h : 1.0;
      fitted[i] = sxx > 1e-12 * range * range * sw ? yb + sxy / sxx * (x[i] - xb) : yb;
    }
    if (pass == robustness_iters) break;

    std::vector<double> abs_res(n);
    for (std::size_t j = 0; j < n; ++j) abs_res[j] = std::abs(y[j] - fitted[j]);
    const double s = sample_quantile(abs_res, 0.5);
    if (!(s > 1e-12 * (1.0 + std::abs(sample_quantile(y, 0.5))))) break;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = abs_res[j] / (6.0 * s);
      robust[j] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
  }
  return fitted;
}

MedianIqr median_iqr(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return MedianIqr{sample_quantile_sorted(s, 0.5), sample_quantile_sorted(s, 0.25), sample_quantile_sorted(s, 0.75)};
}

}  // namespace geoqr
