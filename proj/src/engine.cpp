#include "geoqr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace geoqr {

void McmcConfig::validate() const {
  if (iterations <= 0) throw Error("MCMC iterations must be positive");
  if (burnin < 0 || burnin >= iterations) throw Error("MCMC burn-in must lie in [0, iterations)");
  if (thin <= 0) throw Error("MCMC thinning stride must be positive");
  if (stored_count() == 0) throw Error("MCMC schedule stores no draws");
}

void ModelSpec::validate(const Dataset& d) const {
  if (!(quantile > 0.0 && quantile < 1.0)) throw Error("quantile must lie strictly inside (0, 1)");
  mcmc.validate();
  auto need = [&](const std::string& col, const char* role) {
    if (!d.has(col)) throw Error(std::string(role) + " column '" + col + "' not found in dataset");
  };
  need(response, "response");
  std::set<std::string> used{response};
  for (const auto& c : linear) {
    need(c, "linear term");
    if (!used.insert(c).second) throw Error("column '" + c + "' used twice in the model");
  }
  for (const auto& s : smooth) {
    need(s.covariate, "smooth term");
    if (!used.insert(s.covariate).second) throw Error("column '" + s.covariate + "' used twice in the model");
    if (s.basis_size <= s.degree) throw Error("smooth term '" + s.covariate + "' needs basis_size > degree");
    if (s.penalty_order < 1 || s.basis_size <= s.penalty_order) {
      throw Error("smooth term '" + s.covariate + "' needs basis_size > penalty order >= 1");
    }
  }
  if (spatial) need(spatial->region_column, "spatial");
  auto positive = [](const Hyperprior& h, const std::string& what) {
    if (!(h.a > 0.0 && h.b > 0.0)) throw Error("hyperprior for " + what + " needs a, b > 0");
  };
  positive(scale_prior, "sigma");
  for (const auto& s : smooth) positive(s.prior, s.covariate);
  if (spatial) positive(spatial->prior, "spatial effect");
}

double check_loss(double u, double tau) { return u >= 0.0 ? u * tau : u * (tau - 1.0); }

double ald_logdensity(double y, double eta, double sigma, double tau) {
  if (!(sigma > 0.0)) throw Error("asymmetric Laplace scale must be positive");
  return std::log(tau * (1.0 - tau) / sigma) - check_loss(y - eta, tau) / sigma;
}

double sample_latent_weight(double residual, double sigma, double tau, Rng& rng) {
  if (!std::isfinite(residual)) throw Error("latent weight: non-finite residual");
  const MixtureConstants mc(tau);
  const double chi = std::max(residual * residual / (mc.kappa2 * sigma), 1e-10);
  const double psi = mc.xi * mc.xi / (mc.kappa2 * sigma) + 2.0 / sigma;
  const double v = rng.inverse_gaussian(std::sqrt(psi / chi), psi);
  return std::max(1.0 / v, std::numeric_limits<double>::min());
}

Summary summarize(std::span<const double> draws) {
  if (draws.empty()) throw Error("cannot summarize an empty set of draws");
  if (draws.size() < 2) throw Error("summaries need at least two draws");
  std::vector<double> s(draws.begin(), draws.end());
  Summary out;
  out.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  std::sort(s.begin(), s.end());
  out.lower = sample_quantile_sorted(s, 0.025);
  out.upper = sample_quantile_sorted(s, 0.975);
  out.significant = out.lower > 0.0 || out.upper < 0.0;
  return out;
}

double FitResult::response_scale() const {
  return scaling.contains(spec.response) ? scaling.at(spec.response).sd : 1.0;
}

double FitResult::fraction_below() const {
  std::size_t below = 0;
  for (Eigen::Index i = 0; i < response.size(); ++i) {
    if (response[i] < mean_predictor[i]) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(response.size());
}

namespace {

// Compact local-support representation of a B-spline design matrix.
struct SparseBasisRows {
  int width = 0;
  std::vector<int> first;
  std::vector<double> values;  // n x width

  SparseBasisRows(std::span<const double> x, const SplineBasis& basis) : width(basis.degree + 1) {
    first.resize(x.size());
    values.resize(x.size() * static_cast<std::size_t>(width));
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto row = evaluate(basis, x[i]);
      first[i] = row.first;
      std::copy(row.values.begin(), row.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * width));
    }
  }

  double apply(std::size_t i, const Eigen::VectorXd& gamma) const {
    const double* v = &values[i * width];
    double s = 0.0;
    for (int k = 0; k < width; ++k) s += v[k] * gamma[first[i] + k];
    return s;
  }
};

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Cholesky with one retry after a small diagonal jitter.
Eigen::LLT<Eigen::MatrixXd> factor_dense(Eigen::MatrixXd& p, const char* block) {
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() == Eigen::Success) return llt;
  p.diagonal().array() += 1e-8;
  llt.compute(p);
  if (llt.info() != Eigen::Success) {
    throw Error(std::string("precision of block '") + block + "' is not positive definite after jitter");
  }
  return llt;
}

template <class Noise>
Eigen::VectorXd draw_dense(Eigen::MatrixXd& p, const Eigen::VectorXd& b, Noise&& noise, const char* block) {
  auto llt = factor_dense(p, block);
  Eigen::VectorXd z(p.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = noise();
  return llt.solve(b) + llt.matrixU().solve(z);
}

struct SmoothState {
  SplineBasis basis;
  SparseBasisRows rows;
  Eigen::MatrixXd penalty;
  int rank = 0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd f;
  double variance = 1.0;
};

}  // namespace

FitResult fit(const Dataset& data, const std::optional<RegionGraph>& graph, const ModelSpec& spec) {
  spec.validate(data);
  if (spec.spatial && !graph) throw Error("spatial term requested without a region graph");

  FitResult out;
  out.spec = spec;

  Dataset d = data;
  if (spec.standardize) {
    std::vector<std::string> cols{spec.response};
    cols.insert(cols.end(), spec.linear.begin(), spec.linear.end());
    for (const auto& s : spec.smooth) cols.push_back(s.covariate);
    auto st = standardize(data, cols);
    d = std::move(st.data);
    out.scaling = std::move(st.report);
  }

  const double tau = spec.quantile;
  const MixtureConstants mc(tau);
  const std::size_t n = d.rows();
  const auto ni = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd y = to_vector(d.column(spec.response));

  // Linear block: intercept plus named covariates.
  const auto p = static_cast<Eigen::Index>(spec.linear.size() + 1);
  Eigen::MatrixXd x(ni, p);
  x.col(0).setOnes();
  out.linear_names.push_back("const");
  for (std::size_t j = 0; j < spec.linear.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j + 1)) = to_vector(d.column(spec.linear[j]));
    out.linear_names.push_back(spec.linear[j]);
  }
  if (ni < p) throw Error("fewer observations than linear coefficients");

  std::vector<SmoothState> smooth;
  for (const auto& term : spec.smooth) {
    auto col = d.column(term.covariate);
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (!(*lo < *hi)) throw Error("smooth covariate '" + term.covariate + "' is constant");
    auto basis = knot_sequence(*lo, *hi, term.basis_size, term.degree);
    SparseBasisRows rows(col, basis);
    smooth.push_back(SmoothState{basis, std::move(rows), difference_penalty(term.basis_size, term.penalty_order),
                                 term.basis_size - term.penalty_order, Eigen::VectorXd::Zero(term.basis_size),
                                 Eigen::VectorXd::Zero(ni), 1.0});
  }

  // Spatial block.
  std::vector<std::size_t> region_of;
  GmrfPrecision gmrf;
  std::vector<std::size_t> component_of;
  Eigen::VectorXd s_eff, s_obs = Eigen::VectorXd::Zero(ni);
  double s_var = 1.0;
  Eigen::SparseMatrix<double> s_prec;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> s_factor;
  std::vector<double> comp_obs_share;
  bool s_jitter = false;
  if (spec.spatial) {
    auto col = d.column(spec.spatial->region_column);
    region_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto label = std::to_string(static_cast<long long>(col[i]));
      auto idx = graph->find(label);
      if (!idx) throw Error("region '" + label + "' of observation " + std::to_string(i) + " is not in the graph");
      region_of[i] = *idx;
    }
    gmrf = precision_matrix(*graph);
    component_of.resize(gmrf.dimension);
    for (std::size_t c = 0; c < gmrf.components.size(); ++c) {
      for (auto r : gmrf.components[c]) component_of[r] = c;
    }
    comp_obs_share.assign(gmrf.components.size(), 0.0);
    for (auto r : region_of) comp_obs_share[component_of[r]] += 1.0 / static_cast<double>(n);
    s_eff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gmrf.dimension));
    s_prec = gmrf.Q;
    s_factor.analyzePattern(s_prec);
  }

  // Initial state.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = sample_quantile(d.column(spec.response), tau);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(ni);
  double sigma = 1.0;
  Eigen::VectorXd lin = x * beta;

  Rng rng(spec.mcmc.seed);
  auto noise = [&rng] { return rng.normal(); };

  const std::size_t stored = spec.mcmc.stored_count();
  out.linear.resize(static_cast<Eigen::Index>(stored), p);
  out.sigma.reserve(stored);
  out.deviance.reserve(stored);
  for (std::size_t k = 0; k < smooth.size(); ++k) {
    SmoothFit sf;
    sf.term = spec.smooth[k];
    sf.basis = smooth[k].basis;
    sf.penalty = smooth[k].penalty;
    sf.coefficients.resize(static_cast<Eigen::Index>(stored), smooth[k].basis.m);
    sf.variance.reserve(stored);
    out.smooth.push_back(std::move(sf));
  }
  if (spec.spatial) {
    out.spatial = SpatialFit{*spec.spatial, *graph,
                             Eigen::MatrixXd(static_cast<Eigen::Index>(stored), static_cast<Eigen::Index>(gmrf.dimension)),
                             {}, region_of};
    out.spatial->variance.reserve(stored);
  }
  out.mean_predictor = Eigen::VectorXd::Zero(ni);

  Eigen::VectorXd eta(ni), weight(ni), pseudo(ni), target(ni);
  auto current_eta = [&] {
    eta = lin;
    for (const auto& s : smooth) eta += s.f;
    if (spec.spatial) eta += s_obs;
  };
  current_eta();

  std::size_t slot = 0;
  for (int it = 0; it < spec.mcmc.iterations; ++it) {
    // (1) latent exponential weights
    for (Eigen::Index i = 0; i < ni; ++i) {
      w[i] = sample_latent_weight(y[i] - eta[i], sigma, tau, rng);
      weight[i] = 1.0 / (mc.kappa2 * sigma * w[i]);
      pseudo[i] = y[i] - mc.xi * w[i];
    }

    // (2) linear block, flat prior
    {
      target = pseudo - (eta - lin);
      Eigen::MatrixXd prec = x.transpose() * weight.asDiagonal() * x;
      Eigen::VectorXd b = x.transpose() * weight.cwiseProduct(target);
      beta = draw_dense(prec, b, noise, "linear");
      Eigen::VectorXd lin_new = x * beta;
      eta += lin_new - lin;
      lin = std::move(lin_new);
    }

    // smooth blocks with random-walk prior, centred at the observations
    for (auto& s : smooth) {
      const int m = s.basis.m;
      const int width = s.rows.width;
      Eigen::MatrixXd prec = s.penalty / s.variance;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double wi = weight[ii];
        const double zi = pseudo[ii] - (eta[ii] - s.f[ii]);
        const double* v = &s.rows.values[i * width];
        const int f0 = s.rows.first[i];
        for (int a = 0; a < width; ++a) {
          b[f0 + a] += wi * v[a] * zi;
          for (int c = 0; c < width; ++c) prec(f0 + a, f0 + c) += wi * v[a] * v[c];
        }
      }
      s.gamma = draw_dense(prec, b, noise, "smooth");
      Eigen::VectorXd f_new(ni);
      for (std::size_t i = 0; i < n; ++i) f_new[static_cast<Eigen::Index>(i)] = s.rows.apply(i, s.gamma);
      // B rows sum to one, so shifting gamma shifts f by the same constant.
      const double level = f_new.mean();
      s.gamma.array() -= level;
      f_new.array() -= level;
      beta[0] += level;
      lin.array() += level;
      eta += f_new - s.f;
      eta.array() += level;
      s.f = std::move(f_new);
    }

    // spatial block with intrinsic GMRF prior, centred per component
    if (spec.spatial) {
      const auto r = static_cast<Eigen::Index>(gmrf.dimension);
      Eigen::VectorXd diag = Eigen::VectorXd::Zero(r), b = Eigen::VectorXd::Zero(r);
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto ri = static_cast<Eigen::Index>(region_of[i]);
        diag[ri] += weight[ii];
        b[ri] += weight[ii] * (pseudo[ii] - (eta[ii] - s_obs[ii]));
      }
      s_prec = gmrf.Q / s_var;
      for (Eigen::Index k = 0; k < r; ++k) s_prec.coeffRef(k, k) += diag[k] + (s_jitter ? 1e-8 : 0.0);
      s_factor.factorize(s_prec);
      if (s_factor.info() != Eigen::Success && !s_jitter) {
        s_jitter = true;
        for (Eigen::Index k = 0; k < r; ++k) s_prec.coeffRef(k, k) += 1e-8;
        s_factor.factorize(s_prec);
      }
      if (s_factor.info() != Eigen::Success) {
        throw Error("precision of the spatial block is not positive definite after jitter");
      }
      s_eff = sample_gaussian_block(s_factor, b, noise);
      double shift = 0.0;
      for (std::size_t c = 0; c < gmrf.components.size(); ++c) {
        const auto& comp = gmrf.components[c];
        double level = 0.0;
        for (auto k : comp) level += s_eff[static_cast<Eigen::Index>(k)];
        level /= static_cast<double>(comp.size());
        for (auto k : comp) s_eff[static_cast<Eigen::Index>(k)] -= level;
        shift += comp_obs_share[c] * level;
      }
      beta[0] += shift;
      lin.array() += shift;
      Eigen::VectorXd obs_new(ni);
      for (std::size_t i = 0; i < n; ++i) {
        obs_new[static_cast<Eigen::Index>(i)] = s_eff[static_cast<Eigen::Index>(region_of[i])];
      }
      eta = lin;
      for (const auto& s : smooth) eta += s.f;
      eta += obs_new;
      s_obs = std::move(obs_new);
    }

    // (4) variance parameters
    for (std::size_t k = 0; k < smooth.size(); ++k) {
      auto& s = smooth[k];
      const auto& h = spec.smooth[k].prior;
      const double quad = s.gamma.dot(s.penalty * s.gamma);
      s.variance = rng.inverse_gamma(h.a + 0.5 * s.rank, h.b + 0.5 * quad);
    }
    if (spec.spatial) {
      const auto& h = spec.spatial->prior;
      const double quad = s_eff.dot(gmrf.Q * s_eff);
      const double shape = h.a + 0.5 * static_cast<double>(gmrf.rank());
      s_var = rng.inverse_gamma(shape, h.b + 0.5 * quad);
    }

    // (5) asymmetric Laplace scale
    {
      double sum_w = 0.0, sum_sq = 0.0;
      for (Eigen::Index i = 0; i < ni; ++i) {
        const double e = pseudo[i] - eta[i];
        sum_w += w[i];
        sum_sq += e * e / (2.0 * mc.kappa2 * w[i]);
      }
      sigma = rng.inverse_gamma(spec.scale_prior.a + 1.5 * static_cast<double>(n),
                                spec.scale_prior.b + sum_w + sum_sq);
    }

    if (it >= spec.mcmc.burnin && (it - spec.mcmc.burnin + 1) % spec.mcmc.thin == 0 && slot < stored) {
      const auto row = static_cast<Eigen::Index>(slot);
      out.linear.row(row) = beta.transpose();
      out.sigma.push_back(sigma);
      double dev = 0.0;
      for (Eigen::Index i = 0; i < ni; ++i) dev += ald_logdensity(y[i], eta[i], sigma, tau);
      out.deviance.push_back(-2.0 * dev);
      for (std::size_t k = 0; k < smooth.size(); ++k) {
        out.smooth[k].coefficients.row(row) = smooth[k].gamma.transpose();
        out.smooth[k].variance.push_back(smooth[k].variance);
      }
      if (spec.spatial) {
        out.spatial->effects.row(row) = s_eff.transpose();
        out.spatial->variance.push_back(s_var);
      }
      out.mean_predictor += eta;
      ++slot;
    }
  }
  out.mean_predictor /= static_cast<double>(stored);
  out.response = y;
  return out;
}

std::vector<NamedSummary> coefficient_table(const FitResult& fit) {
  std::vector<NamedSummary> out;
  std::vector<double> col(fit.draws());
  for (Eigen::Index j = 0; j < fit.linear.cols(); ++j) {
    for (Eigen::Index r = 0; r < fit.linear.rows(); ++r) col[static_cast<std::size_t>(r)] = fit.linear(r, j);
    out.push_back({fit.linear_names[static_cast<std::size_t>(j)], summarize(col)});
  }
  out.push_back({"sigma", summarize(fit.sigma)});
  for (const auto& s : fit.smooth) out.push_back({"var_" + s.term.covariate, summarize(s.variance)});
  if (fit.spatial) out.push_back({"var_" + fit.spatial->term.region_column, summarize(fit.spatial->variance)});
  return out;
}

DicSummary dic(const FitResult& fit) {
  DicSummary out;
  const double draws = static_cast<double>(fit.deviance.size());
  out.mean_deviance = std::accumulate(fit.deviance.begin(), fit.deviance.end(), 0.0) / draws;
  const double sigma_bar = std::accumulate(fit.sigma.begin(), fit.sigma.end(), 0.0) / draws;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < fit.response.size(); ++i) {
    ll += ald_logdensity(fit.response[i], fit.mean_predictor[i], sigma_bar, fit.spec.quantile);
  }
  out.plugin_deviance = -2.0 * ll;
  out.pd = out.mean_deviance - out.plugin_deviance;
  out.dic = out.mean_deviance + out.pd;
  return out;
}

EffectCurve effect_curve(const FitResult& fit, const std::string& term, std::size_t grid_size) {
  auto it = std::find_if(fit.smooth.begin(), fit.smooth.end(),
                         [&](const SmoothFit& s) { return s.term.covariate == term; });
  if (it == fit.smooth.end()) throw Error("no smooth term named '" + term + "' in this fit");
  if (grid_size < 2) throw Error("effect curve needs at least two grid points");
  const auto& basis = it->basis;
  const double scale = fit.response_scale();

  EffectCurve out;
  out.term = term;
  std::vector<double> values(fit.draws());
  for (std::size_t g = 0; g < grid_size; ++g) {
    double xg = basis.x_min + (basis.x_max - basis.x_min) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
    if (g + 1 == grid_size) xg = basis.x_max;
    auto row = evaluate(basis, xg);
    for (std::size_t r = 0; r < values.size(); ++r) {
      double f = 0.0;
      for (std::size_t k = 0; k < row.values.size(); ++k) {
        f += row.values[k] * it->coefficients(static_cast<Eigen::Index>(r), row.first + static_cast<Eigen::Index>(k));
      }
      values[r] = scale * f;
    }
    auto s = summarize(values);
    out.grid.push_back(fit.scaling.to_original(term, xg));
    out.mean.push_back(s.mean);
    out.lower.push_back(s.lower);
    out.upper.push_back(s.upper);
  }
  return out;
}

std::vector<SpatialEffect> spatial_table(const FitResult& fit) {
  if (!fit.spatial) throw Error("fit has no spatial term");
  const auto& sp = *fit.spatial;
  const double scale = fit.response_scale();
  std::vector<SpatialEffect> out;
  std::vector<double> values(fit.draws());
  for (std::size_t r = 0; r < sp.graph.size(); ++r) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] = scale * sp.effects(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r));
    }
    out.push_back({sp.graph.labels()[r], summarize(values)});
  }
  return out;
}

}  // namespace geoqr
