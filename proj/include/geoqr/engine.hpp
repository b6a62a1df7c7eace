#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoqr/basis.hpp"
#include "geoqr/error.hpp"
#include "geoqr/graph.hpp"
#include "geoqr/ingest.hpp"
#include "geoqr/rng.hpp"

namespace geoqr {

struct McmcConfig {
  int iterations = 52000;
  int burnin = 2000;
  int thin = 50;
  std::uint64_t seed = 58581;

  std::size_t stored_count() const {
    return static_cast<std::size_t>((iterations - burnin) / thin);
  }
  void validate() const;
};

// Inverse-gamma (shape a, scale b) hyperprior on a variance parameter.
struct Hyperprior {
  double a = 0.001;
  double b = 0.001;
};

struct SmoothTerm {
  std::string covariate;
  int basis_size = 22;
  int degree = 3;
  int penalty_order = 2;
  Hyperprior prior;
};

struct SpatialTerm {
  std::string region_column;
  Hyperprior prior;
};

struct ModelSpec {
  std::string response;
  std::vector<std::string> linear;  // the intercept is always included
  std::vector<SmoothTerm> smooth;
  std::optional<SpatialTerm> spatial;
  double quantile = 0.5;
  McmcConfig mcmc;
  Hyperprior scale_prior;
  // Standardize response, linear and smooth covariates before fitting.
  bool standardize = true;

  void validate(const Dataset& d) const;
};

// Constants of the normal/exponential mixture representation of the
// asymmetric Laplace error with quantile tau.
struct MixtureConstants {
  double xi;
  double kappa2;
  explicit MixtureConstants(double tau)
      : xi((1.0 - 2.0 * tau) / (tau * (1.0 - tau))), kappa2(2.0 / (tau * (1.0 - tau))) {}
};

double check_loss(double u, double tau);
double ald_logdensity(double y, double eta, double sigma, double tau);

// Draw from GIG(1/2, chi, psi) for the latent exponential weight, through
// the reciprocal of an inverse-Gaussian variate.
double sample_latent_weight(double residual, double sigma, double tau, Rng& rng);

// Draw from N(P^{-1} b, P^{-1}) via Cholesky P = L L'. `noise()` supplies
// independent standard normals.
template <class Noise>
Eigen::VectorXd sample_gaussian_block(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear_term,
                                      Noise&& noise) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw Error("block precision is not positive definite; add diagonal jitter");
  }
  Eigen::VectorXd mean = llt.solve(linear_term);
  Eigen::VectorXd z(precision.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = noise();
  return mean + llt.matrixU().solve(z);
}

template <class Noise>
Eigen::VectorXd sample_gaussian_block(const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& factor,
                                      const Eigen::VectorXd& linear_term, Noise&& noise) {
  Eigen::VectorXd mean = factor.solve(linear_term);
  Eigen::VectorXd z(linear_term.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = noise();
  Eigen::VectorXd u = factor.matrixU().solve(z);
  return mean + factor.permutationPinv() * u;
}

struct Summary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool significant = false;
};

// Posterior mean, empirical 2.5% / 97.5% quantiles; significant when the
// interval excludes zero.
Summary summarize(std::span<const double> draws);

struct SmoothFit {
  SmoothTerm term;
  SplineBasis basis;                // on the model (possibly standardized) scale
  Eigen::MatrixXd coefficients;     // stored draws x m
  std::vector<double> variance;     // random-walk variance per stored draw
  Eigen::MatrixXd penalty;
};

struct SpatialFit {
  SpatialTerm term;
  RegionGraph graph;
  Eigen::MatrixXd effects;          // stored draws x regions
  std::vector<double> variance;
  std::vector<std::size_t> region_of;  // observation -> region index
};

struct FitResult {
  ModelSpec spec;
  StandardizationReport scaling;
  std::vector<std::string> linear_names;  // "const" first
  Eigen::MatrixXd linear;                 // stored draws x (1 + p)
  std::vector<double> sigma;
  std::vector<double> deviance;
  std::vector<SmoothFit> smooth;
  std::optional<SpatialFit> spatial;
  Eigen::VectorXd response;        // model scale
  Eigen::VectorXd mean_predictor;  // posterior mean of the linear predictor, model scale

  std::size_t draws() const { return sigma.size(); }
  double response_scale() const;
  // Share of observations lying below the posterior-mean predictor.
  double fraction_below() const;
};

FitResult fit(const Dataset& d, const std::optional<RegionGraph>& graph, const ModelSpec& spec);

struct NamedSummary {
  std::string name;
  Summary summary;
};

// Linear coefficients, sigma and variance parameters, model scale.
std::vector<NamedSummary> coefficient_table(const FitResult& fit);

struct DicSummary {
  double mean_deviance = 0.0;
  double plugin_deviance = 0.0;
  double pd = 0.0;
  double dic = 0.0;
};

DicSummary dic(const FitResult& fit);

struct EffectCurve {
  std::string term;
  std::vector<double> grid;  // original covariate scale
  std::vector<double> mean;  // response units
  std::vector<double> lower;
  std::vector<double> upper;
};

EffectCurve effect_curve(const FitResult& fit, const std::string& term, std::size_t grid_size = 100);

struct SpatialEffect {
  std::string region;
  Summary summary;  // response units
};

std::vector<SpatialEffect> spatial_table(const FitResult& fit);

}  // namespace geoqr
