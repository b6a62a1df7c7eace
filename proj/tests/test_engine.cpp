#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geoqr/engine.hpp"
#include "geoqr/synth.hpp"

using namespace geoqr;

namespace {

McmcConfig short_run(std::uint64_t seed = 58581) {
  McmcConfig c;
  c.iterations = 6000;
  c.burnin = 1000;
  c.thin = 5;
  c.seed = seed;
  return c;
}

Dataset normal_response(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> y(n);
  for (auto& v : y) v = rng.normal();
  return Dataset({"y"}, {y});
}

// Mean of GIG(1/2, chi, psi) by quadrature of its unnormalised density
// on a log grid.
double gig_mean_by_quadrature(double chi, double psi) {
  double num = 0.0, den = 0.0;
  const double lo = -40.0, hi = 40.0;
  const int steps = 400000;
  const double h = (hi - lo) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double t = lo + k * h;
    const double w = std::exp(t);
    // density in w times dw/dt = w
    const double g = std::pow(w, -0.5) * std::exp(-0.5 * (chi / w + psi * w)) * w;
    const double c = (k == 0 || k == steps) ? 0.5 : 1.0;
    num += c * g * w;
    den += c * g;
  }
  return num / den;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, j);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

TEST_CASE("check_loss") {
  CHECK(check_loss(1.0, 0.5) == 0.5);
  CHECK(check_loss(-1.0, 0.15) == doctest::Approx(0.85));
  CHECK(check_loss(0.0, 0.3) == 0.0);
  CHECK(check_loss(0.0, 0.9) == 0.0);
}

TEST_CASE("ald_logdensity") {
  CHECK(ald_logdensity(1.0, 1.0, 1.0, 0.5) == doctest::Approx(std::log(0.25)));
  CHECK(ald_logdensity(3.0, 1.0, 1.0, 0.5) == doctest::Approx(-2.386294361119891));
  CHECK(ald_logdensity(1.0, 0.0, 2.0, 0.15) == doctest::Approx(-2.8277860949436016));
  CHECK_THROWS_AS(ald_logdensity(0.0, 0.0, 0.0, 0.5), Error);
  CHECK_THROWS_AS(ald_logdensity(0.0, 0.0, -1.0, 0.5), Error);
}

TEST_CASE("ALD integrates to one and puts mass tau below zero") {
  for (double tau : {0.15, 0.5, 0.85}) {
    double total = 0.0, below = 0.0;
    const double h = 1e-3;
    for (double u = -60.0; u <= 60.0; u += h) {
      const double d = std::exp(ald_logdensity(u, 0.0, 1.3, tau)) * h;
      total += d;
      if (u < 0) below += d;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(below == doctest::Approx(tau).epsilon(2e-3));
  }
}

TEST_CASE("latent weight draws match the GIG mean from quadrature") {
  struct Case {
    double residual, sigma, tau;
  };
  for (auto c : {Case{0.7, 1.0, 0.5}, Case{-1.5, 0.6, 0.15}, Case{0.2, 2.0, 0.85}}) {
    const MixtureConstants mc(c.tau);
    const double chi = c.residual * c.residual / (mc.kappa2 * c.sigma);
    const double psi = mc.xi * mc.xi / (mc.kappa2 * c.sigma) + 2.0 / c.sigma;
    const double oracle = gig_mean_by_quadrature(chi, psi);
    // closed form for lambda = 1/2: sqrt(chi/psi) (1 + 1/sqrt(chi psi))
    CHECK(oracle == doctest::Approx(std::sqrt(chi / psi) * (1.0 + 1.0 / std::sqrt(chi * psi))).epsilon(1e-6));

    Rng rng(404);
    double sum = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const double w = sample_latent_weight(c.residual, c.sigma, c.tau, rng);
      REQUIRE(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum / n / oracle - 1.0) < 0.02);
  }
}

TEST_CASE("latent weight: determinism, zero residual, bad input") {
  Rng a(9), b(9);
  CHECK(sample_latent_weight(0.3, 1.0, 0.5, a) == sample_latent_weight(0.3, 1.0, 0.5, b));
  Rng r(10);
  for (int k = 0; k < 1000; ++k) {
    const double w = sample_latent_weight(0.0, 1.0, 0.15, r);
    REQUIRE(std::isfinite(w));
    REQUIRE(w > 0.0);
  }
  CHECK_THROWS_AS(sample_latent_weight(std::nan(""), 1.0, 0.5, r), Error);
}

TEST_CASE("mixture representation reproduces the ALD quantile") {
  const double tau = 0.15, sigma = 1.0;
  const MixtureConstants mc(tau);
  Rng rng(31337);
  std::vector<double> e(100000);
  for (auto& v : e) {
    const double w = sigma * rng.exponential();
    v = mc.xi * w + std::sqrt(mc.kappa2 * sigma * w) * rng.normal();
  }
  CHECK(std::abs(sample_quantile(e, tau)) <= 0.02);
}

TEST_CASE("Gaussian block sampler") {
  SUBCASE("identity precision gives standard normals") {
    Rng rng(1);
    auto noise = [&] { return rng.normal(); };
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    const int n = 100000;
    for (int k = 0; k < n; ++k) sum += sample_gaussian_block(p, b, noise);
    CHECK((sum / n).cwiseAbs().maxCoeff() < 0.02);
  }
  SUBCASE("univariate case") {
    Rng rng(2);
    auto noise = [&] { return rng.normal(); };
    Eigen::MatrixXd p(1, 1);
    p << 4.0;
    Eigen::VectorXd b(1);
    b << 8.0;
    std::vector<double> d(100000);
    for (auto& v : d) v = sample_gaussian_block(p, b, noise)[0];
    CHECK(mean_of(d) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(sd_of(d) == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("zero noise returns the mean") {
    Eigen::MatrixXd p(2, 2);
    p << 3, 1, 1, 2;
    Eigen::VectorXd b(2);
    b << 1, -1;
    auto zero = [] { return 0.0; };
    Eigen::VectorXd x = sample_gaussian_block(p, b, zero);
    CHECK((p * x - b).norm() < 1e-12);

    Eigen::SparseMatrix<double> sp = p.sparseView();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> f(sp);
    CHECK((p * sample_gaussian_block(f, b, zero) - b).norm() < 1e-12);
  }
  SUBCASE("sparse sampler covariance matches the inverse precision") {
    Eigen::MatrixXd p(3, 3);
    p << 4, -1, 0, -1, 3, -1, 0, -1, 2;
    Eigen::SparseMatrix<double> sp = p.sparseView();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> f(sp);
    Rng rng(3);
    auto noise = [&] { return rng.normal(); };
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd x = sample_gaussian_block(f, b, noise);
      cov += x * x.transpose();
    }
    cov /= n;
    CHECK((cov - p.inverse()).cwiseAbs().maxCoeff() < 0.01);
  }
  SUBCASE("non-positive-definite precision is reported") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
    auto zero = [] { return 0.0; };
    CHECK_THROWS_WITH(sample_gaussian_block(p, Eigen::VectorXd::Zero(2), zero), doctest::Contains("jitter"));
  }
}

TEST_CASE("summarize") {
  auto s = summarize(std::vector<double>(10, 1.0));
  CHECK(s.mean == 1.0);
  CHECK(s.lower == 1.0);
  CHECK(s.upper == 1.0);
  CHECK(s.significant);

  std::vector<double> sym;
  for (int k = -100; k <= 100; ++k) sym.push_back(k / 100.0);
  CHECK_FALSE(summarize(sym).significant);

  // 1..1000 mapped onto [-0.02, 0.98]
  std::vector<double> ramp;
  for (int k = 1; k <= 1000; ++k) ramp.push_back(-0.02 + (k - 1) / 999.0);
  auto r = summarize(ramp);
  // h = 999 * 0.025 + 1 = 25.975: the 2.5% point is 0.005, just above zero
  CHECK(r.lower == doctest::Approx(-0.02 + 24.975 / 999.0));
  CHECK(r.lower > 0.0);
  CHECK(r.significant);

  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("McmcConfig") {
  McmcConfig c;
  CHECK(c.stored_count() == 1000);
  c.burnin = c.iterations;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("fit: intercept-only model recovers the sample quantile") {
  {
    auto d = normal_response(500, 21);
    ModelSpec m;
    m.response = "y";
    m.quantile = 0.5;
    m.standardize = false;
    m.mcmc = short_run();
    auto f = fit(d, std::nullopt, m);
    CHECK(std::abs(coefficient_table(f)[0].summary.mean - sample_quantile(d.column("y"), 0.5)) < 0.15);
  }
  {
    auto d = normal_response(1000, 22);
    ModelSpec m;
    m.response = "y";
    m.quantile = 0.85;
    m.standardize = false;
    m.mcmc = short_run();
    auto f = fit(d, std::nullopt, m);
    CHECK(std::abs(coefficient_table(f)[0].summary.mean - sample_quantile(d.column("y"), 0.85)) < 0.15);
  }
}

TEST_CASE("fit: default schedule stores 1000 draws") {
  auto d = normal_response(100, 23);
  ModelSpec m;
  m.response = "y";
  auto f = fit(d, std::nullopt, m);
  CHECK(f.draws() == 1000);
  CHECK(f.linear.rows() == 1000);
  CHECK(f.deviance.size() == 1000);
}

TEST_CASE("fit: seeds reproduce bit-identical draws") {
  auto s = scenario_b_smooth(200, 4);
  ModelSpec m;
  m.response = "y";
  m.smooth = {SmoothTerm{"x"}};
  m.mcmc = short_run(77);
  auto a = fit(s.data, std::nullopt, m);
  auto b = fit(s.data, std::nullopt, m);
  CHECK(a.linear == b.linear);
  CHECK(a.sigma == b.sigma);
  CHECK(a.smooth[0].coefficients == b.smooth[0].coefficients);
  CHECK(a.deviance == b.deviance);
  m.mcmc.seed = 78;
  auto c = fit(s.data, std::nullopt, m);
  CHECK(c.sigma != a.sigma);
}

TEST_CASE("fit: positivity and centring invariants") {
  auto s = scenario_c_spatial(4, 13, 8);
  auto b = scenario_b_smooth(s.data.rows(), 8);
  auto d = s.data.with_column("x", std::vector<double>(b.data.column("x").begin(), b.data.column("x").end()));
  ModelSpec m;
  m.response = "y";
  m.smooth = {SmoothTerm{"x"}};
  m.spatial = SpatialTerm{"region"};
  m.mcmc = short_run();
  auto f = fit(d, s.graph, m);
  for (double v : f.sigma) CHECK(v > 0.0);
  for (double v : f.smooth[0].variance) CHECK(v > 0.0);
  for (double v : f.spatial->variance) CHECK(v > 0.0);

  // fitted smooth values average to zero over the observations
  const auto xs = d.column("x");
  std::vector<double> xz(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xz[i] = f.scaling.to_standard("x", xs[i]);
  Eigen::MatrixXd design = design_matrix(xz, f.smooth[0].basis);
  for (Eigen::Index r = 0; r < f.smooth[0].coefficients.rows(); ++r) {
    Eigen::VectorXd fv = design * f.smooth[0].coefficients.row(r).transpose();
    CHECK(std::abs(fv.mean()) <= 1e-8);
    CHECK(std::abs(f.spatial->effects.row(r).mean()) <= 1e-8);
  }
}

TEST_CASE("fit: per-component centring with an island and an isolated region") {
  // 4x4 lattice (labels 1..16) plus a two-region island and a lone region
  auto lat = rook_lattice(4);
  std::vector<std::string> labels = lat.labels();
  std::vector<std::vector<std::size_t>> adj;
  for (std::size_t i = 0; i < lat.size(); ++i) adj.push_back(lat.neighbors(i));
  labels.insert(labels.end(), {"17", "18", "19"});
  adj.push_back({17});
  adj.push_back({16});
  adj.push_back({});
  RegionGraph g(labels, adj);

  Rng rng(5);
  std::vector<double> y, region;
  for (int r = 1; r <= 18; ++r) {  // region 19 has no observations
    for (int k = 0; k < 6; ++k) {
      region.push_back(r);
      y.push_back((r > 16 ? 2.0 : 0.0) + rng.normal());
    }
  }
  Dataset d({"y", "region"}, {y, region}, std::string("region"));
  ModelSpec m;
  m.response = "y";
  m.spatial = SpatialTerm{"region"};
  m.mcmc = short_run();
  auto f = fit(d, g, m);
  const auto comps = connected_components(g);
  REQUIRE(comps.size() == 3);
  for (Eigen::Index r = 0; r < f.spatial->effects.rows(); ++r) {
    for (const auto& c : comps) {
      double s = 0;
      for (auto k : c) s += f.spatial->effects(r, static_cast<Eigen::Index>(k));
      CHECK(std::abs(s / c.size()) <= 1e-8);
    }
  }
  auto table = spatial_table(f);
  CHECK(table.size() == 19);
  CHECK(table[18].summary.mean == 0.0);
}

TEST_CASE("fit: input errors") {
  auto s = scenario_c_spatial(4, 5, 1);
  ModelSpec m;
  m.response = "y";
  m.spatial = SpatialTerm{"region"};
  m.mcmc = short_run();
  CHECK_THROWS_AS(fit(s.data, std::nullopt, m), Error);
  CHECK_THROWS_WITH(fit(s.data, rook_lattice(3), m), doctest::Contains("not in the graph"));
  m.spatial.reset();
  m.quantile = 1.0;
  CHECK_THROWS_AS(fit(s.data, std::nullopt, m), Error);
  m.quantile = 0.5;
  m.linear = {"nope"};
  CHECK_THROWS_AS(fit(s.data, std::nullopt, m), Error);
}

TEST_CASE("fit: flat-prior slope agrees with the brute-force check-loss minimiser") {
  auto s = scenario_a_linear(300, 12);
  const auto y = s.data.column("y");
  const auto x = s.data.column("x");
  // For fixed slope the best intercept is the median of y - b x.
  auto loss_at = [&](double b) {
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - b * x[i];
    const double a = sample_quantile(r, 0.5);
    double l = 0;
    for (double v : r) l += check_loss(v - a, 0.5);
    return l;
  };
  double best = 0, best_loss = 1e300;
  for (double b = 0.0; b <= 4.0; b += 1e-3) {
    const double l = loss_at(b);
    if (l < best_loss) best_loss = l, best = b;
  }

  ModelSpec m;
  m.response = "y";
  m.linear = {"x"};
  m.standardize = false;
  m.mcmc = short_run();
  auto f = fit(s.data, std::nullopt, m);
  const auto slope = column(f.linear, 1);
  CHECK(std::abs(mean_of(slope) - best) <= 3.0 * sd_of(slope));
}

TEST_CASE("fit: posterior spread agrees with a random-walk Metropolis sampler") {
  auto s = scenario_a_linear(200, 1000);
  const auto y = s.data.column("y");
  const auto x = s.data.column("x");
  const double tau = 0.5;
  const Hyperprior h;
  auto log_post = [&](double b0, double b1, double log_sigma) {
    const double sigma = std::exp(log_sigma);
    double lp = 0;
    for (std::size_t i = 0; i < y.size(); ++i) lp += ald_logdensity(y[i], b0 + b1 * x[i], sigma, tau);
    return lp - (h.a + 1.0) * log_sigma - h.b / sigma + log_sigma;
  };
  Rng rng(3);
  double b0 = 1, b1 = 2, ls = std::log(0.4);
  double cur = log_post(b0, b1, ls);
  std::vector<double> slopes;
  for (int it = 0; it < 300000; ++it) {
    const double n0 = b0 + 0.08 * rng.normal(), n1 = b1 + 0.14 * rng.normal(), nl = ls + 0.08 * rng.normal();
    const double p = log_post(n0, n1, nl);
    if (std::log(rng.uniform()) < p - cur) b0 = n0, b1 = n1, ls = nl, cur = p;
    if (it >= 20000 && it % 20 == 0) slopes.push_back(b1);
  }

  ModelSpec m;
  m.response = "y";
  m.linear = {"x"};
  m.standardize = false;
  m.mcmc.iterations = 22000;
  m.mcmc.burnin = 2000;
  m.mcmc.thin = 5;
  auto f = fit(s.data, std::nullopt, m);
  const auto gibbs = column(f.linear, 1);
  CHECK(mean_of(gibbs) == doctest::Approx(mean_of(slopes)).epsilon(0.02));
  CHECK(sd_of(gibbs) == doctest::Approx(sd_of(slopes)).epsilon(0.12));
}

TEST_CASE("dic") {
  SUBCASE("identical draws give pD = 0") {
    FitResult f;
    f.spec.quantile = 0.3;
    f.response = Eigen::VectorXd::LinSpaced(20, -1, 1);
    f.mean_predictor = Eigen::VectorXd::Constant(20, 0.1);
    f.sigma.assign(5, 0.7);
    double dev = 0;
    for (Eigen::Index i = 0; i < 20; ++i) dev += -2.0 * ald_logdensity(f.response[i], 0.1, 0.7, 0.3);
    f.deviance.assign(5, dev);
    auto d = dic(f);
    CHECK(d.pd == doctest::Approx(0.0).scale(dev));
    CHECK(d.dic == doctest::Approx(d.mean_deviance));
  }
  SUBCASE("pD is positive for a real chain") {
    auto s = scenario_a_linear(300, 2);
    ModelSpec m;
    m.response = "y";
    m.linear = {"x"};
    m.mcmc = short_run();
    auto d = dic(fit(s.data, std::nullopt, m));
    CHECK(d.pd > 0.0);
    CHECK(d.dic == doctest::Approx(d.mean_deviance + d.pd));
  }
}

TEST_CASE("effect_curve") {
  auto s = scenario_b_smooth(200, 6);
  ModelSpec m;
  m.response = "y";
  m.smooth = {SmoothTerm{"x"}};
  m.mcmc = short_run();
  auto f = fit(s.data, std::nullopt, m);
  auto c = effect_curve(f, "x", 50);
  REQUIRE(c.grid.size() == 50);
  auto [lo, hi] = std::minmax_element(s.data.column("x").begin(), s.data.column("x").end());
  CHECK(c.grid.front() == doctest::Approx(*lo));
  CHECK(c.grid.back() == doctest::Approx(*hi));
  for (std::size_t g = 0; g < c.grid.size(); ++g) CHECK(c.lower[g] <= c.upper[g]);
  CHECK_THROWS_AS(effect_curve(f, "nope"), Error);

  f.smooth[0].coefficients.setZero();
  auto z = effect_curve(f, "x", 20);
  for (std::size_t g = 0; g < 20; ++g) {
    CHECK(z.mean[g] == 0.0);
    CHECK(z.lower[g] == 0.0);
    CHECK(z.upper[g] == 0.0);
  }
}

TEST_CASE("spatial_table") {
  auto s = scenario_c_spatial(6, 8, 13);
  ModelSpec m;
  m.response = "y";
  m.spatial = SpatialTerm{"region"};
  m.mcmc = short_run();
  auto f = fit(s.data, s.graph, m);
  auto t = spatial_table(f);
  REQUIRE(t.size() == 36);
  std::size_t agree = 0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    CHECK(t[r].region == s.graph->labels()[r]);
    agree += (t[r].summary.mean > 0) == (s.field[r] > 0);
    std::vector<double> draws(f.draws());
    for (std::size_t k = 0; k < draws.size(); ++k) {
      draws[k] = f.response_scale() * f.spatial->effects(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r));
    }
    const auto ref = summarize(draws);
    CHECK(t[r].summary.significant == ref.significant);
    CHECK(t[r].summary.significant == (t[r].summary.lower > 0 || t[r].summary.upper < 0));
  }
  CHECK(agree >= 0.8 * t.size());

  f.spatial->effects.setZero();
  for (const auto& e : spatial_table(f)) {
    CHECK(e.summary.mean == 0.0);
    CHECK_FALSE(e.summary.significant);
  }

  ModelSpec plain;
  plain.response = "y";
  plain.mcmc = short_run();
  CHECK_THROWS_AS(spatial_table(fit(s.data, std::nullopt, plain)), Error);
}
