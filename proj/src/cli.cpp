#include "geoqr/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "geoqr/descriptive.hpp"
#include "geoqr/synth.hpp"

namespace geoqr::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchemaPrefix = "# schema: geoqr/";

// Delimiter-separated table: a schema comment, then a one-line header.
class Table {
 public:
  Table(const fs::path& path, const std::string& schema, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
    out_ << kSchemaPrefix << schema << "/1\n";
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "\t" : "") << cells[k];
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Error("error while writing output table");
  }

 private:
  std::ofstream out_;
};

std::string num(double v) { return fmt::format("{}", v); }
std::string flag(bool b) { return b ? "1" : "0"; }

std::vector<std::string> summary_cells(const std::string& name, const Summary& s) {
  return {name, num(s.mean), num(s.lower), num(s.upper), flag(s.significant)};
}

std::string default_output(const std::string& command) {
  const char* root = std::getenv("GEOQR_OUTPUT_ROOT");
  return (fs::path(root && *root ? root : ".") / ("geoqr-" + command)).string();
}

void write_fit(const fs::path& dir, const FitResult& fit) {
  fs::create_directories(dir);
  {
    Table t(dir / "coefficients.tsv", "coefficients",
            {"term", "posterior_mean", "ci_lower", "ci_upper", "significant"});
    for (const auto& c : coefficient_table(fit)) t.row(summary_cells(c.name, c.summary));
    t.close();
  }
  {
    const auto d = dic(fit);
    Table t(dir / "dic.tsv", "dic",
            {"quantile", "deviance", "mean_deviance", "pd", "dic", "fraction_below"});
    t.row({num(fit.spec.quantile), num(d.plugin_deviance), num(d.mean_deviance), num(d.pd), num(d.dic),
           num(fit.fraction_below())});
    t.close();
  }
  for (const auto& s : fit.smooth) {
    const auto curve = effect_curve(fit, s.term.covariate);
    Table t(dir / ("effect_" + s.term.covariate + ".tsv"), "effect", {s.term.covariate, "mean", "lower", "upper"});
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
      t.row({num(curve.grid[g]), num(curve.mean[g]), num(curve.lower[g]), num(curve.upper[g])});
    }
    t.close();

    Table dr(dir / ("draws_smooth_" + s.term.covariate + ".tsv"), "draws-smooth", [&] {
      std::vector<std::string> h{"draw"};
      for (int j = 1; j <= s.basis.m; ++j) h.push_back("gamma" + std::to_string(j));
      return h;
    }());
    for (Eigen::Index r = 0; r < s.coefficients.rows(); ++r) {
      std::vector<std::string> cells{std::to_string(r + 1)};
      for (Eigen::Index j = 0; j < s.coefficients.cols(); ++j) cells.push_back(num(s.coefficients(r, j)));
      dr.row(cells);
    }
    dr.close();
  }
  if (fit.spatial) {
    Table t(dir / "spatial.tsv", "spatial", {"region", "posterior_mean", "ci_lower", "ci_upper", "significant"});
    for (const auto& e : spatial_table(fit)) t.row(summary_cells(e.region, e.summary));
    t.close();

    std::vector<std::string> h{"draw"};
    for (const auto& l : fit.spatial->graph.labels()) h.push_back(l);
    Table dr(dir / "draws_spatial.tsv", "draws-spatial", h);
    for (Eigen::Index r = 0; r < fit.spatial->effects.rows(); ++r) {
      std::vector<std::string> cells{std::to_string(r + 1)};
      for (Eigen::Index j = 0; j < fit.spatial->effects.cols(); ++j) cells.push_back(num(fit.spatial->effects(r, j)));
      dr.row(cells);
    }
    dr.close();
  }
  {
    std::vector<std::string> h{"draw"};
    h.insert(h.end(), fit.linear_names.begin(), fit.linear_names.end());
    h.push_back("sigma");
    for (const auto& s : fit.smooth) h.push_back("var_" + s.term.covariate);
    if (fit.spatial) h.push_back("var_" + fit.spatial->term.region_column);
    h.push_back("deviance");
    Table t(dir / "draws.tsv", "draws", h);
    for (std::size_t r = 0; r < fit.draws(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      std::vector<std::string> cells{std::to_string(r + 1)};
      for (Eigen::Index j = 0; j < fit.linear.cols(); ++j) cells.push_back(num(fit.linear(ri, j)));
      cells.push_back(num(fit.sigma[r]));
      for (const auto& s : fit.smooth) cells.push_back(num(s.variance[r]));
      if (fit.spatial) cells.push_back(num(fit.spatial->variance[r]));
      cells.push_back(num(fit.deviance[r]));
      t.row(cells);
    }
    t.close();
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Reads the body rows of a geoqr table, skipping the schema line.
std::vector<std::map<std::string, std::string>> read_table(const fs::path& path, const std::string& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind(std::string(kSchemaPrefix) + schema + "/", 0) != 0) {
    throw Error("'" + path.string() + "' is not a geoqr " + schema + " table");
  }
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) header.push_back(cell);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; std::getline(ss, cell, '\t'); ++k) {
      if (k < header.size()) row[header[k]] = cell;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string quantile_dir(double tau) {
  const double pct = tau * 100.0;
  const double rounded = std::round(pct);
  if (std::abs(pct - rounded) < 1e-9) return fmt::format("q{}", static_cast<long long>(rounded));
  auto s = fmt::format("q{}", pct);
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

void RunConfig::validate() const {
  if (data.empty()) throw Error("no dataset given");
  if (response.empty()) throw Error("no response given");
  if (quantiles.empty()) throw Error("no quantiles requested");
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    if (!(quantiles[k] > 0.0 && quantiles[k] < 1.0)) throw Error("quantiles must lie strictly inside (0, 1)");
    if (k > 0 && !(quantiles[k] > quantiles[k - 1])) throw Error("quantiles must be strictly increasing");
  }
  if (spatial && !graph) throw Error("spatial term requires a graph file");
  mcmc.validate();
}

ModelSpec RunConfig::model(double quantile, std::size_t index) const {
  ModelSpec spec;
  spec.response = response;
  spec.linear = linear;
  for (const auto& s : smooth) {
    SmoothTerm t;
    t.covariate = s;
    t.basis_size = basis_size;
    spec.smooth.push_back(t);
  }
  if (spatial) spec.spatial = SpatialTerm{*spatial, {}};
  spec.quantile = quantile;
  spec.mcmc = mcmc;
  spec.mcmc.seed = mcmc.seed + index;
  spec.standardize = standardize;
  return spec;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  RunConfig c;
  auto list = [&](const char* key, std::vector<std::string>& dst) {
    if (!j.contains(key)) return;
    if (j[key].is_string()) {
      dst = split_list(j[key].get<std::string>());
    } else {
      dst = j[key].get<std::vector<std::string>>();
    }
  };
  try {
    if (j.contains("data")) c.data = j["data"].get<std::string>();
    if (j.contains("graph")) c.graph = j["graph"].get<std::string>();
    if (j.contains("response")) c.response = j["response"].get<std::string>();
    list("linear", c.linear);
    list("smooth", c.smooth);
    if (j.contains("spatial")) c.spatial = j["spatial"].get<std::string>();
    if (j.contains("quantiles")) c.quantiles = j["quantiles"].get<std::vector<double>>();
    if (j.contains("iterations")) c.mcmc.iterations = j["iterations"].get<int>();
    if (j.contains("burnin")) c.mcmc.burnin = j["burnin"].get<int>();
    if (j.contains("thin")) c.mcmc.thin = j["thin"].get<int>();
    if (j.contains("seed")) c.mcmc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("basis_size")) c.basis_size = j["basis_size"].get<int>();
    if (j.contains("standardize")) c.standardize = j["standardize"].get<bool>();
    if (j.contains("out")) c.output = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  return c;
}

std::vector<std::string> cmd_fit(const RunConfig& config) {
  config.validate();
  const auto data = read_raw_file(config.data).data;
  const Dataset d = config.spatial ? data.with_region_column(*config.spatial) : data;
  std::optional<RegionGraph> graph;
  if (config.graph) graph = parse_gra_file(*config.graph);

  const fs::path root = config.output.empty() ? default_output("fit") : config.output;
  const fs::path staging = root / ".staging";
  fs::remove_all(staging);
  fs::create_directories(staging);
  std::vector<std::string> written;
  try {
    std::vector<std::future<FitResult>> jobs;
    for (std::size_t k = 0; k < config.quantiles.size(); ++k) {
      const auto spec = config.model(config.quantiles[k], k);
      spec.validate(d);
      jobs.push_back(std::async(std::launch::async, [&d, &graph, spec] { return fit(d, graph, spec); }));
    }
    std::vector<FitResult> fits;
    std::exception_ptr failure;
    for (auto& j : jobs) {
      try {
        fits.push_back(j.get());
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& f : fits) write_fit(staging / quantile_dir(f.spec.quantile), f);
    for (const auto& f : fits) {
      const auto name = quantile_dir(f.spec.quantile);
      fs::remove_all(root / name);
      fs::rename(staging / name, root / name);
      written.push_back((root / name).string());
    }
    fs::remove_all(staging);
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  return written;
}

void cmd_compare(const std::vector<std::string>& result_dirs, std::ostream& out) {
  if (result_dirs.size() < 2) throw Error("compare needs at least two result sets");
  struct Row {
    double deviance, mean_deviance, pd, dic;
  };
  std::vector<std::string> models;
  std::vector<std::map<double, Row>> results;
  for (const auto& dir : result_dirs) {
    if (!fs::is_directory(dir)) throw Error("'" + dir + "' is not a result directory");
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "dic.tsv")) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty()) throw Error("no quantile results under '" + dir + "'");
    std::map<double, Row> rows;
    for (const auto& sub : subdirs) {
      for (const auto& r : read_table(sub / "dic.tsv", "dic")) {
        rows[std::stod(r.at("quantile"))] = {std::stod(r.at("deviance")), std::stod(r.at("mean_deviance")),
                                             std::stod(r.at("pd")), std::stod(r.at("dic"))};
      }
    }
    if (!results.empty()) {
      const bool same = std::equal(rows.begin(), rows.end(), results.front().begin(), results.front().end(),
                                   [](const auto& a, const auto& b) { return a.first == b.first; });
      if (!same) throw Error("result sets were fitted at different quantiles");
    }
    results.push_back(std::move(rows));

    const auto norm = fs::path(dir).lexically_normal();
    std::string name = (norm.filename().empty() ? norm.parent_path() : norm).filename().string();
    const auto base = name;
    for (int k = 2; std::find(models.begin(), models.end(), name) != models.end(); ++k) {
      name = base + "#" + std::to_string(k);
    }
    models.push_back(name);
  }

  out << kSchemaPrefix << "compare/1\n";
  out << "quantile";
  for (const auto& m : models) out << '\t' << m << ".deviance\t" << m << ".mean_deviance\t" << m << ".pd\t" << m << ".dic";
  out << "\tpreferred\tdelta_dic\n";
  for (const auto& [q, first] : results.front()) {
    out << num(q);
    std::size_t best = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& r = results[k].at(q);
      out << '\t' << num(r.deviance) << '\t' << num(r.mean_deviance) << '\t' << num(r.pd) << '\t' << num(r.dic);
      if (r.dic < results[best].at(q).dic) best = k;
    }
    // margin of the preferred model over the runner-up
    double runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < results.size(); ++k) {
      if (k != best) runner_up = std::min(runner_up, results[k].at(q).dic);
    }
    out << '\t' << models[best] << '\t' << num(runner_up - results[best].at(q).dic) << '\n';
  }
}

void cmd_simulate(const SimulateConfig& config) {
  Scenario s = [&] {
    switch (config.scenario) {
      case 'A': return scenario_a_linear(config.n, config.seed);
      case 'B': return scenario_b_smooth(config.n, config.seed);
      case 'C': return scenario_c_spatial(config.grid_side, config.per_region, config.seed);
    }
    throw Error(std::string("unknown scenario '") + config.scenario + "' (expected A, B or C)");
  }();
  const fs::path root = config.output.empty() ? default_output("simulate") : config.output;
  fs::create_directories(root);
  write_raw_file((root / "data.raw").string(), s.data);
  if (s.graph) write_gra_file((root / "graph.gra").string(), *s.graph);
  std::ofstream truth(root / "truth.tsv");
  if (!truth) throw Error("cannot write truth file");
  write_truth(truth, s);
}

void cmd_describe(const DescribeConfig& config) {
  const auto d = read_raw_file(config.data).data;
  if (!d.has(config.response)) throw Error("response column '" + config.response + "' not found");
  std::vector<std::string> vars = config.columns;
  if (vars.empty()) {
    for (const auto& nm : d.names()) {
      if (config.stratifier && nm == *config.stratifier) continue;
      if (config.region && nm == *config.region) continue;
      vars.push_back(nm);
    }
  }
  for (const auto& v : vars) {
    if (!d.has(v)) throw Error("column '" + v + "' not found");
  }
  const fs::path root = config.output.empty() ? default_output("describe") : config.output;
  fs::create_directories(root);

  // Median / IQR overall and per stratum with Wilcoxon p-values.
  {
    std::vector<std::string> header{"variable", "median", "iqr"};
    std::vector<double> levels;
    std::vector<std::vector<std::size_t>> strata;
    if (config.stratifier) {
      auto s = d.column(*config.stratifier);
      std::set<double> distinct(s.begin(), s.end());
      if (distinct.size() != 2) throw Error("stratifier '" + *config.stratifier + "' must take exactly two values");
      levels.assign(distinct.begin(), distinct.end());
      strata.resize(2);
      for (std::size_t i = 0; i < s.size(); ++i) strata[s[i] == levels[0] ? 0 : 1].push_back(i);
      for (double l : levels) {
        header.push_back(fmt::format("median_{}={}", *config.stratifier, l));
        header.push_back(fmt::format("iqr_{}={}", *config.stratifier, l));
      }
      header.push_back("wilcoxon_p");
    }
    Table t(root / "summary.tsv", "descriptive", header);
    for (const auto& v : vars) {
      auto col = d.column(v);
      const auto all = median_iqr(col);
      std::vector<std::string> cells{v, num(all.median), num(all.iqr())};
      if (config.stratifier) {
        std::vector<std::vector<double>> groups(2);
        for (int g = 0; g < 2; ++g) {
          for (auto i : strata[g]) groups[g].push_back(col[i]);
          const auto m = median_iqr(groups[g]);
          cells.push_back(num(m.median));
          cells.push_back(num(m.iqr()));
        }
        cells.push_back(num(wilcoxon_rank_sum(groups[0], groups[1]).p_value));
      }
      t.row(cells);
    }
    t.close();
  }

  // Spearman rho above the diagonal, p-values below.
  if (vars.size() >= 2) {
    const auto cm = correlation_matrix(d, vars);
    std::vector<std::string> header{"variable"};
    header.insert(header.end(), vars.begin(), vars.end());
    Table t(root / "correlations.tsv", "correlations", header);
    for (Eigen::Index i = 0; i < cm.rho.rows(); ++i) {
      std::vector<std::string> cells{vars[static_cast<std::size_t>(i)]};
      for (Eigen::Index j = 0; j < cm.rho.cols(); ++j) {
        cells.push_back(i == j ? "1" : (i < j ? num(cm.rho(i, j)) : num(cm.p_value(i, j))));
      }
      t.row(cells);
    }
    t.close();
  }

  // Response bands, and per-band exposure relationships.
  const auto y = d.column(config.response);
  const auto bands = quantile_bands(y, config.low_q, config.high_q);
  {
    Table t(root / "bands.tsv", "bands", {"row", config.response, "band"});
    for (std::size_t i = 0; i < y.size(); ++i) t.row({std::to_string(i + 1), num(y[i]), band_name(bands[i])});
    t.close();
  }
  if (config.exposure) {
    const auto x = d.column(*config.exposure);
    Table lw(root / "lowess.tsv", "lowess", {"band", *config.exposure, config.response, "fitted"});
    Table bc(root / "band_correlations.tsv", "band-correlations", {"band", "n", "rho", "p_value"});
    for (Band b : {Band::Low, Band::Mid, Band::High}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (bands[i] == b) idx.push_back(i);
      }
      std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j] || (x[i] == x[j] && i < j); });
      std::vector<double> bx, by;
      for (auto i : idx) {
        bx.push_back(x[i]);
        by.push_back(y[i]);
      }
      if (bx.size() >= 2) {
        const auto fitted = lowess(bx, by, config.lowess_span, config.lowess_iters);
        for (std::size_t k = 0; k < bx.size(); ++k) lw.row({band_name(b), num(bx[k]), num(by[k]), num(fitted[k])});
      }
      if (bx.size() >= 3) {
        try {
          const auto c = spearman(bx, by);
          bc.row({band_name(b), std::to_string(bx.size()), num(c.rho), num(c.p_value)});
        } catch (const Error&) {
          bc.row({band_name(b), std::to_string(bx.size()), "NA", "NA"});
        }
      }
    }
    lw.close();
    bc.close();
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian geoadditive quantile regression"};
  app.require_subcommand(1);

  DescribeConfig dc;
  std::string dc_columns;
  auto* describe = app.add_subcommand("describe", "Descriptive statistics, correlations, bands and smoothers");
  describe->add_option("--data", dc.data, "Dataset file")->required();
  describe->add_option("--response", dc.response, "Response column")->required();
  describe->add_option("--columns", dc_columns, "Comma-separated variables to summarise");
  describe->add_option("--stratifier", dc.stratifier, "Binary column splitting the summary table");
  describe->add_option("--exposure", dc.exposure, "Exposure column for per-band smoothers");
  describe->add_option("--region", dc.region, "Region column excluded from summaries");
  describe->add_option("--low", dc.low_q, "Low band quantile");
  describe->add_option("--high", dc.high_q, "High band quantile");
  describe->add_option("--span", dc.lowess_span, "LOWESS span");
  describe->add_option("--robustness-iters", dc.lowess_iters, "LOWESS robustness iterations");
  describe->add_option("--out", dc.output, "Output directory");

  RunConfig rc;
  std::string config_path, linear, smooth, quantiles;
  auto* fitcmd = app.add_subcommand("fit", "Fit the quantile regression at each requested quantile");
  fitcmd->add_option("--config", config_path, "JSON config; flags override its values");
  auto* o_data = fitcmd->add_option("--data", rc.data, "Dataset file");
  auto* o_graph = fitcmd->add_option("--graph", rc.graph, "Region graph (.gra)");
  auto* o_resp = fitcmd->add_option("--response", rc.response, "Response column");
  auto* o_lin = fitcmd->add_option("--linear", linear, "Comma-separated linear terms");
  auto* o_smooth = fitcmd->add_option("--smooth", smooth, "Comma-separated P-spline terms");
  auto* o_spatial = fitcmd->add_option("--spatial", rc.spatial, "Region column for the spatial effect");
  auto* o_q = fitcmd->add_option("--quantiles", quantiles, "Comma-separated quantiles");
  auto* o_it = fitcmd->add_option("--iterations", rc.mcmc.iterations, "Total MCMC iterations");
  auto* o_burn = fitcmd->add_option("--burnin", rc.mcmc.burnin, "Burn-in iterations");
  auto* o_thin = fitcmd->add_option("--thin", rc.mcmc.thin, "Thinning stride");
  auto* o_seed = fitcmd->add_option("--seed", rc.mcmc.seed, "Base random seed");
  auto* o_basis = fitcmd->add_option("--basis-size", rc.basis_size, "B-spline basis functions per smooth term");
  bool raw_scale = false;
  auto* o_raw = fitcmd->add_flag("--no-standardize", raw_scale, "Fit on the raw data scale");
  auto* o_out = fitcmd->add_option("--out", rc.output, "Output root");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Compare DIC across result sets");
  compare->add_option("results", compare_dirs, "Result directories written by fit")->required()->expected(2, -1);
  compare->add_option("--out", compare_out, "Write the table to this file instead of stdout");

  SimulateConfig sc;
  std::string scenario;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic scenario with its truth");
  simulate->add_option("--scenario", scenario, "A (linear), B (smooth) or C (spatial)")->required();
  simulate->add_option("--n", sc.n, "Observations (A, B)");
  simulate->add_option("--grid-side", sc.grid_side, "Lattice side (C)");
  simulate->add_option("--per-region", sc.per_region, "Observations per region (C)");
  simulate->add_option("--seed", sc.seed, "Random seed");
  simulate->add_option("--out", sc.output, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*describe) {
      dc.columns = split_list(dc_columns);
      cmd_describe(dc);
    } else if (*fitcmd) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (o_data->count()) cfg.data = rc.data;
      if (o_graph->count()) cfg.graph = rc.graph;
      if (o_resp->count()) cfg.response = rc.response;
      if (o_lin->count()) cfg.linear = split_list(linear);
      if (o_smooth->count()) cfg.smooth = split_list(smooth);
      if (o_spatial->count()) cfg.spatial = rc.spatial;
      if (o_q->count()) {
        cfg.quantiles.clear();
        for (const auto& q : split_list(quantiles)) cfg.quantiles.push_back(std::stod(q));
      }
      if (o_it->count()) cfg.mcmc.iterations = rc.mcmc.iterations;
      if (o_burn->count()) cfg.mcmc.burnin = rc.mcmc.burnin;
      if (o_thin->count()) cfg.mcmc.thin = rc.mcmc.thin;
      if (o_seed->count()) cfg.mcmc.seed = rc.mcmc.seed;
      if (o_basis->count()) cfg.basis_size = rc.basis_size;
      if (o_raw->count()) cfg.standardize = !raw_scale;
      if (o_out->count()) cfg.output = rc.output;
      for (const auto& dir : cmd_fit(cfg)) out << dir << '\n';
    } else if (*compare) {
      if (compare_out.empty()) {
        cmd_compare(compare_dirs, out);
      } else {
        std::ostringstream table;
        cmd_compare(compare_dirs, table);
        std::ofstream f(compare_out);
        if (!f) throw Error("cannot write '" + compare_out + "'");
        f << table.str();
      }
    } else if (*simulate) {
      if (scenario.size() != 1) throw Error("unknown scenario '" + scenario + "' (expected A, B or C)");
      sc.scenario = static_cast<char>(std::toupper(static_cast<unsigned char>(scenario[0])));
      cmd_simulate(sc);
    }
  } catch (const std::exception& e) {
    err << "geoqr: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace geoqr::cli
