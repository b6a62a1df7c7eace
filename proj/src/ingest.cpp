#include "geoqr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "geoqr/error.hpp"

namespace geoqr {

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                 std::optional<std::string> region_column)
    : names_(std::move(names)), columns_(std::move(columns)), region_column_(std::move(region_column)) {
  if (names_.empty()) throw Error("dataset has no columns");
  if (names_.size() != columns_.size()) throw Error("dataset: name/column count mismatch");
  std::set<std::string> seen;
  for (const auto& nm : names_) {
    if (!seen.insert(nm).second) throw Error("duplicate column name '" + nm + "'");
  }
  rows_ = columns_.front().size();
  if (rows_ == 0) throw Error("dataset has no rows");
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != rows_) throw Error("column '" + names_[j] + "' has a different length");
    for (double v : columns_[j]) {
      if (!std::isfinite(v)) throw Error("column '" + names_[j] + "' contains a non-finite value");
    }
  }
  if (region_column_) {
    auto col = column(*region_column_);
    for (double v : col) {
      if (v != std::round(v)) {
        throw Error("region column '" + *region_column_ + "' holds a non-integer value");
      }
    }
  }
}

bool Dataset::has(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dataset::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> Dataset::column(const std::string& name) const {
  return columns_[index_of(name)];
}

Dataset Dataset::with_region_column(std::string name) const {
  return Dataset(names_, columns_, std::move(name));
}

Dataset Dataset::with_column(const std::string& name, std::vector<double> values) const {
  auto names = names_;
  auto cols = columns_;
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    names.push_back(name);
    cols.push_back(std::move(values));
  } else {
    cols[static_cast<std::size_t>(it - names.begin())] = std::move(values);
  }
  return Dataset(std::move(names), std::move(cols), region_column_);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t r : rows) cols[j].push_back(columns_[j].at(r));
  }
  return Dataset(names_, std::move(cols), region_column_);
}

namespace {

bool is_missing(const std::string& tok) { return tok.empty() || tok == "." || tok == "NA"; }

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \r\n\v\f");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \r\n\v\f");
  return s.substr(b, e - b + 1);
}

// Tab-separated files may carry empty fields; anything else splits on runs
// of whitespace.
std::vector<std::string> split(const std::string& line, bool tabbed) {
  std::vector<std::string> out;
  if (tabbed) {
    std::size_t start = 0;
    while (true) {
      auto pos = line.find('\t', start);
      out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

RawRead read_raw(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) break;
  }
  if (lineno == 0 || blank(line)) throw ParseError("missing header", lineno == 0 ? 1 : lineno);
  const bool tabbed = line.find('\t') != std::string::npos;
  auto header = split(line, tabbed);
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (h.empty()) throw ParseError("empty column name in header", lineno);
      if (!seen.insert(h).second) throw ParseError("duplicate column name '" + h + "'", lineno);
    }
  }

  std::vector<std::vector<double>> cols(header.size());
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto toks = split(line, tabbed);
    if (toks.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(toks.size()),
                       lineno);
    }
    if (std::any_of(toks.begin(), toks.end(), is_missing)) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < toks.size(); ++j) {
      const auto& t = toks[j];
      double v = 0.0;
      const char* first = t.data();
      if (!t.empty() && t.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ParseError("invalid numeric token '" + t + "' in column '" + header[j] + "'", lineno);
      }
      cols[j].push_back(v);
    }
  }
  if (cols.front().empty()) throw Error("no data rows left after dropping missing values");
  return RawRead{Dataset(std::move(header), std::move(cols)), dropped};
}

RawRead read_raw_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  return read_raw(in);
}

void write_raw(std::ostream& out, const Dataset& d) {
  for (std::size_t j = 0; j < d.cols(); ++j) out << (j ? " " : "") << d.names()[j];
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d.column(j)[i]);
      (void)ec;
      if (j) out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void write_raw_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  write_raw(out, d);
}

const ColumnScale& StandardizationReport::at(const std::string& col) const {
  auto it = scales.find(col);
  if (it == scales.end()) throw Error("column '" + col + "' was not standardized");
  return it->second;
}

double StandardizationReport::to_original(const std::string& col, double z) const {
  auto it = scales.find(col);
  return it == scales.end() ? z : it->second.mean + it->second.sd * z;
}

double StandardizationReport::to_standard(const std::string& col, double x) const {
  auto it = scales.find(col);
  return it == scales.end() ? x : (x - it->second.mean) / it->second.sd;
}

Standardized standardize(const Dataset& d, const std::vector<std::string>& cols) {
  StandardizationReport report;
  Dataset out = d;
  for (const auto& name : cols) {
    if (report.contains(name)) continue;
    auto x = d.column(name);
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) throw Error("column '" + name + "' needs at least two rows to standardize");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw Error("column '" + name + "' is constant and cannot be standardized");
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
    out = out.with_column(name, std::move(z));
    report.scales[name] = ColumnScale{mean, sd};
    report.transformed.push_back(name);
  }
  return Standardized{std::move(out), std::move(report)};
}

Dataset destandardize(const Dataset& d, const StandardizationReport& report) {
  Dataset out = d;
  for (const auto& name : report.transformed) {
    const auto& s = report.at(name);
    auto z = d.column(name);
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = s.mean + s.sd * z[i];
    out = out.with_column(name, std::move(x));
  }
  return out;
}

double sample_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double sample_quantile(std::span<const double> values, double p) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return sample_quantile_sorted(s, p);
}

const char* band_name(Band b) {
  switch (b) {
    case Band::Low: return "LOW";
    case Band::Mid: return "MID";
    case Band::High: return "HIGH";
  }
  return "?";
}

std::vector<Band> quantile_bands(std::span<const double> values, double low_q, double high_q) {
  if (!(0.0 < low_q && low_q < high_q && high_q < 1.0)) {
    throw Error("quantile bands need 0 < low_q < high_q < 1");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("quantile bands: non-finite value");
  }
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double lo = sample_quantile_sorted(s, low_q);
  const double hi = sample_quantile_sorted(s, high_q);
  if (lo == hi) throw Error("quantile bands: degenerate spread, low and high cut points coincide");
  std::vector<Band> out;
  out.reserve(values.size());
  for (double v : values) {
    out.push_back(v <= lo ? Band::Low : (v >= hi ? Band::High : Band::Mid));
  }
  return out;
}

}  // namespace geoqr
