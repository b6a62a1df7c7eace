#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geoqr {

// Rectangular table of named numeric columns. Immutable once built; every
// column has the same length n >= 1 and holds only finite values.
class Dataset {
 public:
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
          std::optional<std::string> region_column = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool has(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  std::span<const double> column(const std::string& name) const;
  std::span<const double> column(std::size_t j) const { return columns_.at(j); }

  const std::optional<std::string>& region_column() const noexcept { return region_column_; }
  Dataset with_region_column(std::string name) const;
  Dataset with_column(const std::string& name, std::vector<double> values) const;
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::optional<std::string> region_column_;
  std::size_t rows_ = 0;
};

struct RawRead {
  Dataset data;
  std::size_t dropped = 0;
};

// Whitespace-delimited text: header line, then one row per line. Rows with a
// missing marker (".", "NA") are dropped and counted.
RawRead read_raw(std::istream& in);
RawRead read_raw_file(const std::string& path);

// Shortest round-trip representation of every value.
void write_raw(std::ostream& out, const Dataset& d);
void write_raw_file(const std::string& path, const Dataset& d);

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

struct StandardizationReport {
  std::map<std::string, ColumnScale> scales;
  std::vector<std::string> transformed;

  bool contains(const std::string& col) const { return scales.count(col) != 0; }
  const ColumnScale& at(const std::string& col) const;
  double to_original(const std::string& col, double z) const;
  double to_standard(const std::string& col, double x) const;
};

struct Standardized {
  Dataset data;
  StandardizationReport report;
};

// (x - mean) / sd with the n-1 sample sd. Throws on a constant column.
Standardized standardize(const Dataset& d, const std::vector<std::string>& cols);
Dataset destandardize(const Dataset& d, const StandardizationReport& report);

// Linear interpolation between order statistics at h = (n-1)p + 1.
double sample_quantile(std::span<const double> values, double p);
double sample_quantile_sorted(std::span<const double> sorted, double p);

enum class Band { Low, Mid, High };
const char* band_name(Band b);

std::vector<Band> quantile_bands(std::span<const double> values, double low_q = 0.15,
                                 double high_q = 0.85);

}  // namespace geoqr
