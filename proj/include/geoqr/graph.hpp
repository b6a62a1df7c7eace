#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace geoqr {

// Labeled regions with symmetric, sorted, self-loop-free adjacency lists.
class RegionGraph {
 public:
  RegionGraph(std::vector<std::string> labels, std::vector<std::vector<std::size_t>> adjacency);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
  std::size_t edge_count() const;
  std::optional<std::size_t> find(const std::string& label) const;

  friend bool operator==(const RegionGraph&, const RegionGraph&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// .gra adjacency file: region count, then per region its label, neighbour
// count and a line of zero-based neighbour positions.
RegionGraph parse_gra(std::istream& in);
RegionGraph parse_gra_file(const std::string& path);
void write_gra(std::ostream& out, const RegionGraph& g);
void write_gra_file(const std::string& path, const RegionGraph& g);

// Region index lists, each sorted, ordered by smallest member.
using Components = std::vector<std::vector<std::size_t>>;
Components connected_components(const RegionGraph& g);

// Intrinsic GMRF structure: Q_ii = degree, Q_ij = -1 for neighbours.
struct GmrfPrecision {
  std::size_t dimension = 0;
  Eigen::SparseMatrix<double> Q;
  Components components;

  std::size_t rank() const { return dimension - components.size(); }
};

GmrfPrecision precision_matrix(const RegionGraph& g);

}  // namespace geoqr
