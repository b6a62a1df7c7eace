#include "geoqr/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "geoqr/error.hpp"

namespace geoqr {

RegionGraph::RegionGraph(std::vector<std::string> labels, std::vector<std::vector<std::size_t>> adjacency)
    : labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
  const std::size_t r = labels_.size();
  if (adjacency_.size() != r) throw Error("region graph: label/adjacency count mismatch");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw Error("region graph: duplicate label '" + l + "'");
  }
  for (std::size_t i = 0; i < r; ++i) {
    auto& adj = adjacency_[i];
    std::sort(adj.begin(), adj.end());
    for (std::size_t k = 0; k < adj.size(); ++k) {
      if (adj[k] >= r) {
        throw Error("region '" + labels_[i] + "': neighbour index " + std::to_string(adj[k]) + " out of range");
      }
      if (adj[k] == i) throw Error("region '" + labels_[i] + "' lists itself as a neighbour");
      if (k > 0 && adj[k] == adj[k - 1]) {
        throw Error("region '" + labels_[i] + "' lists neighbour '" + labels_[adj[k]] + "' twice");
      }
    }
  }
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j : adjacency_[i]) {
      const auto& back = adjacency_[j];
      if (!std::binary_search(back.begin(), back.end(), i)) {
        throw Error("asymmetric adjacency: '" + labels_[i] + "' lists '" + labels_[j] +
                    "' but not vice versa");
      }
    }
  }
}

std::size_t RegionGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adjacency_) twice += a.size();
  return twice / 2;
}

std::optional<std::size_t> RegionGraph::find(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t lineno = 0;

  // Next line that is not whitespace-only, trimmed.
  bool next(std::string& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      auto e = line.find_last_not_of(" \t\r");
      out = line.substr(b, e - b + 1);
      return true;
    }
    return false;
  }
};

std::size_t parse_count(const std::string& tok, std::size_t lineno, const char* what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("invalid ") + what + " '" + tok + "'", lineno);
  }
  return v;
}

}  // namespace

RegionGraph parse_gra(std::istream& in) {
  LineReader rd{in};
  std::string line;
  if (!rd.next(line)) throw ParseError("empty graph file", 1);
  const std::size_t r = parse_count(line, rd.lineno, "region count");

  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> adj;
  labels.reserve(r);
  adj.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (!rd.next(line)) {
      throw ParseError("declared " + std::to_string(r) + " regions but found " + std::to_string(i),
                       rd.lineno);
    }
    labels.push_back(line);
    if (!rd.next(line)) throw ParseError("missing neighbour count for region '" + labels.back() + "'", rd.lineno);
    const std::size_t k = parse_count(line, rd.lineno, "neighbour count");
    std::vector<std::size_t> nb;
    nb.reserve(k);
    while (nb.size() < k) {
      if (!rd.next(line)) throw ParseError("missing neighbours for region '" + labels.back() + "'", rd.lineno);
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) {
        if (nb.size() == k) {
          throw ParseError("region '" + labels.back() + "' lists more than " + std::to_string(k) + " neighbours",
                           rd.lineno);
        }
        const std::size_t j = parse_count(tok, rd.lineno, "neighbour index");
        if (j >= r) {
          throw ParseError("neighbour index " + std::to_string(j) + " out of range for " + std::to_string(r) +
                               " regions",
                           rd.lineno);
        }
        nb.push_back(j);
      }
    }
    adj.push_back(std::move(nb));
  }
  if (rd.next(line)) {
    throw ParseError("trailing content after " + std::to_string(r) + " declared regions", rd.lineno);
  }
  return RegionGraph(std::move(labels), std::move(adj));
}

RegionGraph parse_gra_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  return parse_gra(in);
}

void write_gra(std::ostream& out, const RegionGraph& g) {
  out << g.size() << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << g.labels()[i] << '\n' << g.degree(i) << '\n';
    const auto& nb = g.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) out << (k ? " " : "") << nb[k];
    out << '\n';
  }
}

void write_gra_file(const std::string& path, const RegionGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write graph file '" + path + "'");
  write_gra(out, g);
}

Components connected_components(const RegionGraph& g) {
  const std::size_t r = g.size();
  std::vector<bool> seen(r, false);
  Components out;
  for (std::size_t s = 0; s < r; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      comp.push_back(v);
      for (auto w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

GmrfPrecision precision_matrix(const RegionGraph& g) {
  const auto r = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& nb = g.neighbors(static_cast<std::size_t>(i));
    trips.emplace_back(i, i, static_cast<double>(nb.size()));
    for (auto j : nb) trips.emplace_back(i, static_cast<Eigen::Index>(j), -1.0);
  }
  GmrfPrecision p;
  p.dimension = g.size();
  p.Q.resize(r, r);
  p.Q.setFromTriplets(trips.begin(), trips.end());
  p.Q.makeCompressed();
  p.components = connected_components(g);
  return p;
}

}  // namespace geoqr
