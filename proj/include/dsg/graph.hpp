#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsg/rng.hpp"

namespace dsg {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Edge {
  int u;  // u < v always
  int v;
  bool operator==(const Edge&) const = default;
};

// L/R side labels for bipartite algorithms.
struct Bipartition {
  std::vector<uint8_t> is_left;  // per vertex, 1 = L side
};

// Simple undirected graph. Edge ids are assigned in file/generation order
// and never reordered; all per-edge arrays index by edge id.
class BaseGraph {
 public:
  BaseGraph() = default;
  BaseGraph(int n, std::vector<Edge> edges);

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  // Incident edge ids of v.
  const std::vector<int>& incident(int v) const { return adj_[v]; }
  int other_endpoint(int e, int v) const {
    const Edge& ed = edges_[e];
    return ed.u == v ? ed.v : ed.u;
  }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

// Base graph plus per-edge realization probability p_e in (0, 1].
struct StochasticGraph {
  BaseGraph graph;
  std::vector<double> prob;  // by edge id
  std::optional<Bipartition> bipartition;

  void validate() const;
};

// A sampled subgraph G*: one presence bit per base edge. Immutable once
// sampled.
class Realization {
 public:
  Realization(const BaseGraph& g, std::vector<uint8_t> present)
      : present_(std::move(present)) {
    if (static_cast<int>(present_.size()) != g.m())
      throw GraphError("realization does not match base edge set");
  }
  bool present(int e) const { return present_[e] != 0; }
  int edge_count() const {
    int c = 0;
    for (uint8_t b : present_) c += b;
    return c;
  }
  const std::vector<uint8_t>& bits() const { return present_; }

 private:
  std::vector<uint8_t> present_;
};

Realization sample_realization(const StochasticGraph& sg, uint64_t seed);

// Realization with one edge forced present, all others independent.
Realization sample_realization_forced(const StochasticGraph& sg,
                                      int forced_edge, uint64_t seed);

std::vector<double> expected_degrees(const StochasticGraph& sg);
double max_expected_degree(const StochasticGraph& sg);

enum class GraphKind { erdos_renyi, random_bipartite, star, path, complete };

struct ProbModel {
  // lo == hi gives uniform_p; otherwise per-edge uniform in [lo, hi].
  double lo = 0.5;
  double hi = 0.5;
  static ProbModel uniform(double p) { return {p, p}; }
  static ProbModel range(double lo, double hi) { return {lo, hi}; }
};

struct GenParams {
  int n = 0;
  int n_right = 0;      // bipartite kinds: size of the R side
  double density = 0.5;  // erdos_renyi / random_bipartite
};

StochasticGraph generate(GraphKind kind, const GenParams& params,
                         const ProbModel& pm, uint64_t seed);

GraphKind parse_kind(const std::string& name);

StochasticGraph load_graph(const std::string& path);
void save_graph(const StochasticGraph& sg, const std::string& path);
StochasticGraph parse_graph(std::istream& in, const std::string& origin);
void write_graph(const StochasticGraph& sg, std::ostream& out);

}  // namespace dsg
