#pragma once

#include <cstdint>
#include <vector>

#include "dsg/graph.hpp"

namespace dsg {

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A graph restricted to a subset of present edges (adjacency view used by
// all oracles, built from a Realization or an arbitrary edge mask).
struct EdgeSubgraph {
  const BaseGraph* base = nullptr;
  std::vector<uint8_t> present;  // by edge id

  static EdgeSubgraph of(const BaseGraph& g) {
    return {&g, std::vector<uint8_t>(g.m(), 1)};
  }
  static EdgeSubgraph of(const BaseGraph& g, const Realization& r) {
    return {&g, r.bits()};
  }
  int n() const { return base->n(); }
  int degree(int v) const {
    int d = 0;
    for (int e : base->incident(v)) d += present[e];
    return d;
  }
};

struct OracleLimits {
  int max_vc_n = 40;
  int max_vc_m = 120;
  int max_mds_n = 24;
};

// Edge weights in [0,1] with per-vertex incident sums <= 1.
struct Matching {
  std::vector<int> edge_ids;
};

// Vertex weights in [0,1] with F_u + F_v >= 1 on every present edge.
struct FractionalVertexCover {
  std::vector<double> value;
  double total = 0.0;
};

struct MCEstimateRow {
  double mean = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
};

// Minimum-cardinality vertex cover by branch and bound (max-degree
// branching, greedy-matching lower bound). Refuses above the size guard.
std::vector<int> exact_min_vertex_cover(const EdgeSubgraph& g,
                                        const OracleLimits& limits = {});

// Maximum-cardinality matching; blossom contraction on general graphs.
// Deterministic: vertices scanned in id order.
Matching max_matching(const EdgeSubgraph& g);

// Matched partner per vertex (-1 if unmatched) for a matching.
std::vector<int> matching_partners(const EdgeSubgraph& g, const Matching& m);

// Minimum dominating set by branch and bound over undominated vertices.
std::vector<int> exact_min_dominating_set(const EdgeSubgraph& g,
                                          const OracleLimits& limits = {});

// Half-integral optimum via the bipartite double cover plus a Koenig
// minimum vertex cover.
FractionalVertexCover optimal_fractional_vertex_cover(const EdgeSubgraph& g);

struct ConditionalF {
  // f[2e] = f-hat_{vu} for v = edge(e).u, f[2e+1] for v = edge(e).v
  std::vector<double> f;
  long trials = 0;
  double of(int edge, bool u_side) const { return f[2 * edge + (u_side ? 0 : 1)]; }
};

// Paired Monte-Carlo estimate of f_{vu} = E[F_v | vu realized]. Both
// directed estimates of an edge use the same trial set, so
// f_{vu} + f_{uv} >= 1 holds exactly.
ConditionalF estimate_conditional_f(const StochasticGraph& sg, long trials,
                                    uint64_t master_seed);

struct MatchMarginals {
  std::vector<double> vertex;      // c_v
  std::vector<double> edge;        // Pr(e in M(G*))
  double expected_matching = 0.0;  // E-hat[|M(G*)|]
  long trials = 0;
};

MatchMarginals estimate_match_marginals(const StochasticGraph& sg, long trials,
                                        uint64_t master_seed);

struct TailIdentity {
  double lhs;  // E[X * 1_{X >= l}]
  double rhs;  // sum_{l' >= l} Pr(X > l') + l * Pr(X >= l)
};

// Both sides of the tail-expectation identity on an empirical distribution
// of non-negative integers.
TailIdentity tail_expectation_check(const std::vector<long>& samples, long ell);

}  // namespace dsg
