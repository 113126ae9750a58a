#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"

namespace dsg {

// Greedy expected-coverage ranking computed in preprocessing.
struct Ranking {
  std::vector<int> order;        // order[i] = vertex ranked i (0-based rank)
  std::vector<int> rank_of;      // inverse permutation
  std::vector<double> w_tilde;   // expected new coverage of order[i] at step i
};

// Step i picks the vertex maximizing
//   w~_i(v) = prod_{w in N(v) cap V_{i-1}} (1 - p_vw)
//           + sum_{u in N(v) \ V_{i-1}} p_uv * prod_{w in N(u) cap V_{i-1}} (1 - p_uw)
// among unranked vertices, ties to the smaller id. The per-vertex
// uncovered probabilities are maintained incrementally, O(n*m) total.
Ranking rank_vertices(const StochasticGraph& sg);

// One round of 1-bit messages: every vertex selects the minimum-rank member
// of its realized closed neighborhood and informs it (self-selection sends
// nothing). Output per vertex: 1.0 if selected into the dominating set.
class MdsProtocol : public Protocol {
 public:
  MdsProtocol(const StochasticGraph& sg, const Ranking& ranking);
  std::unique_ptr<NodeProgram> make_node(int v) const override;

 private:
  const StochasticGraph& sg_;
  const Ranking& ranking_;
};

bool dominates(const BaseGraph& g, const Realization& realization,
               const std::vector<uint8_t>& in_set);

struct MdsDiagnosticsConfig {
  double bad_log_factor = 8.0;   // natural-log term in the bad threshold
  double bad_divisor = 4.0;
  double costly_factor = 6.0;    // base-2 log term in the costly threshold
};

struct MdsDiagnostics {
  std::vector<double> w_realized;  // w_i(v_i) per rank
  std::vector<uint8_t> bad;        // w_i(v_i) < (w~_i(v_i) - 8 ln D) / 4
  std::vector<uint8_t> costly;     // exists i' < i with
                                   // w_i'(v_i) > 6 (ceil(w~_i'(v_i')) + log2 D)
  std::vector<int> nu;             // smallest witnessing i' (0-based), else -1
  double delta_bar = 0.0;          // max expected degree actually used
  bool delta_clamped = false;      // true when clamped up to e
};

// Replays the ranking over a realization: cover time c_u = smallest rank
// whose closed realized neighborhood contains u; w_i(v) counts members of
// N_{G*}[v] with cover time >= i. Coverage sets are disjoint across ranks.
MdsDiagnostics classify_bad_costly(const StochasticGraph& sg,
                                   const Ranking& ranking,
                                   const Realization& realization,
                                   const MdsDiagnosticsConfig& cfg = {});

}  // namespace dsg
