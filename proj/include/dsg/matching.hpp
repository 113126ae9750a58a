#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/oracles.hpp"

namespace dsg {

// ---------------------------------------------------------------------------
// Two-round constant-approximation matching
// ---------------------------------------------------------------------------

struct SideAssignment {
  std::vector<uint8_t> active;  // per vertex
  double alpha = 0.0;
};

// Each vertex is active independently with probability alpha; coins come
// from the per-run shared stream so every node derives the same labels.
SideAssignment assign_sides(const StochasticGraph& sg, double alpha,
                            uint64_t shared_seed);

// Bipartite variant: the left side is active, the right side passive.
SideAssignment bipartite_sides(const StochasticGraph& sg);

// Vertex v's private full-graph sample: edges from v to passive vertices
// copy the truth (from v's realized incident list), every other edge is
// drawn independently with probability p_e from v's private stream.
std::vector<uint8_t> hallucinate(
    const StochasticGraph& sg, int v, const SideAssignment& sides,
    const std::vector<std::pair<int, int>>& realized_incident,
    uint64_t stream_seed);

// Expected-ratio curve 2(1 - a)(1 - e^{-a}) and its numeric maximizer.
double two_round_ratio(double alpha);
double optimal_alpha();

// Two metered rounds of 1-bit messages: active vertices hallucinate, run
// the deterministic matching oracle on the hallucination, and propose to
// their matched partner if that edge is realized and the partner passive;
// passive vertices accept the lowest-id proposer. Output per vertex: the
// matched partner id, or -1.
class TwoRoundMatchingProtocol : public Protocol {
 public:
  // alpha-random sides
  TwoRoundMatchingProtocol(const StochasticGraph& sg, double alpha);
  // bipartition sides (L active)
  explicit TwoRoundMatchingProtocol(const StochasticGraph& sg);
  std::unique_ptr<NodeProgram> make_node(int v) const override;

 private:
  const StochasticGraph& sg_;
  double alpha_;  // < 0 means bipartite mode
};

// Recover edge ids from partner-id outputs; each matched pair must be
// mutual and span a realized (and allowed, if given) edge.
Matching matching_from_partners(const BaseGraph& g,
                                const std::vector<double>& outputs,
                                const Realization& realization,
                                const std::vector<uint8_t>* allowed = nullptr);

// ---------------------------------------------------------------------------
// Poly(1/eps)-round pipeline on uniform-probability graphs
// ---------------------------------------------------------------------------

// Greedy edge retention in seeded-random order subject to both endpoints'
// residual degree caps. Returns an edge mask with max degree <= cap.
std::vector<uint8_t> degree_cap_sparsifier(const StochasticGraph& sg, int cap,
                                           uint64_t seed);

struct PrunedInstance {
  std::vector<uint8_t> q_star;   // realized sparsifier edges
  std::vector<uint8_t> v_bad;    // deg_{Q*}(v) >= theta
  std::vector<uint8_t> induced;  // q_star minus edges touching v_bad
  double theta = 0.0;
};

PrunedInstance prune_high_degree(const BaseGraph& g,
                                 const std::vector<uint8_t>& q_mask,
                                 const Realization& realization, double theta);

// Fixed round schedule of the distributed matching protocol; depends only
// on the degree bound and delta, never on n or the realization.
struct MatchingSchedule {
  int phases = 0;            // propose/accept/confirm phases, 3 rounds each
  int stages = 0;            // augmenting stages j = 1..stages
  int attempts_per_stage = 0;
  static MatchingSchedule make(int max_degree, double delta, int c = 4);
  int stage_rounds(int j) const { return attempts_per_stage * (4 * j + 4); }
  int total_rounds() const;
};

// Randomized greedy maximal matching (propose / accept / confirm phases)
// followed by token-passing elimination of short augmenting paths, all on
// a fixed schedule. Runs on the realized edges selected by `allowed`.
// Output per vertex: matched partner id, or -1.
class DistributedMatchingProtocol : public Protocol {
 public:
  DistributedMatchingProtocol(const StochasticGraph& sg,
                              std::vector<uint8_t> allowed, int max_degree,
                              double delta, int c = 4);
  std::unique_ptr<NodeProgram> make_node(int v) const override;
  int payload_bit_budget(const StochasticGraph& sg) const override;
  const MatchingSchedule& schedule() const { return schedule_; }

 private:
  const StochasticGraph& sg_;
  std::vector<uint8_t> allowed_;
  MatchingSchedule schedule_;
};

struct PolyEpsParams {
  double theta = 0.0;  // 0: default 1/eps^10
  int cap = 0;         // 0: default ceil(c_a / (eps^5 p))
  double c_a = 8.0;    // sparsifier cap constant
  int c = 4;           // matching phase count constant
};

struct PolyEpsResult {
  Matching matching;
  RunTrace trace;
  std::vector<uint8_t> q_mask;
  PrunedInstance pruned;
  int cap = 0;
  double theta = 0.0;
};

// Requires uniform p and eps in (0, 1/2): sparsify to cap = ceil(c_a /
// (eps^5 p)), drop realized-degree >= theta vertices, then run the
// distributed matching with delta = eps / 2 and degree bound theta.
PolyEpsResult matching_polyeps_pipeline(const StochasticGraph& sg, double eps,
                                        const PolyEpsParams& params,
                                        const Realization& realization,
                                        uint64_t seed);

bool is_valid_matching(const BaseGraph& g, const Realization& realization,
                       const Matching& m,
                       const std::vector<uint8_t>* allowed = nullptr);

}  // namespace dsg
