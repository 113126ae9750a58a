#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/oracles.hpp"

namespace dsg {

// ---------------------------------------------------------------------------
// Zero-round constant-approximation vertex cover
// ---------------------------------------------------------------------------

// Each edge belongs to exactly one endpoint, the one responsible for
// covering it if realized.
struct EdgeAssociation {
  std::vector<uint8_t> owner_is_u;  // by edge id
  std::vector<std::vector<int>> owned;  // per vertex: owned edge ids

  int owner(const BaseGraph& g, int e) const {
    return owner_is_u[e] ? g.edge(e).u : g.edge(e).v;
  }
};

// Edge uv goes to the endpoint with the larger conditional cover estimate;
// ties break to the smaller vertex id.
EdgeAssociation build_edge_association(const StochasticGraph& sg,
                                       const ConditionalF& f);

// Pr(v in C) = 1 - prod_{e in E_v} (1 - p_e).
double cover_probability_closed_form(const StochasticGraph& sg,
                                     const EdgeAssociation& assoc, int v);

// Zero-communication protocol: v joins the cover iff one of its owned
// edges is realized. Output per vertex: 1.0 if in C.
class NoCommVcProtocol : public Protocol {
 public:
  NoCommVcProtocol(const StochasticGraph& sg, EdgeAssociation assoc);
  std::unique_ptr<NodeProgram> make_node(int v) const override;
  const EdgeAssociation& association() const { return assoc_; }

 private:
  const StochasticGraph& sg_;
  EdgeAssociation assoc_;
};

// ---------------------------------------------------------------------------
// Ordering-based cover and its sequential matching diagnostic
// ---------------------------------------------------------------------------

// C = vertices with at least one realized neighbor later in the ordering.
// Zero communication given the ordering.
std::vector<int> ordering_cover(const StochasticGraph& sg,
                                const std::vector<int>& order,
                                const Realization& realization);

// Closed form E[|C|] = sum_i R_i with R_i = 1 - prod over later neighbors
// of (1 - p).
double ordering_cover_expectation(const StochasticGraph& sg,
                                  const std::vector<int>& order);

struct SequentialMatchingResult {
  Matching matching;
  std::vector<uint8_t> matched_left;   // matched to an earlier vertex
  std::vector<uint8_t> matched_right;  // matched to a later vertex
};

// The sequential random matching process: scan the ordering; an unmatched
// vertex matches a uniformly random unmatched realized later neighbor.
SequentialMatchingResult sequential_random_matching(
    const StochasticGraph& sg, const std::vector<int>& order,
    const Realization& realization, uint64_t seed);

// Default ordering heuristic: descending expected degree (does not carry
// an approximation certificate).
std::vector<int> default_ordering(const StochasticGraph& sg);

// ---------------------------------------------------------------------------
// Water-filling (2+eps) pipeline
// ---------------------------------------------------------------------------

struct VCConstants {
  double eps;   // user epsilon, 0 < eps <= 1/4
  double eps1;  // eps^3
  double eps2;  // eps + eps^3
  double eps3;  // eps - eps^3
  double xi;    // (1 + eps2) / eps1
  double eps4;  // 2 eps
  double eps5;  // eps
  double eps_final;

  static VCConstants make(double eps);
  int round_budget() const;  // 1 + ceil(xi / eps3)
};

constexpr double kSaturationTol = 1e-9;
constexpr double kEventTol = 1e-12;

struct WaterfillState {
  std::vector<double> phi_edge;    // phi_e <= eps1 * p_e
  std::vector<double> phi_vertex;  // phi_v <= 1
  std::vector<uint8_t> in_f;       // phi_v == 1 (within tolerance)
};

// Event-driven fractional matching on the base graph: all active edge
// weights grow proportionally to p_e until a vertex saturates or the eps1
// budget is exhausted.
WaterfillState waterfilling(const StochasticGraph& sg, const VCConstants& c);

struct ChiState {
  std::vector<double> chi_edge;    // phi_e / p_e on realized edges, else 0
  std::vector<double> chi_vertex;
  std::vector<uint8_t> in_b;       // chi_v >= phi_v + eps2
  std::vector<uint8_t> in_b_plus;  // chi_v >= phi_v + eps2 - eps1
};

ChiState realize_chi(const WaterfillState& state, const StochasticGraph& sg,
                     const Realization& realization, const VCConstants& c);

struct VcPipelineResult {
  ChiState chi;
  std::vector<double> psi_edge;
  std::vector<double> psi_vertex;
  std::vector<uint8_t> edge_in_qstar;
  std::vector<uint8_t> in_cover;
  int iterations = 0;  // discretized water-filling iterations
};

// Centralized reference for the distributed phase: identical arithmetic to
// the protocol, used for witness diagnostics and cross-checks.
VcPipelineResult vc_pipeline_reference(const WaterfillState& state,
                                       const StochasticGraph& sg,
                                       const Realization& realization,
                                       const VCConstants& c);

// The distributed phase as an engine protocol: one 1-bit F-or-B
// announcement round, then one 1-bit activity round per water-filling
// iteration. Output per vertex: 1.0 if in the cover C.
class DistributedVcProtocol : public Protocol {
 public:
  DistributedVcProtocol(const StochasticGraph& sg, const WaterfillState& state,
                        const VCConstants& c);
  std::unique_ptr<NodeProgram> make_node(int v) const override;

 private:
  const StochasticGraph& sg_;
  const WaterfillState& state_;
  VCConstants c_;
};

// y_e = (chi_e + psi_e) / (1 + eps4) on realized edges with no endpoint in
// B. Feasibility (per-vertex sums <= 1) is asserted.
std::vector<double> witness_fractional_matching(const StochasticGraph& sg,
                                                const Realization& realization,
                                                const VcPipelineResult& pipe,
                                                const VCConstants& c);

bool covers_realization(const BaseGraph& g, const Realization& realization,
                        const std::vector<uint8_t>& in_cover);

}  // namespace dsg
