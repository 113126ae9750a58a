#include "dsg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsg {

// ---------------------------------------------------------------------------
// Sides and hallucinations
// ---------------------------------------------------------------------------

SideAssignment assign_sides(const StochasticGraph& sg, double alpha,
                            uint64_t shared_seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw GraphError("alpha must be in (0, 1)");
  SideAssignment s;
  s.alpha = alpha;
  s.active.resize(sg.graph.n());
  for (int u = 0; u < sg.graph.n(); ++u) {
    Rng coin(derive_seed(shared_seed, "side", static_cast<uint64_t>(u)));
    s.active[u] = coin.bernoulli(alpha) ? 1 : 0;
  }
  return s;
}

SideAssignment bipartite_sides(const StochasticGraph& sg) {
  if (!sg.bipartition)
    throw GraphError("bipartite matching needs a bipartition");
  SideAssignment s;
  s.alpha = -1.0;
  s.active = sg.bipartition->is_left;
  return s;
}

std::vector<uint8_t> hallucinate(
    const StochasticGraph& sg, int v, const SideAssignment& sides,
    const std::vector<std::pair<int, int>>& realized_incident,
    uint64_t stream_seed) {
  const BaseGraph& g = sg.graph;
  std::vector<uint8_t> mask(g.m(), 0);
  std::vector<uint8_t> realized_here(g.m(), 0);
  for (auto [e, nb] : realized_incident) realized_here[e] = 1;
  Rng rng(derive_seed(stream_seed, "halluc"));
  for (int e = 0; e < g.m(); ++e) {
    const Edge& ed = g.edge(e);
    int other = ed.u == v ? ed.v : (ed.v == v ? ed.u : -1);
    if (other >= 0 && !sides.active[other]) {
      mask[e] = realized_here[e];  // truth on edges to passive neighbors
    } else {
      mask[e] = rng.bernoulli(sg.prob[e]) ? 1 : 0;
    }
  }
  return mask;
}

double two_round_ratio(double alpha) {
  return 2.0 * (1.0 - alpha) * (1.0 - std::exp(-alpha));
}

double optimal_alpha() {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (two_round_ratio(a) < two_round_ratio(b))
      lo = a;
    else
      hi = b;
  }
  return (lo + hi) / 2.0;
}

// ---------------------------------------------------------------------------
// Two-round protocol
// ---------------------------------------------------------------------------

namespace {

class TwoRoundNode : public NodeProgram {
 public:
  TwoRoundNode(const StochasticGraph& sg, double alpha, int v)
      : sg_(sg), alpha_(alpha), v_(v) {}

  bool start(const NodeView& view) override {
    realized_ = view.realized;
    sides_ = alpha_ < 0 ? bipartite_sides(sg_)
                        : assign_sides(sg_, alpha_, view.shared_seed);
    rng_seed_ = view.rng_seed;
    return true;
  }

  bool round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) override {
    if (phase_ == 0) {
      phase_ = 1;
      if (sides_.active[v_]) {
        std::vector<uint8_t> mask =
            hallucinate(sg_, v_, sides_, realized_, rng_seed_);
        EdgeSubgraph h{&sg_.graph, std::move(mask)};
        std::vector<int> partner = matching_partners(h, max_matching(h));
        int u = partner[v_];
        if (u >= 0 && !sides_.active[u]) {
          for (auto [e, nb] : realized_)
            if (nb == u) {
              out.push_back({e, 1, 1});
              proposal_edge_ = e;
              proposal_target_ = u;
              break;
            }
        }
      }
      return true;  // both sides sit through round 2
    }
    // round 2: passive vertices accept the lowest-id proposer
    if (!sides_.active[v_]) {
      const InMsg* best = nullptr;
      for (const InMsg& msg : inbox)
        if (msg.bits == 1 && (!best || msg.from < best->from)) best = &msg;
      if (best) {
        partner_ = best->from;
        out.push_back({best->edge, 1, 1});
      }
    }
    return false;
  }

  void finish(std::span<const InMsg> last_inbox) override {
    if (proposal_edge_ < 0) return;
    for (const InMsg& msg : last_inbox)
      if (msg.edge == proposal_edge_ && msg.bits == 1)
        partner_ = proposal_target_;
  }

  double output() const override { return partner_; }

 private:
  const StochasticGraph& sg_;
  double alpha_;
  int v_;
  uint64_t rng_seed_ = 0;
  int phase_ = 0;
  int partner_ = -1;
  int proposal_edge_ = -1;
  int proposal_target_ = -1;
  std::vector<std::pair<int, int>> realized_;
  SideAssignment sides_;
};

}  // namespace

TwoRoundMatchingProtocol::TwoRoundMatchingProtocol(const StochasticGraph& sg,
                                                   double alpha)
    : sg_(sg), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw GraphError("alpha must be in (0, 1)");
}

TwoRoundMatchingProtocol::TwoRoundMatchingProtocol(const StochasticGraph& sg)
    : sg_(sg), alpha_(-1.0) {
  if (!sg.bipartition)
    throw GraphError("bipartite matching needs a bipartition");
}

std::unique_ptr<NodeProgram> TwoRoundMatchingProtocol::make_node(int v) const {
  return std::make_unique<TwoRoundNode>(sg_, alpha_, v);
}

Matching matching_from_partners(const BaseGraph& g,
                                const std::vector<double>& outputs,
                                const Realization& realization,
                                const std::vector<uint8_t>* allowed) {
  Matching m;
  for (int v = 0; v < g.n(); ++v) {
    int u = static_cast<int>(outputs[v]);
    if (u < 0) continue;
    if (u >= g.n() || static_cast<int>(outputs[u]) != v)
      throw GraphError("partner outputs of " + std::to_string(v) + " and " +
                       std::to_string(u) + " disagree");
    if (v > u) continue;
    int found = -1;
    for (int e : g.incident(v))
      if (g.other_endpoint(e, v) == u && realization.present(e) &&
          (!allowed || (*allowed)[e])) {
        found = e;
        break;
      }
    if (found < 0)
      throw GraphError("matched pair " + std::to_string(v) + "-" +
                       std::to_string(u) + " spans no eligible edge");
    m.edge_ids.push_back(found);
  }
  return m;
}

bool is_valid_matching(const BaseGraph& g, const Realization& realization,
                       const Matching& m, const std::vector<uint8_t>* allowed) {
  std::vector<uint8_t> used(g.n(), 0);
  for (int e : m.edge_ids) {
    if (e < 0 || e >= g.m() || !realization.present(e)) return false;
    if (allowed && !(*allowed)[e]) return false;
    const Edge& ed = g.edge(e);
    if (used[ed.u] || used[ed.v]) return false;
    used[ed.u] = used[ed.v] = 1;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sparsifier and pruning
// ---------------------------------------------------------------------------

std::vector<uint8_t> degree_cap_sparsifier(const StochasticGraph& sg, int cap,
                                           uint64_t seed) {
  if (cap < 1) throw GraphError("sparsifier cap must be >= 1");
  const BaseGraph& g = sg.graph;
  std::vector<int> order(g.m());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "sparsify"));
  for (int i = g.m() - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<uint64_t>(i) + 1)]);
  std::vector<int> residual(g.n(), cap);
  std::vector<uint8_t> keep(g.m(), 0);
  for (int e : order) {
    const Edge& ed = g.edge(e);
    if (residual[ed.u] > 0 && residual[ed.v] > 0) {
      keep[e] = 1;
      --residual[ed.u];
      --residual[ed.v];
    }
  }
  return keep;
}

PrunedInstance prune_high_degree(const BaseGraph& g,
                                 const std::vector<uint8_t>& q_mask,
                                 const Realization& realization, double theta) {
  if (theta < 1.0) throw GraphError("theta must be >= 1");
  PrunedInstance pr;
  pr.theta = theta;
  pr.q_star.assign(g.m(), 0);
  for (int e = 0; e < g.m(); ++e)
    pr.q_star[e] = (q_mask[e] && realization.present(e)) ? 1 : 0;
  pr.v_bad.assign(g.n(), 0);
  for (int v = 0; v < g.n(); ++v) {
    int d = 0;
    for (int e : g.incident(v)) d += pr.q_star[e];
    pr.v_bad[v] = d >= theta ? 1 : 0;
  }
  pr.induced = pr.q_star;
  for (int e = 0; e < g.m(); ++e)
    if (pr.induced[e] && (pr.v_bad[g.edge(e).u] || pr.v_bad[g.edge(e).v]))
      pr.induced[e] = 0;
  return pr;
}

// ---------------------------------------------------------------------------
// Fixed-schedule distributed matching
// ---------------------------------------------------------------------------

MatchingSchedule MatchingSchedule::make(int max_degree, double delta, int c) {
  if (!(delta > 0.0 && delta < 1.0))
    throw GraphError("delta must be in (0, 1)");
  if (c < 1) throw GraphError("phase constant must be >= 1");
  MatchingSchedule s;
  int d = std::max(max_degree, 1);
  s.phases = static_cast<int>(std::ceil(c * std::log2(static_cast<double>(d)) + c));
  s.stages = static_cast<int>(std::ceil(1.0 / delta)) - 1;
  s.attempts_per_stage =
      c + static_cast<int>(std::ceil(c * std::log2(std::max(d, 2))));
  return s;
}

int MatchingSchedule::total_rounds() const {
  int total = 3 * phases;
  for (int j = 1; j <= stages; ++j) total += stage_rounds(j);
  return total;
}

namespace {

// The node program runs a fixed global schedule:
//   part A: `phases` propose/accept/confirm phases of the randomized greedy
//     maximal matching; within every round, bit 0 = "I am matched"
//     announcement and bit 1 = the round's action.
//   part B: stages j = 1..k of token-passing augmenting-path search. Each
//     attempt spends 4j+4 rounds: status, 2j+1 forward token hops, the
//     acceptor's decision, and the backward accept relay that flips the
//     path. Tokens start at free "initiator" vertices, walk alternating
//     unmatched/matched edges, and complete at free "acceptor" vertices;
//     every vertex carries at most one token per attempt, so flips along
//     accepted paths are vertex-disjoint.
class DistMatchNode : public NodeProgram {
 public:
  DistMatchNode(const StochasticGraph& sg, const std::vector<uint8_t>& allowed,
                const MatchingSchedule& schedule, int v)
      : sg_(sg), allowed_(allowed), sched_(schedule), v_(v) {}

  bool start(const NodeView& view) override {
    for (auto [e, nb] : view.realized)
      if (allowed_[e]) neighbors_.push_back({e, nb});
    eligible_.assign(neighbors_.size(), 1);
    rng_ = std::make_unique<Rng>(view.rng_seed);
    total_rounds_ = sched_.total_rounds();
    return total_rounds_ > 0;
  }

  bool round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) override {
    ++r_;
    int part_a_rounds = 3 * sched_.phases;
    if (r_ <= part_a_rounds) {
      switch ((r_ - 1) % 3) {
        case 0: propose_round(inbox, out); break;
        case 1: accept_round(inbox, out); break;
        case 2: confirm_round(inbox, out); break;
      }
    } else {
      int rb = r_ - part_a_rounds;
      int j = 1;
      while (rb > sched_.attempts_per_stage * (4 * j + 4)) {
        rb -= sched_.attempts_per_stage * (4 * j + 4);
        ++j;
      }
      int offset = (rb - 1) % (4 * j + 4) + 1;
      augment_round(j, offset, inbox, out);
    }
    return r_ < total_rounds_;
  }

  double output() const override { return partner_; }

 private:
  struct Nb {
    int edge;
    int vertex;
  };

  int find_neighbor(int edge) const {
    for (size_t i = 0; i < neighbors_.size(); ++i)
      if (neighbors_[i].edge == edge) return static_cast<int>(i);
    return -1;
  }

  void announce_if_needed(std::vector<OutMsg>& out) {
    if (partner_ < 0 || announced_) return;
    announced_ = true;
    for (const Nb& nb : neighbors_)
      if (nb.vertex != partner_) out.push_back({nb.edge, 0, 1});
  }

  void mark_ineligible(int edge) {
    int i = find_neighbor(edge);
    if (i >= 0) eligible_[i] = 0;
  }

  // --- part A: propose / accept / confirm greedy phases -------------------

  void propose_round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) {
    for (const InMsg& msg : inbox) {
      if (msg.bits == 0)
        mark_ineligible(msg.edge);
      else if (msg.edge == offer_edge_ && partner_ < 0)
        partner_ = msg.from;  // my offer was confirmed
    }
    offer_edge_ = -1;
    announce_if_needed(out);
    proposal_edge_ = -1;
    if (partner_ >= 0) return;
    coin_initiator_ = rng_->bernoulli(0.5);
    std::vector<int> options;
    for (size_t i = 0; i < neighbors_.size(); ++i)
      if (eligible_[i]) options.push_back(static_cast<int>(i));
    if (options.empty()) return;
    int i = options[rng_->below(options.size())];
    proposal_edge_ = neighbors_[i].edge;
    proposal_target_ = neighbors_[i].vertex;
    out.push_back({proposal_edge_, 1, 1});
  }

  void accept_round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) {
    std::vector<const InMsg*> proposals;
    for (const InMsg& msg : inbox) {
      if (msg.bits == 0)
        mark_ineligible(msg.edge);
      else
        proposals.push_back(&msg);
    }
    announce_if_needed(out);
    if (partner_ >= 0) return;
    for (const InMsg* p : proposals)
      if (p->from == proposal_target_ && proposal_edge_ >= 0) {
        partner_ = proposal_target_;  // mutual proposal, both sides detect
        return;
      }
    if (coin_initiator_ || proposals.empty()) return;
    const InMsg* best = proposals[0];
    for (const InMsg* p : proposals)
      if (p->from < best->from) best = p;
    offer_edge_ = best->edge;
    offer_target_ = best->from;
    out.push_back({offer_edge_, 1, 1});
  }

  void confirm_round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) {
    bool offered = false;
    for (const InMsg& msg : inbox) {
      if (msg.bits == 0)
        mark_ineligible(msg.edge);
      else if (msg.edge == proposal_edge_)
        offered = true;
    }
    announce_if_needed(out);
    if (offered && partner_ < 0 && coin_initiator_) {
      partner_ = proposal_target_;
      out.push_back({proposal_edge_, 1, 1});  // confirm; announce next round
    }
  }

  // --- part B: augmenting-path token search --------------------------------

  void augment_round(int j, int offset, std::span<const InMsg> inbox,
                     std::vector<OutMsg>& out) {
    if (offset == 1) {
      // a confirm from part A's final phase may still be in flight
      for (const InMsg& msg : inbox)
        if (msg.bits == 1 && msg.edge == offer_edge_ && partner_ < 0)
          partner_ = msg.from;
      offer_edge_ = -1;
      carrying_ = false;
      flipped_ = false;
      pred_edge_ = succ_edge_ = -1;
      pred_vertex_ = succ_vertex_ = -1;
      role_w_ = false;
      completions_.clear();
      matched_nb_.clear();
      acceptor_nb_.clear();
      initiator_ = partner_ < 0 && rng_->bernoulli(0.5);
      // status: matched -> 0, free acceptor -> 1, free initiator -> silent
      if (partner_ >= 0)
        for (const Nb& nb : neighbors_) out.push_back({nb.edge, 0, 1});
      else if (!initiator_)
        for (const Nb& nb : neighbors_) out.push_back({nb.edge, 1, 1});
      return;
    }
    if (offset == 2) {
      for (const InMsg& msg : inbox) {
        int i = find_neighbor(msg.edge);
        if (i < 0) continue;
        if (msg.bits == 0)
          matched_nb_.push_back(i);
        else
          acceptor_nb_.push_back(i);
      }
      if (initiator_ && partner_ < 0) {
        // a free acceptor neighbor is an instant augmentation; otherwise
        // start a walk through a matched neighbor
        const std::vector<int>& pool =
            !acceptor_nb_.empty() ? acceptor_nb_ : matched_nb_;
        if (!pool.empty()) {
          int i = pool[rng_->below(pool.size())];
          succ_edge_ = neighbors_[i].edge;
          succ_vertex_ = neighbors_[i].vertex;
          carrying_ = true;
          out.push_back({succ_edge_, 1, 1});
        }
      }
      return;
    }
    int forward_end = 2 * j + 2;
    int decision = 2 * j + 3;
    if (offset <= forward_end) {
      forward_window(j, offset, inbox, out);
      return;
    }
    if (offset == decision) {
      forward_window(j, offset, inbox, out);  // last completions arrive now
      if (partner_ < 0 && !initiator_ && !completions_.empty()) {
        const Completion* best = &completions_[0];
        for (const Completion& c : completions_)
          if (c.offset < best->offset ||
              (c.offset == best->offset && c.from < best->from))
            best = &c;
        partner_ = best->from;
        out.push_back({best->edge, 1, 1});
      }
      return;
    }
    // backward window: relay the accept and flip the path
    if (!carrying_ || flipped_ || succ_edge_ < 0) return;
    for (const InMsg& msg : inbox) {
      if (msg.bits != 1 || msg.edge != succ_edge_) continue;
      flipped_ = true;
      if (pred_edge_ < 0) {
        partner_ = succ_vertex_;  // initiator: new matched edge is succ
      } else if (role_w_) {
        partner_ = succ_vertex_;
        out.push_back({pred_edge_, 1, 1});
      } else {
        partner_ = pred_vertex_;
        out.push_back({pred_edge_, 1, 1});
      }
      announced_ = false;  // part A bookkeeping is stale either way
      return;
    }
  }

  void forward_window(int j, int offset, std::span<const InMsg> inbox,
                      std::vector<OutMsg>& out) {
    if (partner_ < 0) {
      if (initiator_) return;  // initiators never accept completions
      for (const InMsg& msg : inbox)
        if (msg.bits == 1)
          completions_.push_back({offset, msg.from, msg.edge});
      return;
    }
    // matched vertex: adopt the first token, lowest sender id breaking ties
    if (carrying_ || offset > 2 * j + 2) return;
    const InMsg* best = nullptr;
    for (const InMsg& msg : inbox)
      if (msg.bits == 1 && (!best || msg.from < best->from)) best = &msg;
    if (!best) return;
    carrying_ = true;
    pred_edge_ = best->edge;
    pred_vertex_ = best->from;
    if (best->from != partner_) {
      // entered over an unmatched edge: forward to my partner
      role_w_ = false;
      for (const Nb& nb : neighbors_)
        if (nb.vertex == partner_) {
          succ_edge_ = nb.edge;
          succ_vertex_ = nb.vertex;
          out.push_back({succ_edge_, 1, 1});
          return;
        }
      succ_edge_ = -1;  // partner edge was pruned from `allowed`: token dies
      return;
    }
    // entered over the matched edge: complete at a free acceptor or walk on
    role_w_ = true;
    int depth = (offset - 2) / 2;
    if (!acceptor_nb_.empty()) {
      int i = acceptor_nb_[rng_->below(acceptor_nb_.size())];
      succ_edge_ = neighbors_[i].edge;
      succ_vertex_ = neighbors_[i].vertex;
      out.push_back({succ_edge_, 1, 1});
      return;
    }
    if (depth >= j) return;  // depth exhausted, token dies
    std::vector<int> options;
    for (int i : matched_nb_)
      if (neighbors_[i].vertex != partner_) options.push_back(i);
    if (options.empty()) return;
    int i = options[rng_->below(options.size())];
    succ_edge_ = neighbors_[i].edge;
    succ_vertex_ = neighbors_[i].vertex;
    out.push_back({succ_edge_, 1, 1});
  }

  struct Completion {
    int offset;
    int from;
    int edge;
  };

  const StochasticGraph& sg_;
  const std::vector<uint8_t>& allowed_;
  const MatchingSchedule& sched_;
  int v_;
  std::unique_ptr<Rng> rng_;
  std::vector<Nb> neighbors_;
  std::vector<uint8_t> eligible_;
  int r_ = 0;
  int total_rounds_ = 0;
  int partner_ = -1;
  bool announced_ = false;
  // part A state
  bool coin_initiator_ = false;
  int proposal_edge_ = -1;
  int proposal_target_ = -1;
  int offer_edge_ = -1;
  int offer_target_ = -1;
  // part B state
  bool initiator_ = false;
  bool carrying_ = false;
  bool flipped_ = false;
  bool role_w_ = false;
  int pred_edge_ = -1, pred_vertex_ = -1;
  int succ_edge_ = -1, succ_vertex_ = -1;
  std::vector<int> matched_nb_, acceptor_nb_;
  std::vector<Completion> completions_;
};

}  // namespace

DistributedMatchingProtocol::DistributedMatchingProtocol(
    const StochasticGraph& sg, std::vector<uint8_t> allowed, int max_degree,
    double delta, int c)
    : sg_(sg),
      allowed_(std::move(allowed)),
      schedule_(MatchingSchedule::make(max_degree, delta, c)) {
  if (static_cast<int>(allowed_.size()) != sg.graph.m())
    throw GraphError("allowed-edge mask does not match the base graph");
}

std::unique_ptr<NodeProgram> DistributedMatchingProtocol::make_node(
    int v) const {
  return std::make_unique<DistMatchNode>(sg_, allowed_, schedule_, v);
}

int DistributedMatchingProtocol::payload_bit_budget(
    const StochasticGraph& sg) const {
  int n = std::max(sg.graph.n(), 2);
  return std::max(1, static_cast<int>(std::ceil(std::log2(n))));
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

PolyEpsResult matching_polyeps_pipeline(const StochasticGraph& sg, double eps,
                                        const PolyEpsParams& params,
                                        const Realization& realization,
                                        uint64_t seed) {
  if (!(eps > 0.0 && eps < 0.5))
    throw GraphError("epsilon must be in (0, 1/2)");
  const BaseGraph& g = sg.graph;
  if (g.m() == 0) throw GraphError("pipeline needs at least one edge");
  double p = sg.prob[0];
  for (double q : sg.prob)
    if (std::abs(q - p) > 1e-12)
      throw GraphError("pipeline requires uniform realization probability");

  PolyEpsResult res;
  res.theta = params.theta > 0 ? params.theta : 1.0 / std::pow(eps, 10.0);
  res.cap = params.cap > 0
                ? params.cap
                : static_cast<int>(std::ceil(params.c_a / (std::pow(eps, 5.0) * p)));
  res.q_mask = degree_cap_sparsifier(sg, res.cap, derive_seed(seed, "cap"));
  res.pruned = prune_high_degree(g, res.q_mask, realization, res.theta);

  // surviving realized degrees are < theta, and never exceed the cap
  int degree_bound = std::max(
      1, std::min(res.cap, static_cast<int>(std::ceil(res.theta))));
  DistributedMatchingProtocol proto(sg, res.pruned.induced, degree_bound,
                                    eps / 2.0, params.c);
  RunResult rr = run(sg, realization, proto, derive_seed(seed, "protocol"),
                     proto.schedule().total_rounds() + 1);
  res.matching =
      matching_from_partners(g, rr.outputs, realization, &res.pruned.induced);
  res.trace = std::move(rr.trace);
  if (res.trace.rounds != proto.schedule().total_rounds())
    throw GraphError("pipeline executed off-schedule");
  if (!is_valid_matching(g, realization, res.matching, &res.pruned.induced))
    throw GraphError("pipeline produced an invalid matching");
  return res;
}

}  // namespace dsg
