#include "dsg/vc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsg {

// ---------------------------------------------------------------------------
// No-communication cover
// ---------------------------------------------------------------------------

EdgeAssociation build_edge_association(const StochasticGraph& sg,
                                       const ConditionalF& f) {
  const BaseGraph& g = sg.graph;
  if (static_cast<int>(f.f.size()) != 2 * g.m())
    throw GraphError("conditional estimate missing for some edge");
  EdgeAssociation assoc;
  assoc.owner_is_u.resize(g.m());
  assoc.owned.resize(g.n());
  for (int e = 0; e < g.m(); ++e) {
    double fu = f.of(e, true), fv = f.of(e, false);
    // ties go to the smaller id, which is edge(e).u by construction
    bool u_owns = fu >= fv;
    assoc.owner_is_u[e] = u_owns ? 1 : 0;
    assoc.owned[u_owns ? g.edge(e).u : g.edge(e).v].push_back(e);
  }
  return assoc;
}

double cover_probability_closed_form(const StochasticGraph& sg,
                                     const EdgeAssociation& assoc, int v) {
  double miss = 1.0;
  for (int e : assoc.owned[v]) miss *= 1.0 - sg.prob[e];
  return 1.0 - miss;
}

namespace {

class NoCommNode : public NodeProgram {
 public:
  NoCommNode(const std::vector<int>& owned) : owned_(owned) {}
  bool start(const NodeView& view) override {
    for (auto [e, nb] : view.realized)
      if (std::find(owned_.begin(), owned_.end(), e) != owned_.end()) {
        in_cover_ = true;
        break;
      }
    return false;  // zero rounds
  }
  bool round(std::span<const InMsg>, std::vector<OutMsg>&) override {
    return false;
  }
  double output() const override { return in_cover_ ? 1.0 : 0.0; }

 private:
  const std::vector<int>& owned_;
  bool in_cover_ = false;
};

}  // namespace

NoCommVcProtocol::NoCommVcProtocol(const StochasticGraph& sg,
                                   EdgeAssociation assoc)
    : sg_(sg), assoc_(std::move(assoc)) {}

std::unique_ptr<NodeProgram> NoCommVcProtocol::make_node(int v) const {
  return std::make_unique<NoCommNode>(assoc_.owned[v]);
}

// ---------------------------------------------------------------------------
// Ordering cover
// ---------------------------------------------------------------------------

namespace {

std::vector<int> order_positions(const std::vector<int>& order, int n) {
  if (static_cast<int>(order.size()) != n)
    throw GraphError("ordering is not a permutation");
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    int v = order[i];
    if (v < 0 || v >= n || pos[v] != -1)
      throw GraphError("ordering is not a permutation");
    pos[v] = i;
  }
  return pos;
}

}  // namespace

std::vector<int> ordering_cover(const StochasticGraph& sg,
                                const std::vector<int>& order,
                                const Realization& realization) {
  const BaseGraph& g = sg.graph;
  std::vector<int> pos = order_positions(order, g.n());
  std::vector<int> cover;
  for (int v = 0; v < g.n(); ++v) {
    for (int e : g.incident(v)) {
      if (!realization.present(e)) continue;
      if (pos[g.other_endpoint(e, v)] > pos[v]) {
        cover.push_back(v);
        break;
      }
    }
  }
  return cover;
}

double ordering_cover_expectation(const StochasticGraph& sg,
                                  const std::vector<int>& order) {
  const BaseGraph& g = sg.graph;
  std::vector<int> pos = order_positions(order, g.n());
  double total = 0.0;
  for (int v = 0; v < g.n(); ++v) {
    double miss = 1.0;
    for (int e : g.incident(v))
      if (pos[g.other_endpoint(e, v)] > pos[v]) miss *= 1.0 - sg.prob[e];
    total += 1.0 - miss;
  }
  return total;
}

SequentialMatchingResult sequential_random_matching(
    const StochasticGraph& sg, const std::vector<int>& order,
    const Realization& realization, uint64_t seed) {
  const BaseGraph& g = sg.graph;
  std::vector<int> pos = order_positions(order, g.n());
  Rng rng(seed);
  SequentialMatchingResult res;
  res.matched_left.assign(g.n(), 0);
  res.matched_right.assign(g.n(), 0);
  std::vector<uint8_t> matched(g.n(), 0);
  for (int v : order) {
    if (matched[v]) continue;
    std::vector<int> options;  // realized unmatched later neighbors (edges)
    for (int e : g.incident(v)) {
      if (!realization.present(e)) continue;
      int u = g.other_endpoint(e, v);
      if (pos[u] > pos[v] && !matched[u]) options.push_back(e);
    }
    if (options.empty()) continue;
    int e = options[rng.below(options.size())];
    int u = g.other_endpoint(e, v);
    matched[v] = matched[u] = 1;
    res.matched_right[v] = 1;
    res.matched_left[u] = 1;
    res.matching.edge_ids.push_back(e);
  }
  return res;
}

std::vector<int> default_ordering(const StochasticGraph& sg) {
  std::vector<double> deg = expected_degrees(sg);
  std::vector<int> order(sg.graph.n());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return deg[a] > deg[b]; });
  return order;
}

// ---------------------------------------------------------------------------
// Water-filling
// ---------------------------------------------------------------------------

VCConstants VCConstants::make(double eps) {
  if (!(eps > 0.0 && eps <= 0.25))
    throw GraphError("epsilon must be in (0, 1/4]");
  VCConstants c;
  c.eps = eps;
  c.eps1 = eps * eps * eps;
  c.eps2 = eps + c.eps1;
  c.eps3 = eps - c.eps1;
  c.xi = (1.0 + c.eps2) / c.eps1;
  c.eps4 = 2.0 * eps;
  c.eps5 = eps;
  c.eps_final = (2.0 + c.eps5) * (1.0 + c.eps4) / (1.0 - c.eps5) - 2.0;
  return c;
}

int VCConstants::round_budget() const {
  return 1 + static_cast<int>(std::ceil(xi / eps3));
}

WaterfillState waterfilling(const StochasticGraph& sg, const VCConstants& c) {
  const BaseGraph& g = sg.graph;
  WaterfillState st;
  st.phi_edge.assign(g.m(), 0.0);
  st.phi_vertex.assign(g.n(), 0.0);
  st.in_f.assign(g.n(), 0);

  std::vector<uint8_t> edge_active(g.m(), 1);
  std::vector<double> active_mass(g.n(), 0.0);  // sum of p_e over active e at v
  std::vector<double> freeze_scale(g.m(), 0.0);
  std::vector<double> acc_phi(g.n(), 0.0);
  int active_edges = g.m();
  for (int e = 0; e < g.m(); ++e) {
    active_mass[g.edge(e).u] += sg.prob[e];
    active_mass[g.edge(e).v] += sg.prob[e];
  }

  double s = 0.0;
  while (active_edges > 0 && s < c.eps1 - kEventTol) {
    double delta = c.eps1 - s;
    for (int v = 0; v < g.n(); ++v) {
      if (st.in_f[v] || active_mass[v] <= kEventTol) continue;
      delta = std::min(delta, (1.0 - acc_phi[v]) / active_mass[v]);
    }
    if (delta <= 0.0) break;
    s += delta;
    for (int v = 0; v < g.n(); ++v)
      if (!st.in_f[v] && active_mass[v] > kEventTol)
        acc_phi[v] += delta * active_mass[v];
    // freeze newly saturated vertices and their edges
    for (int v = 0; v < g.n(); ++v) {
      if (st.in_f[v] || acc_phi[v] < 1.0 - kSaturationTol) continue;
      st.in_f[v] = 1;
      for (int e : g.incident(v)) {
        if (!edge_active[e]) continue;
        edge_active[e] = 0;
        freeze_scale[e] = s;
        --active_edges;
        int w = g.other_endpoint(e, v);
        active_mass[w] -= sg.prob[e];
        active_mass[v] -= sg.prob[e];
      }
    }
  }
  // remaining active edges freeze at the eps1 budget exactly
  for (int e = 0; e < g.m(); ++e)
    if (edge_active[e]) freeze_scale[e] = c.eps1;

  for (int e = 0; e < g.m(); ++e) st.phi_edge[e] = freeze_scale[e] * sg.prob[e];
  for (int v = 0; v < g.n(); ++v) {
    double sum = 0.0;
    for (int e : g.incident(v)) sum += st.phi_edge[e];
    st.phi_vertex[v] = sum;
  }
  return st;
}

ChiState realize_chi(const WaterfillState& state, const StochasticGraph& sg,
                     const Realization& realization, const VCConstants& c) {
  const BaseGraph& g = sg.graph;
  ChiState chi;
  chi.chi_edge.assign(g.m(), 0.0);
  chi.chi_vertex.assign(g.n(), 0.0);
  chi.in_b.assign(g.n(), 0);
  chi.in_b_plus.assign(g.n(), 0);
  for (int e = 0; e < g.m(); ++e)
    if (realization.present(e))
      chi.chi_edge[e] = state.phi_edge[e] / sg.prob[e];
  for (int v = 0; v < g.n(); ++v) {
    double sum = 0.0;
    for (int e : g.incident(v)) sum += chi.chi_edge[e];
    chi.chi_vertex[v] = sum;
    chi.in_b[v] = sum >= state.phi_vertex[v] + c.eps2 ? 1 : 0;
    chi.in_b_plus[v] = sum >= state.phi_vertex[v] + c.eps2 - c.eps1 ? 1 : 0;
  }
  return chi;
}

namespace {

// Iterations after which edge e cannot be live anymore: the endpoint with
// smaller slack must have deactivated by then.
int edge_cap(double phi_u, double phi_v, double inc) {
  double slack = 1.0 - std::max(phi_u, phi_v);
  if (slack <= 0) return 0;
  return static_cast<int>(std::ceil(slack / inc));
}

bool vertex_active(double phi_v, double psi_v) {
  return phi_v + psi_v < 1.0 - kSaturationTol;
}

}  // namespace

VcPipelineResult vc_pipeline_reference(const WaterfillState& state,
                                       const StochasticGraph& sg,
                                       const Realization& realization,
                                       const VCConstants& c) {
  const BaseGraph& g = sg.graph;
  VcPipelineResult res;
  res.chi = realize_chi(state, sg, realization, c);
  res.psi_edge.assign(g.m(), 0.0);
  res.psi_vertex.assign(g.n(), 0.0);
  res.edge_in_qstar.assign(g.m(), 0);
  res.in_cover.assign(g.n(), 0);

  const double inc = c.eps3 / c.xi;
  std::vector<int> live;  // edge ids of Q* still live
  std::vector<int> cap(g.m(), 0);
  for (int e = 0; e < g.m(); ++e) {
    if (!realization.present(e)) continue;
    const Edge& ed = g.edge(e);
    bool fb_u = state.in_f[ed.u] || res.chi.in_b[ed.u];
    bool fb_v = state.in_f[ed.v] || res.chi.in_b[ed.v];
    if (fb_u || fb_v) continue;
    res.edge_in_qstar[e] = 1;
    cap[e] = edge_cap(state.phi_vertex[ed.u], state.phi_vertex[ed.v], inc);
    if (cap[e] > 0) live.push_back(e);
  }

  std::vector<double>& psi_v = res.psi_vertex;
  int k = 0;
  while (!live.empty()) {
    ++k;
    // Increment every edge live at iteration k. Per-vertex psi accumulates
    // one "+= inc" per live incident edge, exactly like the node programs,
    // so the two agree bit for bit.
    std::vector<int> still;
    still.reserve(live.size());
    for (int e : live) {
      const Edge& ed = g.edge(e);
      res.psi_edge[e] += inc;
      psi_v[ed.u] += inc;
      psi_v[ed.v] += inc;
    }
    for (int e : live) {
      const Edge& ed = g.edge(e);
      if (k >= cap[e]) continue;
      if (!vertex_active(state.phi_vertex[ed.u], psi_v[ed.u])) continue;
      if (!vertex_active(state.phi_vertex[ed.v], psi_v[ed.v])) continue;
      still.push_back(e);
    }
    live.swap(still);
  }
  res.iterations = k;

  for (int v = 0; v < g.n(); ++v) {
    bool in = state.in_f[v] || res.chi.in_b[v] ||
              state.phi_vertex[v] + psi_v[v] >= 1.0 - kSaturationTol;
    res.in_cover[v] = in ? 1 : 0;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Distributed protocol for the water-filling phase
// ---------------------------------------------------------------------------

namespace {

class DistVcNode : public NodeProgram {
 public:
  DistVcNode(const StochasticGraph& sg, const WaterfillState& state,
             const VCConstants& c, int v)
      : sg_(sg), state_(state), c_(c), v_(v), inc_(c.eps3 / c.xi) {}

  bool start(const NodeView& view) override {
    phi_ = state_.phi_vertex[v_];
    double chi = 0.0;
    for (auto [e, nb] : view.realized) chi += state_.phi_edge[e] / sg_.prob[e];
    in_fb_ = state_.in_f[v_] || chi >= phi_ + c_.eps2;
    realized_ = view.realized;
    return !realized_.empty();  // isolated vertices have nothing to do
  }

  bool round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) override {
    if (phase_ == 0) {
      // announcement round: broadcast the F-or-B bit
      for (auto [e, nb] : realized_) out.push_back({e, in_fb_ ? 1ULL : 0ULL, 1});
      phase_ = 1;
      return !in_fb_;  // F and B vertices are in C and stop listening
    }
    if (phase_ == 1) {
      // learn Q*: keep realized edges whose partner is outside F and B
      for (size_t i = 0; i < realized_.size(); ++i) {
        const InMsg* msg = find_msg(inbox, realized_[i].first);
        if (msg == nullptr || msg->bits != 0) continue;
        int e = realized_[i].first;
        int w = sg_.graph.other_endpoint(e, v_);
        int cap = edge_cap(phi_, state_.phi_vertex[w], inc_);
        if (cap > 0) live_.push_back({e, cap});
      }
      phase_ = 2;
      if (live_.empty()) return false;
      return do_iteration(out);
    }
    // phase 2: one water-filling iteration per round
    for (const InMsg& msg : inbox)
      if (msg.bits == 0) drop_edge(msg.edge);
    if (live_.empty() || !active()) return false;
    return do_iteration(out);
  }

  double output() const override {
    return (in_fb_ || phi_ + psi_ >= 1.0 - kSaturationTol) ? 1.0 : 0.0;
  }

 private:
  struct LiveEdge {
    int edge;
    int cap;
  };

  static const InMsg* find_msg(std::span<const InMsg> inbox, int edge) {
    for (const InMsg& m : inbox)
      if (m.edge == edge) return &m;
    return nullptr;
  }

  bool active() const { return vertex_active(phi_, psi_); }

  void drop_edge(int e) {
    for (size_t i = 0; i < live_.size(); ++i)
      if (live_[i].edge == e) {
        live_.erase(live_.begin() + i);
        return;
      }
  }

  bool do_iteration(std::vector<OutMsg>& out) {
    ++k_;
    for (const LiveEdge& le : live_) {
      (void)le;
      psi_ += inc_;
    }
    bool self_active = active();
    // edges that can still be live at iteration k+1 under the cap
    std::vector<LiveEdge> next;
    for (const LiveEdge& le : live_)
      if (le.cap > k_) next.push_back(le);
    for (const LiveEdge& le : next)
      out.push_back({le.edge, self_active ? 1ULL : 0ULL, 1});
    live_.swap(next);
    return self_active && !live_.empty();
  }

  const StochasticGraph& sg_;
  const WaterfillState& state_;
  VCConstants c_;
  int v_;
  double inc_;
  double phi_ = 0.0;
  double psi_ = 0.0;
  bool in_fb_ = false;
  int phase_ = 0;
  int k_ = 0;
  std::vector<std::pair<int, int>> realized_;
  std::vector<LiveEdge> live_;
};

}  // namespace

DistributedVcProtocol::DistributedVcProtocol(const StochasticGraph& sg,
                                             const WaterfillState& state,
                                             const VCConstants& c)
    : sg_(sg), state_(state), c_(c) {}

std::unique_ptr<NodeProgram> DistributedVcProtocol::make_node(int v) const {
  return std::make_unique<DistVcNode>(sg_, state_, c_, v);
}

std::vector<double> witness_fractional_matching(const StochasticGraph& sg,
                                                const Realization& realization,
                                                const VcPipelineResult& pipe,
                                                const VCConstants& c) {
  const BaseGraph& g = sg.graph;
  std::vector<double> y(g.m(), 0.0);
  for (int e = 0; e < g.m(); ++e) {
    if (!realization.present(e)) continue;
    const Edge& ed = g.edge(e);
    if (pipe.chi.in_b[ed.u] || pipe.chi.in_b[ed.v]) continue;
    y[e] = (pipe.chi.chi_edge[e] + pipe.psi_edge[e]) / (1.0 + c.eps4);
  }
  for (int v = 0; v < g.n(); ++v) {
    double sum = 0.0;
    for (int e : g.incident(v)) sum += y[e];
    if (sum > 1.0 + kSaturationTol)
      throw GraphError("witness fractional matching infeasible at vertex " +
                       std::to_string(v));
  }
  return y;
}

bool covers_realization(const BaseGraph& g, const Realization& realization,
                        const std::vector<uint8_t>& in_cover) {
  for (int e = 0; e < g.m(); ++e) {
    if (!realization.present(e)) continue;
    if (!in_cover[g.edge(e).u] && !in_cover[g.edge(e).v]) return false;
  }
  return true;
}

}  // namespace dsg
