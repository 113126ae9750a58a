#include "dsg/mds.hpp"

#include <algorithm>
#include <cmath>

namespace dsg {

Ranking rank_vertices(const StochasticGraph& sg) {
  const BaseGraph& g = sg.graph;
  const int n = g.n();
  Ranking rk;
  rk.order.reserve(n);
  rk.w_tilde.reserve(n);
  rk.rank_of.assign(n, -1);
  // r[u] = probability u is still uncovered by the ranked prefix
  std::vector<double> r(n, 1.0);
  std::vector<uint8_t> ranked(n, 0);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    double best_w = -1.0;
    for (int v = 0; v < n; ++v) {
      if (ranked[v]) continue;
      double w = r[v];
      for (int e : g.incident(v)) {
        int u = g.other_endpoint(e, v);
        if (!ranked[u]) w += sg.prob[e] * r[u];
      }
      if (w > best_w) {
        best_w = w;
        best = v;
      }
    }
    rk.order.push_back(best);
    rk.w_tilde.push_back(best_w);
    rk.rank_of[best] = step;
    ranked[best] = 1;
    r[best] = 0.0;
    for (int e : g.incident(best)) {
      int u = g.other_endpoint(e, best);
      r[u] *= 1.0 - sg.prob[e];
    }
  }
  return rk;
}

namespace {

class MdsNode : public NodeProgram {
 public:
  MdsNode(const Ranking& ranking, int v) : ranking_(ranking), v_(v) {}

  bool start(const NodeView& view) override {
    select_ = v_;
    int best_rank = ranking_.rank_of[v_];
    for (auto [e, nb] : view.realized)
      if (ranking_.rank_of[nb] < best_rank) {
        best_rank = ranking_.rank_of[nb];
        select_ = nb;
        select_edge_ = e;
      }
    return true;
  }

  bool round(std::span<const InMsg>, std::vector<OutMsg>& out) override {
    if (select_ != v_) out.push_back({select_edge_, 1, 1});
    return false;
  }

  void finish(std::span<const InMsg> last_inbox) override {
    selected_ = select_ == v_ || !last_inbox.empty();
  }

  double output() const override { return selected_ ? 1.0 : 0.0; }

 private:
  const Ranking& ranking_;
  int v_;
  int select_ = -1;
  int select_edge_ = -1;
  bool selected_ = false;
};

}  // namespace

MdsProtocol::MdsProtocol(const StochasticGraph& sg, const Ranking& ranking)
    : sg_(sg), ranking_(ranking) {
  if (static_cast<int>(ranking.order.size()) != sg.graph.n())
    throw GraphError("ranking does not match the graph");
}

std::unique_ptr<NodeProgram> MdsProtocol::make_node(int v) const {
  return std::make_unique<MdsNode>(ranking_, v);
}

bool dominates(const BaseGraph& g, const Realization& realization,
               const std::vector<uint8_t>& in_set) {
  for (int v = 0; v < g.n(); ++v) {
    if (in_set[v]) continue;
    bool covered = false;
    for (int e : g.incident(v)) {
      if (!realization.present(e)) continue;
      if (in_set[g.other_endpoint(e, v)]) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

MdsDiagnostics classify_bad_costly(const StochasticGraph& sg,
                                   const Ranking& ranking,
                                   const Realization& realization,
                                   const MdsDiagnosticsConfig& cfg) {
  const BaseGraph& g = sg.graph;
  const int n = g.n();
  MdsDiagnostics d;
  double delta = max_expected_degree(sg);
  d.delta_clamped = delta < std::exp(1.0);
  d.delta_bar = d.delta_clamped ? std::exp(1.0) : delta;

  // cover time c_u: smallest rank i whose vertex realized-dominates u
  std::vector<int> cover_time(n);
  for (int u = 0; u < n; ++u) {
    int c = ranking.rank_of[u];
    for (int e : g.incident(u))
      if (realization.present(e))
        c = std::min(c, ranking.rank_of[g.other_endpoint(e, u)]);
    cover_time[u] = c;
  }

  // per rank i: w_i(v_i) = #{u in N*[v_i] : c_u >= i}
  d.w_realized.resize(n);
  d.bad.resize(n);
  d.costly.assign(n, 0);
  d.nu.assign(n, -1);
  double ln_delta = std::log(d.delta_bar);
  double log2_delta = std::log2(d.delta_bar);
  for (int i = 0; i < n; ++i) {
    int v = ranking.order[i];
    // cover times of the realized closed neighborhood of v
    std::vector<int> times{cover_time[v]};
    for (int e : g.incident(v))
      if (realization.present(e))
        times.push_back(cover_time[g.other_endpoint(e, v)]);
    std::sort(times.begin(), times.end());
    auto w_at = [&](int step) {
      // #times >= step
      return static_cast<double>(
          times.end() - std::lower_bound(times.begin(), times.end(), step));
    };
    d.w_realized[i] = w_at(i);
    double bad_threshold =
        (ranking.w_tilde[i] - cfg.bad_log_factor * ln_delta) / cfg.bad_divisor;
    d.bad[i] = d.w_realized[i] < bad_threshold ? 1 : 0;
    for (int ip = 0; ip < i; ++ip) {
      double limit = cfg.costly_factor *
                     (std::ceil(ranking.w_tilde[ip]) + log2_delta);
      if (w_at(ip) > limit) {
        d.costly[i] = 1;
        d.nu[i] = ip;
        break;
      }
    }
  }
  return d;
}

}  // namespace dsg
