#include "dsg/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsg {

namespace {

std::vector<std::vector<int>> neighbor_lists(const EdgeSubgraph& g) {
  std::vector<std::vector<int>> adj(g.n());
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) {
      const Edge& ed = g.base->edge(e);
      adj[ed.u].push_back(ed.v);
      adj[ed.v].push_back(ed.u);
    }
  return adj;
}

// ---- exact minimum vertex cover (bitmask branch and bound, n <= 64) ----

struct VcSearch {
  int n;
  std::vector<uint64_t> nbr;
  int best;
  uint64_t best_cover;

  int greedy_matching_bound(uint64_t alive) const {
    int matched = 0;
    uint64_t avail = alive;
    uint64_t rest = alive;
    while (rest) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      if (!(avail & (1ULL << v))) continue;
      uint64_t cand = nbr[v] & avail & ~(1ULL << v);
      if (cand) {
        int u = std::countr_zero(cand);
        avail &= ~(1ULL << v);
        avail &= ~(1ULL << u);
        ++matched;
      }
    }
    return matched;
  }

  void rec(uint64_t alive, int size, uint64_t cover) {
    // reductions: drop isolated vertices, force neighbors of degree-1
    for (;;) {
      bool changed = false;
      uint64_t rest = alive;
      while (rest) {
        int v = std::countr_zero(rest);
        rest &= rest - 1;
        if (!(alive & (1ULL << v))) continue;
        uint64_t nb = nbr[v] & alive;
        if (nb == 0) {
          alive &= ~(1ULL << v);
        } else if (std::popcount(nb) == 1) {
          int u = std::countr_zero(nb);
          cover |= (1ULL << u);
          ++size;
          alive &= ~(1ULL << u);
          alive &= ~(1ULL << v);
          changed = true;
          if (size >= best) return;
        }
      }
      if (!changed) break;
    }
    bool has_edge = false;
    int branch_v = -1, branch_deg = -1;
    uint64_t rest = alive;
    while (rest) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      int d = std::popcount(nbr[v] & alive);
      if (d > 0) has_edge = true;
      if (d > branch_deg) {
        branch_deg = d;
        branch_v = v;
      }
    }
    if (!has_edge) {
      if (size < best) {
        best = size;
        best_cover = cover;
      }
      return;
    }
    if (size + greedy_matching_bound(alive) >= best) return;

    // branch: take v, or take all of N(v)
    uint64_t vb = 1ULL << branch_v;
    rec(alive & ~vb, size + 1, cover | vb);
    uint64_t nb = nbr[branch_v] & alive;
    if (size + branch_deg < best)
      rec(alive & ~(nb | vb), size + branch_deg, cover | nb);
  }
};

// ---- blossom maximum matching ----

struct BlossomMatcher {
  int n;
  std::vector<std::vector<int>> adj;
  std::vector<int> match, parent, base, q;
  std::vector<char> used, in_blossom;

  explicit BlossomMatcher(std::vector<std::vector<int>> a)
      : n(static_cast<int>(a.size())), adj(std::move(a)) {
    match.assign(n, -1);
    parent.assign(n, -1);
    base.resize(n);
    used.assign(n, 0);
    in_blossom.assign(n, 0);
  }

  int lca(int a, int b) {
    std::vector<char> mark(n, 0);
    for (;;) {
      a = base[a];
      mark[a] = 1;
      if (match[a] == -1) break;
      a = parent[match[a]];
    }
    for (;;) {
      b = base[b];
      if (mark[b]) return b;
      b = parent[match[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base[v] != b) {
      in_blossom[base[v]] = 1;
      in_blossom[base[match[v]]] = 1;
      parent[v] = child;
      child = match[v];
      v = parent[match[v]];
    }
  }

  int find_path(int root) {
    std::fill(used.begin(), used.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    std::iota(base.begin(), base.end(), 0);
    used[root] = 1;
    q.clear();
    q.push_back(root);
    for (size_t qi = 0; qi < q.size(); ++qi) {
      int v = q[qi];
      for (int to : adj[v]) {
        if (base[v] == base[to] || match[v] == to) continue;
        if (to == root || (match[to] != -1 && parent[match[to]] != -1)) {
          int cur = lca(v, to);
          std::fill(in_blossom.begin(), in_blossom.end(), 0);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n; ++i)
            if (in_blossom[base[i]]) {
              base[i] = cur;
              if (!used[i]) {
                used[i] = 1;
                q.push_back(i);
              }
            }
        } else if (parent[to] == -1) {
          parent[to] = v;
          if (match[to] == -1) return to;
          used[match[to]] = 1;
          q.push_back(match[to]);
        }
      }
    }
    return -1;
  }

  void solve() {
    for (int v = 0; v < n; ++v) {
      if (match[v] != -1) continue;
      int u = find_path(v);
      while (u != -1) {
        int pv = parent[u], ppv = match[pv];
        match[u] = pv;
        match[pv] = u;
        u = ppv;
      }
    }
  }
};

// ---- exact minimum dominating set ----

struct MdsSearch {
  int n;
  std::vector<uint64_t> closed;  // N[v]
  uint64_t all;
  int best;
  uint64_t best_set;
  int max_closed;

  void rec(uint64_t dominated, int size, uint64_t chosen) {
    if (dominated == all) {
      if (size < best) {
        best = size;
        best_set = chosen;
      }
      return;
    }
    int remaining = std::popcount(all & ~dominated);
    if (size + (remaining + max_closed - 1) / max_closed >= best) return;

    // branch over the closed neighborhood of an undominated vertex with
    // fewest candidates
    uint64_t undom = all & ~dominated;
    int pick = -1, pick_cands = n + 1;
    uint64_t rest = undom;
    while (rest) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      int c = std::popcount(closed[v]);
      if (c < pick_cands) {
        pick_cands = c;
        pick = v;
      }
    }
    uint64_t cands = closed[pick];
    while (cands) {
      int w = std::countr_zero(cands);
      cands &= cands - 1;
      rec(dominated | closed[w], size + 1, chosen | (1ULL << w));
    }
  }
};

// ---- bipartite matching (Kuhn) for the double cover ----

struct Kuhn {
  int nl, nr;
  const std::vector<std::vector<int>>& adj;  // left -> right
  std::vector<int> match_l, match_r;
  std::vector<char> seen;

  Kuhn(int nl_, int nr_, const std::vector<std::vector<int>>& a)
      : nl(nl_), nr(nr_), adj(a) {
    match_l.assign(nl, -1);
    match_r.assign(nr, -1);
    seen.resize(nr);
  }

  bool augment(int v) {
    for (int to : adj[v]) {
      if (seen[to]) continue;
      seen[to] = 1;
      if (match_r[to] == -1 || augment(match_r[to])) {
        match_l[v] = to;
        match_r[to] = v;
        return true;
      }
    }
    return false;
  }

  void solve() {
    for (int v = 0; v < nl; ++v) {
      if (match_l[v] != -1) continue;
      std::fill(seen.begin(), seen.end(), 0);
      augment(v);
    }
  }
};

std::vector<int> bits_to_vertices(uint64_t mask) {
  std::vector<int> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

}  // namespace

std::vector<int> exact_min_vertex_cover(const EdgeSubgraph& g,
                                        const OracleLimits& limits) {
  int m_present = 0;
  for (uint8_t b : g.present) m_present += b;
  if (g.n() > limits.max_vc_n || m_present > limits.max_vc_m)
    throw BudgetError("exact_min_vertex_cover size guard exceeded (n=" +
                      std::to_string(g.n()) + ", m=" +
                      std::to_string(m_present) + ")");
  if (g.n() > 64) throw BudgetError("exact_min_vertex_cover requires n <= 64");

  VcSearch s;
  s.n = g.n();
  s.nbr.assign(s.n, 0);
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) {
      const Edge& ed = g.base->edge(e);
      s.nbr[ed.u] |= 1ULL << ed.v;
      s.nbr[ed.v] |= 1ULL << ed.u;
    }
  s.best = s.n + 1;
  s.best_cover = 0;
  uint64_t alive = s.n == 64 ? ~0ULL : (1ULL << s.n) - 1;
  s.rec(alive, 0, 0);
  return bits_to_vertices(s.best_cover);
}

Matching max_matching(const EdgeSubgraph& g) {
  BlossomMatcher bm(neighbor_lists(g));
  bm.solve();
  // translate matched pairs back to edge ids (simple graph: unique edge)
  std::map<std::pair<int, int>, int> eid;
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) eid[{g.base->edge(e).u, g.base->edge(e).v}] = e;
  Matching m;
  for (int v = 0; v < g.n(); ++v)
    if (bm.match[v] > v) m.edge_ids.push_back(eid.at({v, bm.match[v]}));
  return m;
}

std::vector<int> matching_partners(const EdgeSubgraph& g, const Matching& m) {
  std::vector<int> partner(g.n(), -1);
  for (int e : m.edge_ids) {
    const Edge& ed = g.base->edge(e);
    partner[ed.u] = ed.v;
    partner[ed.v] = ed.u;
  }
  return partner;
}

std::vector<int> exact_min_dominating_set(const EdgeSubgraph& g,
                                          const OracleLimits& limits) {
  if (g.n() > limits.max_mds_n)
    throw BudgetError("exact_min_dominating_set size guard exceeded (n=" +
                      std::to_string(g.n()) + ")");
  MdsSearch s;
  s.n = g.n();
  s.closed.assign(s.n, 0);
  for (int v = 0; v < s.n; ++v) s.closed[v] = 1ULL << v;
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) {
      const Edge& ed = g.base->edge(e);
      s.closed[ed.u] |= 1ULL << ed.v;
      s.closed[ed.v] |= 1ULL << ed.u;
    }
  s.all = s.n == 0 ? 0 : (s.n == 64 ? ~0ULL : (1ULL << s.n) - 1);
  s.max_closed = 1;
  for (int v = 0; v < s.n; ++v)
    s.max_closed = std::max(s.max_closed, std::popcount(s.closed[v]));

  // greedy upper bound
  {
    uint64_t dominated = 0, chosen = 0;
    int size = 0;
    while (dominated != s.all) {
      int bestv = -1, gain = -1;
      for (int v = 0; v < s.n; ++v) {
        int gn = std::popcount(s.closed[v] & ~dominated);
        if (gn > gain) {
          gain = gn;
          bestv = v;
        }
      }
      dominated |= s.closed[bestv];
      chosen |= 1ULL << bestv;
      ++size;
    }
    s.best = size;
    s.best_set = chosen;
  }
  s.rec(0, 0, 0);
  return bits_to_vertices(s.best_set);
}

FractionalVertexCover optimal_fractional_vertex_cover(const EdgeSubgraph& g) {
  const int n = g.n();
  // double cover: left copy (v,0), right copy (v,1); edge uv contributes
  // (u,0)-(v,1) and (v,0)-(u,1)
  std::vector<std::vector<int>> adj(n);
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) {
      const Edge& ed = g.base->edge(e);
      adj[ed.u].push_back(ed.v);
      adj[ed.v].push_back(ed.u);
    }
  Kuhn kuhn(n, n, adj);
  kuhn.solve();

  // Koenig cover: Z = unmatched left vertices plus everything reachable by
  // alternating paths; cover = (L \ Z) + (R cap Z)
  std::vector<char> z_left(n, 0), z_right(n, 0);
  std::vector<int> stack;
  for (int v = 0; v < n; ++v)
    if (kuhn.match_l[v] == -1) {
      z_left[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int to : adj[v]) {
      if (z_right[to] || kuhn.match_l[v] == to) continue;
      z_right[to] = 1;
      int back = kuhn.match_r[to];
      if (back != -1 && !z_left[back]) {
        z_left[back] = 1;
        stack.push_back(back);
      }
    }
  }

  FractionalVertexCover fc;
  fc.value.assign(n, 0.0);
  for (int v = 0; v < n; ++v) {
    double x0 = z_left[v] ? 0.0 : (kuhn.match_l[v] != -1 ? 1.0 : 0.0);
    double x1 = z_right[v] ? 1.0 : 0.0;
    // vertices in L \ Z are in the cover only if matched (unmatched left
    // vertices are all in Z, so x0 above is exact)
    fc.value[v] = (x0 + x1) / 2.0;
    fc.total += fc.value[v];
  }
  return fc;
}

ConditionalF estimate_conditional_f(const StochasticGraph& sg, long trials,
                                    uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int m = sg.graph.m();
  ConditionalF out;
  out.f.assign(2 * m, 0.0);
  out.trials = trials;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int e = 0; e < m; ++e) {
    const Edge& ed = sg.graph.edge(e);
    double sum_u = 0.0, sum_v = 0.0;
    for (long t = 0; t < trials; ++t) {
      Realization r = sample_realization_forced(
          sg, e, derive_seed(master_seed, "condf", static_cast<uint64_t>(e), t));
      FractionalVertexCover fc =
          optimal_fractional_vertex_cover(EdgeSubgraph::of(sg.graph, r));
      sum_u += fc.value[ed.u];
      sum_v += fc.value[ed.v];
    }
    out.f[2 * e] = sum_u / static_cast<double>(trials);
    out.f[2 * e + 1] = sum_v / static_cast<double>(trials);
  }
  return out;
}

MatchMarginals estimate_match_marginals(const StochasticGraph& sg, long trials,
                                        uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int m = sg.graph.m();
  const int n = sg.graph.n();
  std::vector<long> edge_count(m, 0);
  long long size_sum = 0;
#ifdef _OPENMP
#pragma omp parallel
  {
    std::vector<long> local(m, 0);
    long long local_size = 0;
#pragma omp for schedule(dynamic, 16)
    for (long t = 0; t < trials; ++t) {
      Realization r = sample_realization(sg, derive_seed(master_seed, "marg", t));
      Matching mt = max_matching(EdgeSubgraph::of(sg.graph, r));
      for (int e : mt.edge_ids) ++local[e];
      local_size += static_cast<long long>(mt.edge_ids.size());
    }
#pragma omp critical
    {
      for (int e = 0; e < m; ++e) edge_count[e] += local[e];
      size_sum += local_size;
    }
  }
#else
  for (long t = 0; t < trials; ++t) {
    Realization r = sample_realization(sg, derive_seed(master_seed, "marg", t));
    Matching mt = max_matching(EdgeSubgraph::of(sg.graph, r));
    for (int e : mt.edge_ids) ++edge_count[e];
    size_sum += static_cast<long long>(mt.edge_ids.size());
  }
#endif
  MatchMarginals out;
  out.trials = trials;
  out.edge.resize(m);
  out.vertex.assign(n, 0.0);
  for (int e = 0; e < m; ++e) {
    out.edge[e] = static_cast<double>(edge_count[e]) / static_cast<double>(trials);
    out.vertex[sg.graph.edge(e).u] += out.edge[e];
    out.vertex[sg.graph.edge(e).v] += out.edge[e];
  }
  out.expected_matching =
      static_cast<double>(size_sum) / static_cast<double>(trials);
  return out;
}

TailIdentity tail_expectation_check(const std::vector<long>& samples, long ell) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  if (ell < 0) throw std::invalid_argument("ell must be non-negative");
  long max_x = 0;
  for (long x : samples) {
    if (x < 0) throw std::invalid_argument("negative support rejected");
    max_x = std::max(max_x, x);
  }
  const double n = static_cast<double>(samples.size());
  auto pr_gt = [&](long t) {
    long c = 0;
    for (long x : samples)
      if (x > t) ++c;
    return static_cast<double>(c) / n;
  };
  auto pr_ge = [&](long t) {
    long c = 0;
    for (long x : samples)
      if (x >= t) ++c;
    return static_cast<double>(c) / n;
  };
  TailIdentity id{};
  double lhs = 0.0;
  for (long x : samples)
    if (x >= ell) lhs += static_cast<double>(x);
  id.lhs = lhs / n;
  double rhs = static_cast<double>(ell) * pr_ge(ell);
  for (long t = ell; t <= max_x; ++t) rhs += pr_gt(t);
  id.rhs = rhs;
  return id;
}

}  // namespace dsg
