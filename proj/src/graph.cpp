#include "dsg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace dsg {

BaseGraph::BaseGraph(int n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw GraphError("negative vertex count");
  adj_.resize(n_);
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const Edge& ed = edges_[e];
    if (ed.u == ed.v) throw GraphError("self-loop on vertex " + std::to_string(ed.u));
    if (ed.u > ed.v) throw GraphError("edge endpoints not ordered u < v");
    if (ed.u < 0 || ed.v >= n_) throw GraphError("vertex id out of range");
    if (!seen.insert({ed.u, ed.v}).second)
      throw GraphError("parallel edge " + std::to_string(ed.u) + "-" +
                       std::to_string(ed.v));
    adj_[ed.u].push_back(e);
    adj_[ed.v].push_back(e);
  }
}

void StochasticGraph::validate() const {
  if (static_cast<int>(prob.size()) != graph.m())
    throw GraphError("probability array size mismatch");
  for (int e = 0; e < graph.m(); ++e) {
    double p = prob[e];
    if (!std::isfinite(p) || p <= 0.0 || p > 1.0)
      throw GraphError("probability out of range on edge " + std::to_string(e));
  }
  if (bipartition) {
    if (static_cast<int>(bipartition->is_left.size()) != graph.n())
      throw GraphError("bipartition size mismatch");
    for (const Edge& ed : graph.edges()) {
      if (bipartition->is_left[ed.u] == bipartition->is_left[ed.v])
        throw GraphError("edge " + std::to_string(ed.u) + "-" +
                         std::to_string(ed.v) + " does not cross bipartition");
    }
  }
}

Realization sample_realization(const StochasticGraph& sg, uint64_t seed) {
  Rng rng(seed);
  std::vector<uint8_t> present(sg.graph.m());
  for (int e = 0; e < sg.graph.m(); ++e)
    present[e] = rng.bernoulli(sg.prob[e]) ? 1 : 0;
  return Realization(sg.graph, std::move(present));
}

Realization sample_realization_forced(const StochasticGraph& sg,
                                      int forced_edge, uint64_t seed) {
  Rng rng(seed);
  std::vector<uint8_t> present(sg.graph.m());
  for (int e = 0; e < sg.graph.m(); ++e)
    present[e] = rng.bernoulli(sg.prob[e]) ? 1 : 0;
  present[forced_edge] = 1;
  return Realization(sg.graph, std::move(present));
}

std::vector<double> expected_degrees(const StochasticGraph& sg) {
  std::vector<double> deg(sg.graph.n(), 0.0);
  for (int e = 0; e < sg.graph.m(); ++e) {
    deg[sg.graph.edge(e).u] += sg.prob[e];
    deg[sg.graph.edge(e).v] += sg.prob[e];
  }
  return deg;
}

double max_expected_degree(const StochasticGraph& sg) {
  double mx = 0.0;
  for (double d : expected_degrees(sg)) mx = std::max(mx, d);
  return mx;
}

GraphKind parse_kind(const std::string& name) {
  if (name == "erdos_renyi") return GraphKind::erdos_renyi;
  if (name == "random_bipartite") return GraphKind::random_bipartite;
  if (name == "star") return GraphKind::star;
  if (name == "path") return GraphKind::path;
  if (name == "complete") return GraphKind::complete;
  throw GraphError("unknown graph kind: " + name);
}

StochasticGraph generate(GraphKind kind, const GenParams& params,
                         const ProbModel& pm, uint64_t seed) {
  if (params.n < 1) throw GraphError("generator requires n >= 1");
  if (pm.lo <= 0.0 || pm.hi > 1.0 || pm.lo > pm.hi)
    throw GraphError("probability range must be within (0, 1]");
  if (params.density < 0.0 || params.density > 1.0)
    throw GraphError("edge density must be in [0, 1]");

  std::vector<Edge> edges;
  std::optional<Bipartition> bip;
  Rng topo(derive_seed(seed, "topology"));

  switch (kind) {
    case GraphKind::erdos_renyi:
      for (int u = 0; u < params.n; ++u)
        for (int v = u + 1; v < params.n; ++v)
          if (topo.bernoulli(params.density)) edges.push_back({u, v});
      break;
    case GraphKind::random_bipartite: {
      int nl = params.n;
      int nr = params.n_right > 0 ? params.n_right : params.n;
      Bipartition b;
      b.is_left.assign(nl + nr, 0);
      for (int u = 0; u < nl; ++u) b.is_left[u] = 1;
      for (int u = 0; u < nl; ++u)
        for (int v = nl; v < nl + nr; ++v)
          if (topo.bernoulli(params.density)) edges.push_back({u, v});
      bip = std::move(b);
      break;
    }
    case GraphKind::star:
      for (int v = 1; v < params.n; ++v) edges.push_back({0, v});
      break;
    case GraphKind::path:
      for (int v = 1; v < params.n; ++v) edges.push_back({v - 1, v});
      break;
    case GraphKind::complete:
      for (int u = 0; u < params.n; ++u)
        for (int v = u + 1; v < params.n; ++v) edges.push_back({u, v});
      break;
  }

  int n_total = params.n;
  if (kind == GraphKind::random_bipartite)
    n_total = params.n + (params.n_right > 0 ? params.n_right : params.n);
  if (kind == GraphKind::star && bip == std::nullopt) {
    Bipartition b;
    b.is_left.assign(params.n, 0);
    b.is_left[0] = 1;
    bip = std::move(b);
  }

  StochasticGraph sg;
  sg.graph = BaseGraph(n_total, std::move(edges));
  sg.prob.resize(sg.graph.m());
  Rng pr(derive_seed(seed, "prob"));
  for (int e = 0; e < sg.graph.m(); ++e)
    sg.prob[e] = pm.lo == pm.hi ? pm.lo : pm.lo + (pm.hi - pm.lo) * pr.uniform();
  sg.bipartition = std::move(bip);
  sg.validate();
  return sg;
}

StochasticGraph parse_graph(std::istream& in, const std::string& origin) {
  auto fail = [&](int line, const std::string& what) {
    throw GraphError(origin + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  int lineno = 0;
  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      size_t h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank) return true;
    }
    return false;
  };

  if (!next_content_line()) throw GraphError(origin + ": empty graph file");
  int n, m;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m)) fail(lineno, "expected header 'n m'");
  }
  if (n < 0 || m < 0) fail(lineno, "negative n or m");

  std::vector<Edge> edges;
  std::vector<double> prob;
  edges.reserve(m);
  prob.reserve(m);
  for (int i = 0; i < m; ++i) {
    if (!next_content_line()) fail(lineno, "unexpected end of file: missing edges");
    std::istringstream es(line);
    int u, v;
    double p;
    if (!(es >> u >> v >> p)) fail(lineno, "expected edge line 'u v p'");
    if (u == v) fail(lineno, "self-loop on vertex " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n) fail(lineno, "vertex id out of range");
    if (u > v) std::swap(u, v);
    if (!std::isfinite(p) || p <= 0.0 || p > 1.0)
      fail(lineno, "probability out of range");
    edges.push_back({u, v});
    prob.push_back(p);
  }

  std::optional<Bipartition> bip;
  if (next_content_line()) {
    std::istringstream ts(line);
    std::string kw;
    ts >> kw;
    if (kw != "bipartition") fail(lineno, "unexpected trailer '" + kw + "'");
    Bipartition b;
    b.is_left.assign(n, 0);
    int v;
    while (ts >> v) {
      if (v < 0 || v >= n) fail(lineno, "bipartition vertex out of range");
      b.is_left[v] = 1;
    }
    bip = std::move(b);
  }

  StochasticGraph sg;
  try {
    sg.graph = BaseGraph(n, std::move(edges));
  } catch (const GraphError& e) {
    throw GraphError(origin + ": " + e.what());
  }
  sg.prob = std::move(prob);
  sg.bipartition = std::move(bip);
  sg.validate();
  return sg;
}

StochasticGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path);
  return parse_graph(in, path);
}

void write_graph(const StochasticGraph& sg, std::ostream& out) {
  out << sg.graph.n() << ' ' << sg.graph.m() << '\n';
  out.precision(17);
  for (int e = 0; e < sg.graph.m(); ++e) {
    const Edge& ed = sg.graph.edge(e);
    out << ed.u << ' ' << ed.v << ' ' << sg.prob[e] << '\n';
  }
  if (sg.bipartition) {
    out << "bipartition";
    for (int v = 0; v < sg.graph.n(); ++v)
      if (sg.bipartition->is_left[v]) out << ' ' << v;
    out << '\n';
  }
}

void save_graph(const StochasticGraph& sg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot open " + path + " for writing");
  write_graph(sg, out);
}

}  // namespace dsg
