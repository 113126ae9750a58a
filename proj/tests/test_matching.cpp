#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/matching.hpp"
#include "dsg/oracles.hpp"

using namespace dsg;

namespace {

StochasticGraph er(int n, double density, double lo, double hi, uint64_t seed) {
  GenParams gp;
  gp.n = n;
  gp.density = density;
  return generate(GraphKind::erdos_renyi, gp, ProbModel::range(lo, hi), seed);
}

}  // namespace

TEST_CASE("the two-round ratio curve and its maximizer") {
  CHECK(two_round_ratio(0.442854) == doctest::Approx(0.398693).epsilon(1e-4));
  double a = optimal_alpha();
  CHECK(a == doctest::Approx(0.442854).epsilon(1e-3));
  CHECK(two_round_ratio(a) >= two_round_ratio(a - 0.01));
  CHECK(two_round_ratio(a) >= two_round_ratio(a + 0.01));
  CHECK(1.0 - std::exp(-1.0) == doctest::Approx(0.63212).epsilon(1e-4));
}

TEST_CASE("side assignment is a pure function of the shared seed") {
  StochasticGraph sg = er(30, 0.2, 0.3, 0.8, 3);
  SideAssignment a = assign_sides(sg, 0.44, 123);
  SideAssignment b = assign_sides(sg, 0.44, 123);
  SideAssignment c = assign_sides(sg, 0.44, 124);
  CHECK(a.active == b.active);
  CHECK(a.active != c.active);

  GenParams gp;
  gp.n = 4;
  gp.n_right = 3;
  gp.density = 1.0;
  StochasticGraph bip =
      generate(GraphKind::random_bipartite, gp, ProbModel::uniform(0.5), 5);
  SideAssignment sides = bipartite_sides(bip);
  for (int v = 0; v < bip.graph.n(); ++v)
    CHECK(sides.active[v] == bip.bipartition->is_left[v]);
}

TEST_CASE("hallucinations copy the truth on passive-neighbor edges") {
  StochasticGraph sg = er(12, 0.4, 0.3, 0.8, 7);
  SideAssignment sides = assign_sides(sg, 0.5, 11);
  Realization real = sample_realization(sg, 13);
  int v = -1;
  for (int u = 0; u < sg.graph.n() && v < 0; ++u)
    if (sides.active[u]) v = u;
  REQUIRE(v >= 0);
  std::vector<std::pair<int, int>> incident;
  for (int e : sg.graph.incident(v))
    if (real.present(e)) incident.push_back({e, sg.graph.other_endpoint(e, v)});
  std::vector<uint8_t> h = hallucinate(sg, v, sides, incident, 17);
  REQUIRE(h.size() == static_cast<size_t>(sg.graph.m()));
  for (int e : sg.graph.incident(v)) {
    int u = sg.graph.other_endpoint(e, v);
    if (!sides.active[u]) CHECK(h[e] == (real.present(e) ? 1 : 0));
  }
  // deterministic per stream seed
  CHECK(h == hallucinate(sg, v, sides, incident, 17));
  CHECK(h != hallucinate(sg, v, sides, incident, 18));
}

TEST_CASE("two-round protocol takes exactly two 1-bit rounds") {
  StochasticGraph sg = er(14, 0.35, 0.4, 0.9, 19);
  TwoRoundMatchingProtocol proto(sg, 0.442854);
  for (uint64_t t = 0; t < 150; ++t) {
    Realization real = sample_realization(sg, derive_seed(20, "real", t));
    RunResult rr = run(sg, real, proto, derive_seed(20, "proto", t));
    CHECK(rr.trace.rounds == 2);
    CHECK(rr.trace.max_payload_bits <= 1);
    Matching m = matching_from_partners(sg.graph, rr.outputs, real);
    CHECK(is_valid_matching(sg.graph, real, m));
  }
}

TEST_CASE("a realized single-edge bipartite instance always matches") {
  GenParams gp;
  gp.n = 1;
  gp.n_right = 1;
  gp.density = 1.0;
  StochasticGraph sg =
      generate(GraphKind::random_bipartite, gp, ProbModel::uniform(1.0), 23);
  REQUIRE(sg.graph.m() == 1);
  TwoRoundMatchingProtocol proto(sg);  // bipartite mode
  Realization real(sg.graph, {1});
  RunResult rr = run(sg, real, proto, 29);
  CHECK(rr.outputs[0] == 1.0);
  CHECK(rr.outputs[1] == 0.0);
}

TEST_CASE("degree-cap sparsifier respects the cap") {
  StochasticGraph sg = er(25, 0.5, 0.5, 0.5, 31);
  for (int cap : {1, 2, 4}) {
    std::vector<uint8_t> q = degree_cap_sparsifier(sg, cap, 37);
    for (int v = 0; v < sg.graph.n(); ++v) {
      int d = 0;
      for (int e : sg.graph.incident(v)) d += q[e];
      CHECK(d <= cap);
    }
  }
  // cap = 1 is a matching of the base graph
  std::vector<uint8_t> q1 = degree_cap_sparsifier(sg, 1, 37);
  std::vector<int> used(sg.graph.n(), 0);
  for (int e = 0; e < sg.graph.m(); ++e)
    if (q1[e]) {
      CHECK(++used[sg.graph.edge(e).u] == 1);
      CHECK(++used[sg.graph.edge(e).v] == 1);
    }
}

TEST_CASE("high-degree pruning drops a realized star center") {
  GenParams gp;
  gp.n = 8;
  StochasticGraph sg = generate(GraphKind::star, gp, ProbModel::uniform(1.0), 41);
  std::vector<uint8_t> all(sg.graph.m(), 1);
  Realization real(sg.graph, all);
  PrunedInstance pr = prune_high_degree(sg.graph, all, real, 5.0);
  CHECK(pr.v_bad[0] == 1);
  for (int v = 1; v < sg.graph.n(); ++v) CHECK(pr.v_bad[v] == 0);
  for (int e = 0; e < sg.graph.m(); ++e) CHECK(pr.induced[e] == 0);
}

TEST_CASE("the matching schedule depends only on degree bound and delta") {
  MatchingSchedule a = MatchingSchedule::make(16, 0.25);
  MatchingSchedule b = MatchingSchedule::make(16, 0.25);
  CHECK(a.total_rounds() == b.total_rounds());
  CHECK(a.total_rounds() ==
        3 * a.phases + [&] {
          int s = 0;
          for (int j = 1; j <= a.stages; ++j) s += a.stage_rounds(j);
          return s;
        }());
  CHECK(a.stages == 3);  // ceil(1/0.25) - 1
  CHECK(MatchingSchedule::make(64, 0.25).total_rounds() > a.total_rounds());
}

TEST_CASE("distributed matching is valid and maximal on the allowed edges") {
  StochasticGraph sg = er(20, 0.3, 0.5, 0.5, 43);
  std::vector<uint8_t> allowed(sg.graph.m(), 1);
  DistributedMatchingProtocol proto(sg, allowed, 20, 0.5);
  for (uint64_t t = 0; t < 25; ++t) {
    Realization real = sample_realization(sg, derive_seed(44, "real", t));
    RunResult rr = run(sg, real, proto, derive_seed(44, "proto", t),
                       proto.schedule().total_rounds() + 1);
    CHECK(rr.trace.rounds == proto.schedule().total_rounds());
    Matching m = matching_from_partners(sg.graph, rr.outputs, real, &allowed);
    CHECK(is_valid_matching(sg.graph, real, m, &allowed));
    // maximality: no realized edge with both endpoints free
    for (int e = 0; e < sg.graph.m(); ++e) {
      const Edge& ed = sg.graph.edge(e);
      if (real.present(e))
        CHECK((rr.outputs[ed.u] >= 0.0 || rr.outputs[ed.v] >= 0.0));
    }
  }
}

TEST_CASE("distributed matching beats one half on paths it can augment") {
  // P5 realized entirely: greedy can leave 2 edges; stage 1 augments to
  // the optimum whenever the flip window finds it
  StochasticGraph sg;
  sg.graph = BaseGraph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  sg.prob = std::vector<double>(5, 1.0);
  std::vector<uint8_t> allowed(5, 1);
  DistributedMatchingProtocol proto(sg, allowed, 2, 0.4);
  Realization real(sg.graph, {1, 1, 1, 1, 1});
  int best = 0;
  for (uint64_t t = 0; t < 30; ++t) {
    RunResult rr = run(sg, real, proto, derive_seed(47, "proto", t),
                       proto.schedule().total_rounds() + 1);
    Matching m = matching_from_partners(sg.graph, rr.outputs, real, &allowed);
    best = std::max(best, static_cast<int>(m.edge_ids.size()));
  }
  CHECK(best == 3);
}

TEST_CASE("poly-eps pipeline rejects non-uniform probabilities and bad eps") {
  StochasticGraph nonuniform = er(10, 0.5, 0.2, 0.8, 53);
  Realization real = sample_realization(nonuniform, 54);
  CHECK_THROWS_AS(matching_polyeps_pipeline(nonuniform, 0.3, {}, real, 1),
                  GraphError);

  StochasticGraph uniform = er(10, 0.5, 0.5, 0.5, 55);
  Realization real2 = sample_realization(uniform, 56);
  CHECK_THROWS_AS(matching_polyeps_pipeline(uniform, 0.7, {}, real2, 1),
                  GraphError);
}

TEST_CASE("poly-eps pipeline output is a valid deterministic matching") {
  StochasticGraph sg = er(40, 0.15, 0.5, 0.5, 57);
  PolyEpsParams params;
  params.theta = 12.0;
  Realization real = sample_realization(sg, 58);
  PolyEpsResult a = matching_polyeps_pipeline(sg, 0.3, params, real, 59);
  PolyEpsResult b = matching_polyeps_pipeline(sg, 0.3, params, real, 59);
  CHECK(a.matching.edge_ids == b.matching.edge_ids);
  CHECK(a.trace.rounds == b.trace.rounds);
  CHECK(is_valid_matching(sg.graph, real, a.matching));
  CHECK(a.theta == 12.0);
  CHECK(a.cap > 0);
}
