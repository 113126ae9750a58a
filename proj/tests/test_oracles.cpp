#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsg/graph.hpp"
#include "dsg/oracles.hpp"

using namespace dsg;

namespace {

EdgeSubgraph full(const BaseGraph& g) { return EdgeSubgraph::of(g); }

BaseGraph cycle(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    edges.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
  return BaseGraph(n, std::move(edges));
}

}  // namespace

TEST_CASE("exact solvers on named graphs") {
  SUBCASE("K4") {
    BaseGraph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(exact_min_vertex_cover(full(k4)).size() == 3);
    CHECK(max_matching(full(k4)).edge_ids.size() == 2);
    CHECK(exact_min_dominating_set(full(k4)).size() == 1);
  }
  SUBCASE("P4") {
    BaseGraph p4(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(exact_min_vertex_cover(full(p4)).size() == 2);
    CHECK(max_matching(full(p4)).edge_ids.size() == 2);
    CHECK(exact_min_dominating_set(full(p4)).size() == 2);
  }
  SUBCASE("C5 needs a blossom") {
    BaseGraph c5 = cycle(5);
    CHECK(max_matching(full(c5)).edge_ids.size() == 2);
    CHECK(exact_min_vertex_cover(full(c5)).size() == 3);
  }
  SUBCASE("C9 odd cycle chain") {
    BaseGraph c9 = cycle(9);
    CHECK(max_matching(full(c9)).edge_ids.size() == 4);
  }
}

TEST_CASE("matching respects the present-edge mask") {
  BaseGraph p4(4, {{0, 1}, {1, 2}, {2, 3}});
  EdgeSubgraph g{&p4, {1, 1, 0}};
  Matching m = max_matching(g);
  CHECK(m.edge_ids.size() == 1);
  std::vector<int> partners = matching_partners(g, m);
  CHECK(partners[3] == -1);
  int matched = 0;
  for (int v = 0; v < 4; ++v) matched += partners[v] >= 0;
  CHECK(matched == 2);
}

TEST_CASE("fractional cover is a sandwich and half-integral") {
  BaseGraph c5 = cycle(5);
  FractionalVertexCover f = optimal_fractional_vertex_cover(full(c5));
  CHECK(f.total == doctest::Approx(2.5));
  for (double x : f.value) {
    bool half_integral = x == 0.0 || x == 0.5 || x == 1.0;
    CHECK(half_integral);
  }
  for (const Edge& e : c5.edges())
    CHECK(f.value[e.u] + f.value[e.v] >= 1.0 - 1e-12);
  CHECK(f.total >= max_matching(full(c5)).edge_ids.size());
  CHECK(f.total <= static_cast<double>(exact_min_vertex_cover(full(c5)).size()));
}

TEST_CASE("size guards refuse oversized instances") {
  GenParams gp;
  gp.n = 30;
  StochasticGraph sg =
      generate(GraphKind::complete, gp, ProbModel::uniform(0.5), 3);
  CHECK_THROWS_AS(exact_min_vertex_cover(full(sg.graph)), BudgetError);
  CHECK_THROWS_AS(exact_min_dominating_set(full(sg.graph)), BudgetError);
}

TEST_CASE("paired conditional-f estimates satisfy the cover constraint exactly") {
  GenParams gp;
  gp.n = 10;
  gp.density = 0.4;
  StochasticGraph sg =
      generate(GraphKind::erdos_renyi, gp, ProbModel::range(0.2, 0.8), 13);
  ConditionalF f = estimate_conditional_f(sg, 200, 99);
  CHECK(f.trials == 200);
  for (int e = 0; e < sg.graph.m(); ++e)
    CHECK(f.of(e, true) + f.of(e, false) >= 1.0 - 1e-12);
}

TEST_CASE("match marginals are consistent") {
  GenParams gp;
  gp.n = 8;
  gp.density = 0.5;
  StochasticGraph sg =
      generate(GraphKind::erdos_renyi, gp, ProbModel::range(0.3, 0.9), 17);
  MatchMarginals mm = estimate_match_marginals(sg, 400, 5);
  double vertex_sum = 0.0, edge_sum = 0.0;
  for (double c : mm.vertex) vertex_sum += c;
  for (double q : mm.edge) edge_sum += q;
  CHECK(vertex_sum == doctest::Approx(2.0 * mm.expected_matching));
  CHECK(edge_sum == doctest::Approx(mm.expected_matching));
}

TEST_CASE("tail expectation identity") {
  std::vector<long> samples = {0, 1, 1, 2, 3, 3, 3, 5, 7, 7};
  for (long ell : {0L, 1L, 2L, 4L, 7L, 9L}) {
    TailIdentity ti = tail_expectation_check(samples, ell);
    CHECK(ti.lhs == doctest::Approx(ti.rhs).epsilon(1e-12));
  }
}
