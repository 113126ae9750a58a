#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/mds.hpp"

using namespace dsg;

namespace {

StochasticGraph star(int n, double p, uint64_t seed) {
  GenParams gp;
  gp.n = n;
  return generate(GraphKind::star, gp, ProbModel::uniform(p), seed);
}

StochasticGraph er(int n, double density, double lo, double hi, uint64_t seed) {
  GenParams gp;
  gp.n = n;
  gp.density = density;
  return generate(GraphKind::erdos_renyi, gp, ProbModel::range(lo, hi), seed);
}

std::vector<uint8_t> to_set(const std::vector<double>& outputs) {
  std::vector<uint8_t> s(outputs.size());
  for (size_t i = 0; i < outputs.size(); ++i) s[i] = outputs[i] > 0.5;
  return s;
}

}  // namespace

TEST_CASE("ranking puts the star center first") {
  StochasticGraph sg = star(10, 0.6, 1);
  Ranking rk = rank_vertices(sg);
  CHECK(rk.order[0] == 0);
  CHECK(rk.rank_of[0] == 0);
  // expected fresh coverage of the center: itself plus p per leaf
  CHECK(rk.w_tilde[0] == doctest::Approx(1.0 + 9 * 0.6));
  // after the center, a leaf's fresh coverage is its own uncovered mass
  CHECK(rk.w_tilde[1] == doctest::Approx(1.0 - 0.6));
}

TEST_CASE("ranking is a permutation with deterministic ties") {
  StochasticGraph sg = er(20, 0.3, 0.2, 0.8, 3);
  Ranking rk = rank_vertices(sg);
  std::vector<uint8_t> seen(sg.graph.n(), 0);
  for (int v : rk.order) {
    CHECK(seen[v] == 0);
    seen[v] = 1;
  }
  for (int v = 0; v < sg.graph.n(); ++v) CHECK(rk.order[rk.rank_of[v]] == v);
  Ranking again = rank_vertices(sg);
  CHECK(rk.order == again.order);
}

TEST_CASE("one round, one bit, at most one message per vertex") {
  StochasticGraph sg = er(18, 0.35, 0.3, 0.9, 5);
  Ranking rk = rank_vertices(sg);
  MdsProtocol proto(sg, rk);
  for (uint64_t t = 0; t < 300; ++t) {
    Realization real = sample_realization(sg, derive_seed(6, "real", t));
    RunResult rr = run(sg, real, proto, derive_seed(6, "proto", t));
    CHECK(rr.trace.rounds == 1);
    CHECK(rr.trace.max_payload_bits <= 1);
    CHECK(rr.trace.total_messages <= sg.graph.n());
    CHECK(dominates(sg.graph, real, to_set(rr.outputs)));
  }
}

TEST_CASE("a fully realized star selects exactly the center") {
  StochasticGraph sg = star(12, 1.0, 7);
  Ranking rk = rank_vertices(sg);
  MdsProtocol proto(sg, rk);
  Realization real(sg.graph, std::vector<uint8_t>(sg.graph.m(), 1));
  RunResult rr = run(sg, real, proto, 8);
  CHECK(rr.outputs[0] == 1.0);
  for (int v = 1; v < sg.graph.n(); ++v) CHECK(rr.outputs[v] == 0.0);
}

TEST_CASE("dominates is exact") {
  BaseGraph p3(3, {{0, 1}, {1, 2}});
  Realization real(p3, {1, 1});
  CHECK(dominates(p3, real, {0, 1, 0}));
  CHECK_FALSE(dominates(p3, real, {1, 0, 0}));
  Realization broken(p3, {1, 0});
  CHECK_FALSE(dominates(p3, broken, {0, 1, 0}));  // vertex 2 is isolated
  CHECK(dominates(p3, broken, {0, 1, 1}));
}

TEST_CASE("diagnostics flag nothing on a deterministic realization") {
  StochasticGraph sg = er(16, 0.4, 1.0, 1.0, 9);
  Ranking rk = rank_vertices(sg);
  Realization real(sg.graph, std::vector<uint8_t>(sg.graph.m(), 1));
  MdsDiagnostics d = classify_bad_costly(sg, rk, real);
  for (int i = 0; i < sg.graph.n(); ++i) {
    CHECK(d.bad[i] == 0);
    CHECK(d.costly[i] == 0);
    CHECK(d.nu[i] == -1);
  }
  CHECK(d.w_realized.size() == static_cast<size_t>(sg.graph.n()));
}

TEST_CASE("small expected degree is clamped up to e") {
  StochasticGraph sg;
  sg.graph = BaseGraph(2, {{0, 1}});
  sg.prob = {0.5};
  Ranking rk = rank_vertices(sg);
  MdsDiagnostics d = classify_bad_costly(sg, rk, sample_realization(sg, 10));
  CHECK(d.delta_clamped);
  CHECK(d.delta_bar == doctest::Approx(std::exp(1.0)));
}
