#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/oracles.hpp"
#include "dsg/vc.hpp"

using namespace dsg;

namespace {

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

TEST_CASE("edge association ties break to the smaller endpoint") {
  StochasticGraph sg;
  sg.graph = BaseGraph(2, {{0, 1}});
  sg.prob = {0.5};
  ConditionalF f;
  f.f = {0.7, 0.7};  // symmetric: both sides equally good
  EdgeAssociation assoc = build_edge_association(sg, f);
  CHECK(assoc.owner(sg.graph, 0) == 0);
  CHECK(assoc.owned[0] == std::vector<int>{0});
  CHECK(assoc.owned[1].empty());
}

TEST_CASE("cover probability closed form") {
  // v owning edges with p = 0.5 and 0.25: Pr(v in C) = 1 - 0.5 * 0.75
  StochasticGraph sg;
  sg.graph = BaseGraph(3, {{0, 1}, {0, 2}});
  sg.prob = {0.5, 0.25};
  ConditionalF f;
  f.f = {1.0, 0.0, 1.0, 0.0};  // vertex 0 owns both edges
  EdgeAssociation assoc = build_edge_association(sg, f);
  CHECK(cover_probability_closed_form(sg, assoc, 0) ==
        doctest::Approx(1.0 - 0.5 * 0.75));
  CHECK(cover_probability_closed_form(sg, assoc, 1) == doctest::Approx(0.0));
}

TEST_CASE("zero-communication cover is valid with zero rounds") {
  StochasticGraph sg = er(20, 0.25, 0.2, 0.9, 31);
  ConditionalF f = estimate_conditional_f(sg, 200, 32);
  NoCommVcProtocol proto(sg, build_edge_association(sg, f));
  for (uint64_t t = 0; t < 200; ++t) {
    Realization real = sample_realization(sg, derive_seed(33, "real", t));
    RunResult rr = run(sg, real, proto, derive_seed(33, "proto", t));
    CHECK(rr.trace.rounds == 0);
    CHECK(rr.trace.total_messages == 0);
    CHECK(covers_realization(sg.graph, real, to_set(rr.outputs)));
  }
}

TEST_CASE("ordering cover expectation on a single edge is p") {
  StochasticGraph sg;
  sg.graph = BaseGraph(2, {{0, 1}});
  sg.prob = {0.37};
  CHECK(ordering_cover_expectation(sg, {0, 1}) == doctest::Approx(0.37));
  CHECK(ordering_cover_expectation(sg, {1, 0}) == doctest::Approx(0.37));
}

TEST_CASE("ordering cover contains exactly the early endpoints") {
  // path 0-1-2, order 0,1,2, everything realized
  StochasticGraph sg;
  sg.graph = BaseGraph(3, {{0, 1}, {1, 2}});
  sg.prob = {0.9, 0.9};
  Realization real(sg.graph, {1, 1});
  std::vector<int> cover = ordering_cover(sg, {0, 1, 2}, real);
  CHECK(cover == std::vector<int>{0, 1});
  CHECK(covers_realization(sg.graph, real, {1, 1, 0}));
  CHECK_FALSE(covers_realization(sg.graph, real, {1, 0, 0}));
}

TEST_CASE("sequential matching is a valid matching below the cover") {
  StochasticGraph sg = er(18, 0.3, 0.3, 0.9, 41);
  std::vector<int> order = default_ordering(sg);
  for (uint64_t t = 0; t < 100; ++t) {
    Realization real = sample_realization(sg, derive_seed(42, "real", t));
    SequentialMatchingResult seq =
        sequential_random_matching(sg, order, real, derive_seed(42, "m", t));
    std::vector<int> used(sg.graph.n(), 0);
    for (int e : seq.matching.edge_ids) {
      CHECK(real.present(e));
      CHECK(++used[sg.graph.edge(e).u] == 1);
      CHECK(++used[sg.graph.edge(e).v] == 1);
    }
  }
}

TEST_CASE("constants derived from epsilon") {
  VCConstants c = VCConstants::make(0.25);
  CHECK(c.eps1 == doctest::Approx(0.015625));
  CHECK(c.eps2 == doctest::Approx(0.265625));
  CHECK(c.eps3 == doctest::Approx(0.234375));
  CHECK(c.xi == doctest::Approx(1.265625 / 0.015625));
  CHECK(c.eps4 == doctest::Approx(0.5));
  CHECK(c.round_budget() == 1 + static_cast<int>(std::ceil(c.xi / c.eps3)));
  CHECK_THROWS_AS(VCConstants::make(0.3), GraphError);
  CHECK_THROWS_AS(VCConstants::make(0.0), GraphError);
}

TEST_CASE("water filling exhausts budgets away from frozen vertices") {
  StochasticGraph sg = er(24, 0.3, 0.2, 0.9, 51);
  VCConstants c = VCConstants::make(0.25);
  WaterfillState st = waterfilling(sg, c);
  for (int e = 0; e < sg.graph.m(); ++e) {
    const Edge& ed = sg.graph.edge(e);
    CHECK(st.phi_edge[e] <= c.eps1 * sg.prob[e] + 1e-12);
    if (!st.in_f[ed.u] && !st.in_f[ed.v])
      CHECK(st.phi_edge[e] == doctest::Approx(c.eps1 * sg.prob[e]).epsilon(1e-12));
  }
  for (int v = 0; v < sg.graph.n(); ++v) {
    double sum = 0.0;
    for (int e : sg.graph.incident(v)) sum += st.phi_edge[e];
    CHECK(sum == doctest::Approx(st.phi_vertex[v]).epsilon(1e-12));
    CHECK(st.phi_vertex[v] <= 1.0 + 1e-12);
    if (st.in_f[v]) CHECK(st.phi_vertex[v] == doctest::Approx(1.0));
  }
}

TEST_CASE("a heavy star freezes its center") {
  GenParams gp;
  gp.n = 100;
  StochasticGraph sg = generate(GraphKind::star, gp, ProbModel::uniform(1.0), 1);
  VCConstants c = VCConstants::make(0.25);
  WaterfillState st = waterfilling(sg, c);
  CHECK(st.in_f[0] == 1);
  CHECK(st.phi_vertex[0] == doctest::Approx(1.0));
  CHECK(st.in_f[1] == 0);
}

TEST_CASE("realized chi scales by 1/p") {
  StochasticGraph sg = er(15, 0.3, 0.2, 0.8, 61);
  VCConstants c = VCConstants::make(0.25);
  WaterfillState st = waterfilling(sg, c);
  Realization real = sample_realization(sg, 62);
  ChiState chi = realize_chi(st, sg, real, c);
  for (int e = 0; e < sg.graph.m(); ++e) {
    if (real.present(e))
      CHECK(chi.chi_edge[e] == doctest::Approx(st.phi_edge[e] / sg.prob[e]));
    else
      CHECK(chi.chi_edge[e] == 0.0);
  }
  for (int v = 0; v < sg.graph.n(); ++v)
    if (chi.in_b[v]) CHECK(chi.in_b_plus[v] == 1);
}

TEST_CASE("distributed pipeline equals the serial reference bit for bit") {
  StochasticGraph sg = er(16, 0.3, 0.2, 0.9, 71);
  VCConstants c = VCConstants::make(0.25);
  WaterfillState st = waterfilling(sg, c);
  DistributedVcProtocol proto(sg, st, c);
  for (uint64_t t = 0; t < 40; ++t) {
    Realization real = sample_realization(sg, derive_seed(72, "real", t));
    VcPipelineResult ref = vc_pipeline_reference(st, sg, real, c);
    RunResult rr = run(sg, real, proto, derive_seed(72, "proto", t),
                       c.round_budget() + 1);
    CHECK(to_set(rr.outputs) == ref.in_cover);
    CHECK(rr.trace.rounds <= c.round_budget());
    CHECK(rr.trace.max_payload_bits <= 1);
    CHECK(covers_realization(sg.graph, real, ref.in_cover));
    std::vector<double> y = witness_fractional_matching(sg, real, ref, c);
    for (int v = 0; v < sg.graph.n(); ++v) {
      double sum = 0.0;
      for (int e : sg.graph.incident(v)) sum += y[e];
      CHECK(sum <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("reference pipeline is deterministic in the realization") {
  StochasticGraph sg = er(14, 0.35, 0.3, 0.9, 81);
  VCConstants c = VCConstants::make(0.1);
  WaterfillState st = waterfilling(sg, c);
  Realization real = sample_realization(sg, 82);
  VcPipelineResult a = vc_pipeline_reference(st, sg, real, c);
  VcPipelineResult b = vc_pipeline_reference(st, sg, real, c);
  CHECK(a.in_cover == b.in_cover);
  CHECK(a.psi_edge == b.psi_edge);
  CHECK(a.iterations == b.iterations);
}
