#include "dsg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "dsg/engine.hpp"
#include "dsg/matching.hpp"
#include "dsg/mds.hpp"
#include "dsg/oracles.hpp"
#include "dsg/poisson.hpp"
#include "dsg/vc.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsg {

std::string result_csv_header() {
  return "instance,algorithm,mean,stderr,baseline_mean,baseline_stderr,"
         "ratio,rounds,max_bits,wall_seconds";
}

std::string to_csv(const ResultRow& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.instance << ',' << r.algorithm << ',' << r.mean << ',' << r.stderr_
     << ',' << r.baseline_mean << ',' << r.baseline_stderr << ',' << r.ratio
     << ',' << r.rounds << ',' << r.max_bits << ',' << r.wall_seconds;
  return os.str();
}

PairedRatio paired_ratio(const std::vector<double>& numer,
                         const std::vector<double>& denom) {
  if (numer.size() != denom.size() || numer.empty())
    throw std::invalid_argument("paired samples must align");
  MCEstimate a = summarize(numer), b = summarize(denom);
  if (b.mean == 0.0) throw std::invalid_argument("baseline mean is zero");
  PairedRatio pr;
  pr.ratio = a.mean / b.mean;
  // stderr of the ratio from the residuals d_i = a_i - R b_i
  double ss = 0.0;
  for (size_t i = 0; i < numer.size(); ++i) {
    double d = numer[i] - pr.ratio * denom[i];
    ss += d * d;
  }
  long n = static_cast<long>(numer.size());
  if (n > 1) {
    double var = ss / static_cast<double>(n - 1);
    pr.stderr_ = std::sqrt(var / static_cast<double>(n)) / b.mean;
  }
  return pr;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Instance {
  std::string name;
  StochasticGraph sg;
};

ProbModel pick_prob_model(Rng& rng, bool mixed) {
  if (mixed && rng.bernoulli(0.5)) return ProbModel::range(0.1, 0.9);
  double p = 0.3 + 0.5 * rng.uniform();
  return ProbModel::uniform(p);
}

std::vector<Instance> er_suite(int count, int n_lo, int n_hi, double deg_lo,
                               double deg_hi, bool mixed_p, uint64_t seed) {
  std::vector<Instance> out;
  Rng rng(derive_seed(seed, "suite"));
  for (int i = 0; i < count; ++i) {
    int n = n_lo + static_cast<int>(rng.below(n_hi - n_lo + 1));
    double deg = deg_lo + (deg_hi - deg_lo) * rng.uniform();
    GenParams gp;
    gp.n = n;
    gp.density = std::min(1.0, deg / std::max(1, n - 1));
    StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                  pick_prob_model(rng, mixed_p), rng.next());
    out.push_back({"er_n" + std::to_string(n) + "_i" + std::to_string(i),
                   std::move(sg)});
  }
  return out;
}

std::vector<Instance> bipartite_suite(int count, int side_lo, int side_hi,
                                      uint64_t seed) {
  std::vector<Instance> out;
  Rng rng(derive_seed(seed, "bsuite"));
  for (int i = 0; i < count; ++i) {
    GenParams gp;
    gp.n = side_lo + static_cast<int>(rng.below(side_hi - side_lo + 1));
    gp.n_right = side_lo + static_cast<int>(rng.below(side_hi - side_lo + 1));
    gp.density = 0.35 + 0.3 * rng.uniform();
    StochasticGraph sg = generate(GraphKind::random_bipartite, gp,
                                  pick_prob_model(rng, true), rng.next());
    out.push_back({"bip_i" + std::to_string(i), std::move(sg)});
  }
  return out;
}

double sum_outputs(const std::vector<double>& outputs) {
  double s = 0.0;
  for (double x : outputs) s += x;
  return s;
}

double matched_pairs(const std::vector<double>& outputs) {
  int c = 0;
  for (double x : outputs) c += x >= 0.0;
  return c / 2.0;
}

std::vector<uint8_t> outputs_to_set(const std::vector<double>& outputs) {
  std::vector<uint8_t> s(outputs.size());
  for (size_t i = 0; i < outputs.size(); ++i) s[i] = outputs[i] > 0.5 ? 1 : 0;
  return s;
}

// ---------------------------------------------------------------------------
// Exhaustive baselines used only to audit the oracles (criterion 9)
// ---------------------------------------------------------------------------

int brute_min_vertex_cover(const EdgeSubgraph& g) {
  int n = g.n(), best = n;
  for (int mask = 0; mask < (1 << n); ++mask) {
    int size = __builtin_popcount(mask);
    if (size >= best) continue;
    bool ok = true;
    for (int e = 0; e < g.base->m() && ok; ++e) {
      if (!g.present[e]) continue;
      const Edge& ed = g.base->edge(e);
      if (!((mask >> ed.u) & 1) && !((mask >> ed.v) & 1)) ok = false;
    }
    if (ok) best = size;
  }
  return best;
}

int brute_max_matching(const EdgeSubgraph& g) {
  int n = g.n();
  std::vector<int> nb(n, 0);
  for (int e = 0; e < g.base->m(); ++e)
    if (g.present[e]) {
      const Edge& ed = g.base->edge(e);
      nb[ed.u] |= 1 << ed.v;
      nb[ed.v] |= 1 << ed.u;
    }
  // dp over the set of consumed vertices: lowest free vertex is skipped or
  // matched to a free neighbor
  std::vector<int> memo(size_t{1} << n, -1);
  auto rec = [&](auto&& self, int used) -> int {
    if (used == (1 << n) - 1) return 0;
    int& slot = memo[used];
    if (slot >= 0) return slot;
    int v = __builtin_ctz(~used);
    int best = self(self, used | (1 << v));
    for (int rest = nb[v] & ~used; rest; rest &= rest - 1) {
      int u = __builtin_ctz(rest);
      best = std::max(best, 1 + self(self, used | (1 << v) | (1 << u)));
    }
    return slot = best;
  };
  return rec(rec, 0);
}

int brute_min_dominating_set(const EdgeSubgraph& g) {
  int n = g.n(), best = n;
  std::vector<int> closed(n);
  for (int v = 0; v < n; ++v) {
    closed[v] = 1 << v;
    for (int e : g.base->incident(v))
      if (g.present[e]) closed[v] |= 1 << g.base->other_endpoint(e, v);
  }
  int all = (1 << n) - 1;
  for (int mask = 0; mask < (1 << n); ++mask) {
    int size = __builtin_popcount(mask);
    if (size >= best) continue;
    int cov = 0;
    for (int v = 0; v < n; ++v)
      if ((mask >> v) & 1) cov |= closed[v];
    if (cov == all) best = size;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

bool c1_poisson_minimum(std::ostream& log) {
  auto t0 = Clock::now();
  RatioMinimum mn = minimize_ratio();
  double dt = seconds_since(t0);
  bool pass = std::abs(mn.lambda - 1.678347) <= 1e-4 &&
              std::abs(mn.ratio - 1.0 / 3.43068) <= 1e-5 && dt < 1.0;
  log << "  minimum at lambda=" << mn.lambda << " ratio=" << mn.ratio
      << " (target 1.678347, " << 1.0 / 3.43068 << "), " << dt << "s\n";
  return pass;
}

bool c2_poisson_grid(std::ostream& log) {
  auto t0 = Clock::now();
  const int points = 100000;
  double worst_ratio = 1e300, worst_efy = 0.0;
  for (int i = 1; i <= points; ++i) {
    double lam = 20.0 * i / points;
    PoissonPoint pt = evaluate_point(lam);
    worst_ratio = std::min(worst_ratio, pt.ratio);
    worst_efy = std::max(worst_efy, std::abs(pt.efy - lam / 2.0));
  }
  double dt = seconds_since(t0);
  bool pass = worst_ratio >= 1.0 / 3.44 && worst_efy <= 1e-9 && dt < 10.0;
  log << "  grid of " << points << " points on (0,20]: min ratio "
      << worst_ratio << " (floor " << 1.0 / 3.44 << "), max |E[F*Y]-l/2| "
      << worst_efy << ", " << dt << "s\n";
  return pass;
}

bool c3_nocomm_vc(std::ostream& log) {
  const long validity_trials = 10000, ratio_trials = 400;
  std::vector<Instance> suite = er_suite(50, 8, 40, 2.5, 5.0, true, 0xC3);
  bool pass = true;
  double worst_margin = 1e300;
  long failures = 0;
  for (size_t i = 0; i < suite.size(); ++i) {
    const StochasticGraph& sg = suite[i].sg;
    uint64_t master = derive_seed(0xC3C3, "inst", i);
    ConditionalF f = estimate_conditional_f(sg, 300, derive_seed(master, "f"));
    NoCommVcProtocol proto(sg, build_edge_association(sg, f));
    std::vector<double> cover_sizes, frac_sizes;
    for (long t = 0; t < validity_trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      RunResult rr = run(sg, real, proto, derive_seed(master, "proto", t));
      if (rr.trace.rounds != 0 ||
          !covers_realization(sg.graph, real, outputs_to_set(rr.outputs))) {
        ++failures;
        continue;
      }
      if (t < ratio_trials) {
        cover_sizes.push_back(sum_outputs(rr.outputs));
        frac_sizes.push_back(
            optimal_fractional_vertex_cover(EdgeSubgraph::of(sg.graph, real))
                .total);
      }
    }
    PairedRatio pr = paired_ratio(cover_sizes, frac_sizes);
    double margin = 3.44 + 4.0 * pr.stderr_ - pr.ratio;
    worst_margin = std::min(worst_margin, margin);
    if (failures > 0 || margin < 0.0) pass = false;
  }
  log << "  50 instances x " << validity_trials
      << " runs: cover/round-0 failures " << failures
      << "; min slack of ratio<=3.44+4se: " << worst_margin << "\n";
  return pass;
}

bool c4_ordering_identity(std::ostream& log) {
  const long trials = 1500;
  std::vector<Instance> suite = er_suite(20, 8, 30, 2.0, 5.0, true, 0xC4);
  bool pass = true;
  double worst_z = 0.0;
  int chain_holds = 0;
  for (size_t i = 0; i < suite.size(); ++i) {
    const StochasticGraph& sg = suite[i].sg;
    uint64_t master = derive_seed(0xC4C4, "inst", i);
    std::vector<int> order = default_ordering(sg);
    double closed = ordering_cover_expectation(sg, order);
    std::vector<double> cover_sizes, chain_slack;
    for (long t = 0; t < trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      double c = static_cast<double>(ordering_cover(sg, order, real).size());
      cover_sizes.push_back(c);
      auto seq = sequential_random_matching(sg, order, real,
                                            derive_seed(master, "seq", t));
      chain_slack.push_back(
          3.0 * static_cast<double>(seq.matching.edge_ids.size()) - c);
    }
    MCEstimate est = summarize(cover_sizes);
    double z = est.stderr_ > 0 ? std::abs(est.mean - closed) / est.stderr_
                               : std::abs(est.mean - closed) * 1e12;
    worst_z = std::max(worst_z, z);
    if (z > 4.0) pass = false;
    MCEstimate slack = summarize(chain_slack);
    if (slack.mean + 4.0 * slack.stderr_ >= 0.0) ++chain_holds;  // reported
  }
  log << "  20 instances x " << trials << " trials: max |MC-closed|/se = "
      << worst_z << "; cover<=3*matching chain held on " << chain_holds
      << "/20 (reported, not asserted)\n";
  return pass;
}

bool c5_vc_pipeline(std::ostream& log) {
  bool pass = true;
  for (double eps : {0.25, 0.1}) {
    GenParams gp;
    gp.n = eps > 0.2 ? 20 : 12;
    gp.density = eps > 0.2 ? 0.24 : 0.3;
    StochasticGraph sg =
        generate(GraphKind::erdos_renyi, gp, ProbModel::range(0.2, 0.9),
                 derive_seed(0xC5C5, "gen", eps > 0.2 ? 0 : 1));
    VCConstants c = VCConstants::make(eps);
    WaterfillState st = waterfilling(sg, c);
    // budget equality on edges disjoint from the frozen set
    for (int e = 0; e < sg.graph.m(); ++e) {
      const Edge& ed = sg.graph.edge(e);
      double budget = c.eps1 * sg.prob[e];
      if (st.phi_edge[e] > budget + 1e-12) pass = false;
      if (!st.in_f[ed.u] && !st.in_f[ed.v] &&
          std::abs(st.phi_edge[e] - budget) > 1e-12)
        pass = false;
    }
    uint64_t master = derive_seed(0xC5C5, "mc", eps > 0.2 ? 0 : 1);
    const long trials = 10000, engine_trials = 60, ratio_trials = 300;
    std::vector<double> cover_sizes, opt_sizes;
    long bad_runs = 0;
    int max_rounds_seen = 0, max_bits_seen = 0;
    for (long t = 0; t < trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      VcPipelineResult pipe = vc_pipeline_reference(st, sg, real, c);
      bool ok = covers_realization(sg.graph, real, pipe.in_cover);
      std::vector<int> qdeg(sg.graph.n(), 0);
      for (int e = 0; e < sg.graph.m(); ++e)
        if (pipe.edge_in_qstar[e]) {
          ++qdeg[sg.graph.edge(e).u];
          ++qdeg[sg.graph.edge(e).v];
        }
      for (int v = 0; v < sg.graph.n(); ++v) {
        if (qdeg[v] > c.xi) ok = false;
        if (pipe.chi.in_b[v] && !pipe.chi.in_b_plus[v]) ok = false;
      }
      try {
        witness_fractional_matching(sg, real, pipe, c);
      } catch (const GraphError&) {
        ok = false;
      }
      if (t < engine_trials) {
        DistributedVcProtocol proto(sg, st, c);
        RunResult rr =
            run(sg, real, proto, derive_seed(master, "proto", t),
                c.round_budget() + 1);
        max_rounds_seen = std::max(max_rounds_seen, rr.trace.rounds);
        max_bits_seen = std::max(max_bits_seen, rr.trace.max_payload_bits);
        if (rr.trace.rounds > c.round_budget()) ok = false;
        if (outputs_to_set(rr.outputs) != pipe.in_cover) ok = false;
      }
      if (!ok) ++bad_runs;
      if (t < ratio_trials) {
        cover_sizes.push_back(sum_outputs(
            std::vector<double>(pipe.in_cover.begin(), pipe.in_cover.end())));
        opt_sizes.push_back(static_cast<double>(
            exact_min_vertex_cover(EdgeSubgraph::of(sg.graph, real)).size()));
      }
    }
    PairedRatio pr = paired_ratio(cover_sizes, opt_sizes);
    bool ratio_ok = pr.ratio <= 2.0 + 10.0 * eps + 4.0 * pr.stderr_;
    if (bad_runs > 0 || !ratio_ok || max_bits_seen > 1) pass = false;
    log << "  eps=" << eps << ": invalid runs " << bad_runs << "/" << trials
        << ", engine rounds<=" << max_rounds_seen << " (budget "
        << c.round_budget() << "), bits " << max_bits_seen << ", ratio "
        << pr.ratio << " <= " << 2.0 + 10.0 * eps << "+4se\n";
  }
  return pass;
}

bool c6_two_round_matching(std::ostream& log) {
  bool pass = true;
  const long trials = 600;
  double alpha = 0.442854;
  for (int variant = 0; variant < 2; ++variant) {
    std::vector<Instance> suite =
        variant == 0 ? er_suite(20, 10, 16, 2.5, 4.5, true, 0xC6)
                     : bipartite_suite(20, 5, 8, 0xC6B);
    double bound = variant == 0 ? two_round_ratio(alpha)
                                : 1.0 - std::exp(-1.0);
    double worst_margin = 1e300;
    long invalid = 0;
    for (size_t i = 0; i < suite.size(); ++i) {
      const StochasticGraph& sg = suite[i].sg;
      uint64_t master = derive_seed(0xC6C6, "inst", i + 100 * variant);
      std::unique_ptr<TwoRoundMatchingProtocol> proto;
      if (variant == 0)
        proto = std::make_unique<TwoRoundMatchingProtocol>(sg, alpha);
      else
        proto = std::make_unique<TwoRoundMatchingProtocol>(sg);
      std::vector<double> alg, base;
      for (long t = 0; t < trials; ++t) {
        Realization real =
            sample_realization(sg, derive_seed(master, "real", t));
        RunResult rr = run(sg, real, *proto, derive_seed(master, "proto", t));
        Matching m = matching_from_partners(sg.graph, rr.outputs, real);
        if (rr.trace.rounds != 2 || rr.trace.max_payload_bits > 1 ||
            !is_valid_matching(sg.graph, real, m))
          ++invalid;
        alg.push_back(matched_pairs(rr.outputs));
        base.push_back(static_cast<double>(
            max_matching(EdgeSubgraph::of(sg.graph, real)).edge_ids.size()));
      }
      PairedRatio pr = paired_ratio(alg, base);
      worst_margin = std::min(worst_margin, pr.ratio + 4.0 * pr.stderr_ - bound);
    }
    if (invalid > 0 || worst_margin < 0.0) pass = false;
    log << "  " << (variant == 0 ? "general" : "bipartite")
        << ": invalid runs " << invalid << ", min slack of ratio>=" << bound
        << "-4se: " << worst_margin << "\n";
  }
  // hallucinated bits of one edge, seen from two other vertices, must be
  // uncorrelated
  GenParams gp;
  gp.n = 4;
  StochasticGraph k4 = generate(GraphKind::complete, gp, ProbModel::uniform(0.5),
                                derive_seed(0xC6C6, "k4"));
  SideAssignment sides;
  sides.alpha = 0.5;
  sides.active.assign(4, 1);
  int e_far = -1;
  for (int e = 0; e < k4.graph.m(); ++e)
    if (k4.graph.edge(e).u == 2 && k4.graph.edge(e).v == 3) e_far = e;
  const long ctrials = 20000;
  double sa = 0, sb = 0, sab = 0;
  for (long t = 0; t < ctrials; ++t) {
    double a = hallucinate(k4, 0, sides, {},
                           derive_seed(0xC6C6, "ha", t))[e_far];
    double b = hallucinate(k4, 1, sides, {},
                           derive_seed(0xC6C6, "hb", t))[e_far];
    sa += a;
    sb += b;
    sab += a * b;
  }
  double ma = sa / ctrials, mb = sb / ctrials;
  double cov = sab / ctrials - ma * mb;
  double corr = cov / std::sqrt(ma * (1 - ma) * mb * (1 - mb));
  double corr_se = 1.0 / std::sqrt(static_cast<double>(ctrials));
  if (std::abs(corr) > 4.0 * corr_se) pass = false;
  log << "  hallucination cross-vertex correlation " << corr << " (|.| <= "
      << 4.0 * corr_se << ")\n";
  return pass;
}

bool c7_polyeps_pipeline(std::ostream& log) {
  bool pass = true;
  const double eps = 0.3;
  // non-uniform probabilities must be rejected
  {
    GenParams gp;
    gp.n = 8;
    gp.density = 0.5;
    StochasticGraph bad = generate(GraphKind::erdos_renyi, gp,
                                   ProbModel::range(0.2, 0.8), 7);
    Realization real = sample_realization(bad, 7);
    bool threw = false;
    try {
      matching_polyeps_pipeline(bad, eps, {}, real, 7);
    } catch (const GraphError&) {
      threw = true;
    }
    if (!threw) pass = false;
    log << "  non-uniform p rejected: " << (threw ? "yes" : "NO") << "\n";
  }
  // pruning inequality at tunable theta on matched expected degree
  for (double theta : {5.0, 10.0, 20.0}) {
    const double p = 0.5;
    GenParams gp;
    gp.n = 60;
    gp.density = std::min(1.0, theta * eps * eps / p / (gp.n - 1));
    StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                  ProbModel::uniform(p),
                                  derive_seed(0xC7C7, "gen", theta));
    PolyEpsParams params;
    params.theta = theta;
    uint64_t master = derive_seed(0xC7C7, "mc", theta);
    int cap = static_cast<int>(std::ceil(params.c_a / (std::pow(eps, 5.0) * p)));
    std::vector<uint8_t> q =
        degree_cap_sparsifier(sg, cap, derive_seed(master, "cap"));
    long cap_violations = 0;
    for (int v = 0; v < sg.graph.n(); ++v) {
      int d = 0;
      for (int e : sg.graph.incident(v)) d += q[e];
      if (d > cap) ++cap_violations;
    }
    std::vector<double> pruned_sizes, full_sizes;
    long degree_violations = 0;
    const long trials = 400;
    for (long t = 0; t < trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      PrunedInstance pr = prune_high_degree(sg.graph, q, real, theta);
      for (int v = 0; v < sg.graph.n(); ++v) {
        int d = 0;
        for (int e : sg.graph.incident(v)) d += pr.induced[e];
        if (d >= theta) ++degree_violations;
      }
      pruned_sizes.push_back(static_cast<double>(
          max_matching(EdgeSubgraph{&sg.graph, pr.induced}).edge_ids.size()));
      full_sizes.push_back(static_cast<double>(
          max_matching(EdgeSubgraph{&sg.graph, pr.q_star}).edge_ids.size()));
    }
    double factor =
        theta > 8.0 ? 1.0 - 16.0 / (9.0 * theta * (1.0 - 8.0 / theta)) : 0.0;
    PairedRatio pr = paired_ratio(pruned_sizes, full_sizes);
    bool ok = degree_violations == 0 && cap_violations == 0 &&
              pr.ratio + 4.0 * pr.stderr_ >= factor;
    if (!ok) pass = false;
    log << "  theta=" << theta << ": pruned/full ratio " << pr.ratio
        << " >= " << factor << " (adjusted), degree violations "
        << degree_violations << ", cap violations " << cap_violations << "\n";
  }
  // fixed epsilon => identical round count across instance sizes
  {
    PolyEpsParams params;
    params.theta = 20.0;
    std::vector<int> rounds;
    for (int n : {50, 200, 800}) {
      GenParams gp;
      gp.n = n;
      gp.density = std::min(1.0, 5.0 / (n - 1));
      StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                    ProbModel::uniform(0.5),
                                    derive_seed(0xC7C7, "size", n));
      Realization real = sample_realization(sg, derive_seed(0xC7C7, "sr", n));
      PolyEpsResult res =
          matching_polyeps_pipeline(sg, eps, params, real, 0xC7);
      if (!is_valid_matching(sg.graph, real, res.matching)) pass = false;
      rounds.push_back(res.trace.rounds);
    }
    bool same = rounds[0] == rounds[1] && rounds[1] == rounds[2];
    if (!same) pass = false;
    log << "  rounds at n=50/200/800: " << rounds[0] << "/" << rounds[1]
        << "/" << rounds[2] << (same ? " (invariant)" : " (MISMATCH)") << "\n";
  }
  return pass;
}

bool c8_mds(std::ostream& log) {
  bool pass = true;
  const long validity_trials = 10000;
  std::vector<Instance> suite = er_suite(4, 10, 18, 2.5, 5.0, true, 0xC8);
  {
    GenParams gp;
    gp.n = 15;
    StochasticGraph star = generate(GraphKind::star, gp,
                                    ProbModel::uniform(0.7), 0xC8);
    suite.push_back({"star15", std::move(star)});
  }
  long invalid = 0;
  double worst_const = 0.0;
  for (size_t i = 0; i < suite.size(); ++i) {
    const StochasticGraph& sg = suite[i].sg;
    uint64_t master = derive_seed(0xC8C8, "inst", i);
    Ranking rk = rank_vertices(sg);
    MdsProtocol proto(sg, rk);
    std::vector<double> alg, base;
    const long ratio_trials = 250;
    for (long t = 0; t < validity_trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      RunResult rr = run(sg, real, proto, derive_seed(master, "proto", t));
      if (rr.trace.rounds != 1 || rr.trace.max_payload_bits > 1 ||
          rr.trace.total_messages > sg.graph.n() ||
          !dominates(sg.graph, real, outputs_to_set(rr.outputs)))
        ++invalid;
      if (t < ratio_trials) {
        alg.push_back(sum_outputs(rr.outputs));
        base.push_back(static_cast<double>(
            exact_min_dominating_set(EdgeSubgraph::of(sg.graph, real)).size()));
      }
    }
    PairedRatio pr = paired_ratio(alg, base);
    double delta_bar = max_expected_degree(sg);
    double limit = 4.0 * std::log(delta_bar + 2.0);
    worst_const = std::max(worst_const, pr.ratio / std::log(delta_bar + 2.0));
    if (pr.ratio > limit) pass = false;
  }
  log << "  " << suite.size() << " instances x " << validity_trials
      << " runs: invalid " << invalid
      << "; max empirical ratio/ln(D+2) = " << worst_const << " (limit 4)\n";
  if (invalid > 0) pass = false;
  // bad-vertex frequency on denser instances
  for (int k = 0; k < 2; ++k) {
    GenParams gp;
    gp.n = 36;
    gp.density = 0.52;
    StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                  ProbModel::uniform(0.5),
                                  derive_seed(0xC8C8, "dense", k));
    double delta_bar = max_expected_degree(sg);
    if (delta_bar < 8.0) {
      log << "  dense instance " << k << " has expected degree " << delta_bar
          << " < 8, skipped\n";
      continue;
    }
    Ranking rk = rank_vertices(sg);
    uint64_t master = derive_seed(0xC8C8, "bad", k);
    std::vector<double> bad_counts;
    const long trials = 1200;
    for (long t = 0; t < trials; ++t) {
      Realization real = sample_realization(sg, derive_seed(master, "real", t));
      MdsDiagnostics d = classify_bad_costly(sg, rk, real);
      double b = 0;
      for (uint8_t x : d.bad) b += x;
      bad_counts.push_back(b);
    }
    MCEstimate est = summarize(bad_counts);
    double limit = sg.graph.n() / (delta_bar * delta_bar);
    if (est.mean > limit + 4.0 * est.stderr_) pass = false;
    log << "  bad vertices: mean " << est.mean << " <= n/D^2 = " << limit
        << " + 4se (D=" << delta_bar << ")\n";
  }
  return pass;
}

bool c9_oracles(std::ostream& log) {
  bool pass = true;
  Rng rng(derive_seed(0xC9C9, "gen"));
  long mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    GenParams gp;
    gp.n = 4 + static_cast<int>(rng.below(7));
    gp.density = 0.15 + 0.55 * rng.uniform();
    StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                  ProbModel::uniform(0.5), rng.next());
    EdgeSubgraph g = EdgeSubgraph::of(sg.graph);
    if (static_cast<int>(exact_min_vertex_cover(g).size()) !=
        brute_min_vertex_cover(g))
      ++mismatches;
    if (static_cast<int>(max_matching(g).edge_ids.size()) !=
        brute_max_matching(g))
      ++mismatches;
    if (static_cast<int>(exact_min_dominating_set(g).size()) !=
        brute_min_dominating_set(g))
      ++mismatches;
  }
  long sandwich_failures = 0;
  for (int i = 0; i < 500; ++i) {
    GenParams gp;
    gp.n = 10 + static_cast<int>(rng.below(31));
    gp.density = std::min(1.0, (2.0 + 2.0 * rng.uniform()) / (gp.n - 1));
    StochasticGraph sg = generate(GraphKind::erdos_renyi, gp,
                                  ProbModel::uniform(0.5), rng.next());
    EdgeSubgraph g = EdgeSubgraph::of(sg.graph);
    FractionalVertexCover f = optimal_fractional_vertex_cover(g);
    for (int e = 0; e < g.base->m(); ++e) {
      const Edge& ed = g.base->edge(e);
      if (f.value[ed.u] + f.value[ed.v] < 1.0 - 1e-9) ++sandwich_failures;
    }
    double match = static_cast<double>(max_matching(g).edge_ids.size());
    double integral =
        static_cast<double>(exact_min_vertex_cover(g).size());
    if (f.total < match - 1e-9 || f.total > integral + 1e-9)
      ++sandwich_failures;
  }
  if (mismatches > 0 || sandwich_failures > 0) pass = false;
  log << "  500 exhaustive comparisons: " << mismatches
      << " mismatches; 500 LP-duality sandwiches: " << sandwich_failures
      << " failures\n";
  return pass;
}

// deliberately broken node used to exercise the model check
class RogueProtocol : public Protocol {
 public:
  explicit RogueProtocol(int edge) : edge_(edge) {}
  std::unique_ptr<NodeProgram> make_node(int v) const override {
    class Node : public NodeProgram {
     public:
      Node(int v, int edge) : v_(v), edge_(edge) {}
      bool start(const NodeView&) override { return v_ == 0; }
      bool round(std::span<const InMsg>, std::vector<OutMsg>& out) override {
        out.push_back({edge_, 1, 1});
        return false;
      }
      double output() const override { return 0.0; }

     private:
      int v_, edge_;
    };
    return std::make_unique<Node>(v, edge_);
  }

 private:
  int edge_;
};

bool c10_model_and_determinism(std::ostream& log) {
  bool pass = true;
  // sending over an absent edge must abort with a model violation
  GenParams gp;
  gp.n = 2;
  StochasticGraph pair = generate(GraphKind::path, gp, ProbModel::uniform(0.5),
                                  10);
  Realization absent(pair.graph, {0});
  bool threw = false;
  try {
    run(pair, absent, RogueProtocol(0), 1);
  } catch (const ModelViolation&) {
    threw = true;
  }
  if (!threw) pass = false;
  log << "  non-realized send aborted: " << (threw ? "yes" : "NO") << "\n";

  // identical config and seed => bit-identical estimates at any worker count
  GenParams gp2;
  gp2.n = 14;
  gp2.density = 0.3;
  StochasticGraph sg = generate(GraphKind::erdos_renyi, gp2,
                                ProbModel::range(0.2, 0.8), 11);
  Ranking rk = rank_vertices(sg);
  MdsProtocol proto(sg, rk);
  Statistic stat = [](const std::vector<double>& out, const Realization&) {
    return sum_outputs(out);
  };
  MCEstimate serial = monte_carlo_serial(sg, proto, stat, 3000, 42);
#ifdef _OPENMP
  omp_set_num_threads(3);
#endif
  MCEstimate par3 = monte_carlo(sg, proto, stat, 3000, 42);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  MCEstimate par1 = monte_carlo(sg, proto, stat, 3000, 42);
  bool identical = serial.mean == par3.mean && serial.stderr_ == par3.stderr_ &&
                   serial.mean == par1.mean && serial.stderr_ == par1.stderr_;
  if (!identical) pass = false;
  log << "  serial vs 1-thread vs 3-thread estimates identical: "
      << (identical ? "yes" : "NO") << " (mean " << serial.mean << ")\n";
  return pass;
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> criteria = {
      {1, "poisson ratio minimum", c1_poisson_minimum},
      {2, "poisson global bound and E[F*Y]=lambda/2", c2_poisson_grid},
      {3, "zero-round vertex cover validity and 3.44 ratio", c3_nocomm_vc},
      {4, "ordering cover expectation identity", c4_ordering_identity},
      {5, "(2+eps) water-filling cover pipeline", c5_vc_pipeline},
      {6, "two-round matching ratios", c6_two_round_matching},
      {7, "poly(1/eps) matching pipeline", c7_polyeps_pipeline},
      {8, "one-round dominating set", c8_mds},
      {9, "oracle correctness vs exhaustive search", c9_oracles},
      {10, "model enforcement and determinism", c10_model_and_determinism},
  };
  return criteria;
}

int run_acceptance(std::ostream& out) {
  int failures = 0;
  for (const Criterion& c : acceptance_criteria()) {
    std::ostringstream detail;
    bool ok = false;
    std::string error;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      error = e.what();
    }
    out << "criterion " << c.id << " [" << c.name << "]: "
        << (ok ? "PASS" : "FAIL");
    if (!error.empty()) out << " (exception: " << error << ")";
    out << "\n" << detail.str();
    out.flush();
    if (!ok) ++failures;
  }
  return failures;
}

// ---------------------------------------------------------------------------
// Paired experiments for the CLI
// ---------------------------------------------------------------------------

namespace {

double baseline_sample(const std::string& kind, const std::string& algorithm,
                       const StochasticGraph& sg, const Realization& real) {
  EdgeSubgraph g = EdgeSubgraph::of(sg.graph, real);
  if (kind == "none") return 1.0;
  if (kind == "frac") return optimal_fractional_vertex_cover(g).total;
  if (kind != "exact") throw GraphError("unknown baseline: " + kind);
  if (algorithm.rfind("vc-", 0) == 0)
    return static_cast<double>(exact_min_vertex_cover(g).size());
  if (algorithm.rfind("match-", 0) == 0)
    return static_cast<double>(max_matching(g).edge_ids.size());
  if (algorithm == "mds")
    return static_cast<double>(exact_min_dominating_set(g).size());
  throw GraphError("no exact baseline for " + algorithm);
}

}  // namespace

ResultRow run_experiment(const StochasticGraph& sg,
                         const std::string& instance_name,
                         const ExperimentSpec& spec, RunTrace* trace_out) {
  auto t0 = Clock::now();
  ResultRow row;
  row.instance = instance_name;
  row.algorithm = spec.algorithm;

  // per-trial solution size plus the trace of trial 0
  std::function<double(long, const Realization&, RunTrace*)> sample;
  std::unique_ptr<Protocol> proto;
  ConditionalF condf;
  WaterfillState wf;
  VCConstants vc_consts{};
  Ranking ranking;
  std::vector<int> order;

  if (spec.algorithm == "vc-nocomm") {
    condf = estimate_conditional_f(sg, spec.oracle_trials,
                                   derive_seed(spec.seed, "condf"));
    proto = std::make_unique<NoCommVcProtocol>(
        sg, build_edge_association(sg, condf));
  } else if (spec.algorithm == "vc-order") {
    order = default_ordering(sg);
    sample = [&](long, const Realization& real, RunTrace*) {
      return static_cast<double>(ordering_cover(sg, order, real).size());
    };
  } else if (spec.algorithm == "vc-waterfill") {
    vc_consts = VCConstants::make(spec.eps);
    wf = waterfilling(sg, vc_consts);
    sample = [&](long t, const Realization& real, RunTrace* trace) {
      VcPipelineResult pipe = vc_pipeline_reference(wf, sg, real, vc_consts);
      if (trace) {
        DistributedVcProtocol p(sg, wf, vc_consts);
        RunResult rr = run(sg, real, p, derive_seed(spec.seed, "proto", t),
                           vc_consts.round_budget() + 1);
        *trace = rr.trace;
      }
      double s = 0;
      for (uint8_t x : pipe.in_cover) s += x;
      return s;
    };
  } else if (spec.algorithm == "match-2round") {
    proto = std::make_unique<TwoRoundMatchingProtocol>(sg, spec.alpha);
  } else if (spec.algorithm == "match-2round-bipartite") {
    proto = std::make_unique<TwoRoundMatchingProtocol>(sg);
  } else if (spec.algorithm == "match-polyeps") {
    PolyEpsParams params;
    params.theta = spec.theta;
    params.cap = spec.cap;
    sample = [&, params](long t, const Realization& real, RunTrace* trace) {
      PolyEpsResult res = matching_polyeps_pipeline(
          sg, spec.eps, params, real, derive_seed(spec.seed, "pipe", t));
      if (trace) *trace = res.trace;
      return static_cast<double>(res.matching.edge_ids.size());
    };
  } else if (spec.algorithm == "mds") {
    ranking = rank_vertices(sg);
    proto = std::make_unique<MdsProtocol>(sg, ranking);
  } else {
    throw GraphError("unknown algorithm: " + spec.algorithm);
  }

  if (!sample) {
    bool is_matching = spec.algorithm.rfind("match-", 0) == 0;
    sample = [&, is_matching](long t, const Realization& real,
                              RunTrace* trace) {
      RunResult rr = run(sg, real, *proto, derive_seed(spec.seed, "proto", t));
      if (trace) *trace = rr.trace;
      return is_matching ? matched_pairs(rr.outputs) : sum_outputs(rr.outputs);
    };
  }

  std::vector<double> alg(spec.trials), base(spec.trials);
  RunTrace trace;
  std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) if (!spec.serial)
#endif
  for (long t = 0; t < spec.trials; ++t) {
    if (error) continue;
    try {
      Realization real =
          sample_realization(sg, derive_seed(spec.seed, "real", t));
      alg[t] = sample(t, real, t == 0 ? &trace : nullptr);
      base[t] = baseline_sample(spec.baseline, spec.algorithm, sg, real);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  MCEstimate a = summarize(alg), b = summarize(base);
  row.mean = a.mean;
  row.stderr_ = a.stderr_;
  row.baseline_mean = b.mean;
  row.baseline_stderr = b.stderr_;
  row.ratio = spec.baseline == "none" ? 0.0 : paired_ratio(alg, base).ratio;
  row.rounds = trace.rounds;
  row.max_bits = trace.max_payload_bits;
  row.wall_seconds = seconds_since(t0);
  if (trace_out) *trace_out = trace;
  return row;
}

}  // namespace dsg
