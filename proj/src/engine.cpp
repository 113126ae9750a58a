#include "dsg/engine.hpp"

#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsg {

std::string RunTrace::to_json() const {
  std::ostringstream os;
  os << "{\"rounds\":" << rounds
     << ",\"max_payload_bits\":" << max_payload_bits
     << ",\"total_messages\":" << total_messages << ",\"per_round\":[";
  for (size_t i = 0; i < per_round.size(); ++i) {
    if (i) os << ',';
    os << per_round[i];
  }
  os << "]}";
  return os.str();
}

RunResult run(const StochasticGraph& sg, const Realization& realization,
              const Protocol& protocol, uint64_t seed, int max_rounds) {
  const BaseGraph& g = sg.graph;
  const int n = g.n();
  const int bit_budget = protocol.payload_bit_budget(sg);

  std::vector<std::unique_ptr<NodeProgram>> nodes(n);
  std::vector<uint8_t> wants(n, 0);
  // inbox[v] holds messages delivered at the start of the next round
  std::vector<std::vector<InMsg>> inbox(n), next_inbox(n);

  for (int v = 0; v < n; ++v) {
    NodeView view;
    view.vertex = v;
    for (int e : g.incident(v))
      if (realization.present(e)) view.realized.push_back({e, g.other_endpoint(e, v)});
    view.rng_seed = derive_seed(seed, "node", static_cast<uint64_t>(v));
    view.shared_seed = derive_seed(seed, "shared", 0);
    nodes[v] = protocol.make_node(v);
    wants[v] = nodes[v]->start(view) ? 1 : 0;
  }

  RunTrace trace;
  std::vector<OutMsg> outbox;
  std::vector<int> active, next_active, touched;
  for (int v = 0; v < n; ++v)
    if (wants[v]) active.push_back(v);

  while (!active.empty()) {
    if (trace.rounds >= max_rounds)
      throw RoundLimitExceeded("round limit " + std::to_string(max_rounds) +
                               " exceeded");
    long long sent = 0;
    next_active.clear();
    touched.clear();
    for (int v : active) {
      outbox.clear();
      bool more = nodes[v]->round(
          std::span<const InMsg>(inbox[v].data(), inbox[v].size()), outbox);
      inbox[v].clear();
      wants[v] = more ? 1 : 0;
      if (more) next_active.push_back(v);
      for (const OutMsg& msg : outbox) {
        if (msg.edge < 0 || msg.edge >= g.m() ||
            (g.edge(msg.edge).u != v && g.edge(msg.edge).v != v))
          throw ModelViolation("vertex " + std::to_string(v) +
                               " sent over non-incident edge " +
                               std::to_string(msg.edge));
        if (!realization.present(msg.edge))
          throw ModelViolation("vertex " + std::to_string(v) +
                               " sent over non-realized edge " +
                               std::to_string(msg.edge));
        if (msg.nbits < 1 || msg.nbits > bit_budget)
          throw ModelViolation("vertex " + std::to_string(v) +
                               " payload of " + std::to_string(msg.nbits) +
                               " bits exceeds budget " +
                               std::to_string(bit_budget));
        int to = g.other_endpoint(msg.edge, v);
        if (next_inbox[to].empty()) touched.push_back(to);
        next_inbox[to].push_back({msg.edge, v, msg.bits, msg.nbits});
        if (msg.nbits > trace.max_payload_bits)
          trace.max_payload_bits = msg.nbits;
        ++sent;
      }
    }
    trace.rounds += 1;
    trace.per_round.push_back(sent);
    trace.total_messages += sent;
    for (int to : touched) {
      // append so that a done node keeps everything until finish()
      inbox[to].insert(inbox[to].end(), next_inbox[to].begin(),
                       next_inbox[to].end());
      next_inbox[to].clear();
    }
    active.swap(next_active);
  }

  RunResult result;
  result.outputs.resize(n);
  for (int v = 0; v < n; ++v) {
    nodes[v]->finish(std::span<const InMsg>(inbox[v].data(), inbox[v].size()));
    result.outputs[v] = nodes[v]->output();
  }
  result.trace = std::move(trace);
  return result;
}

MCEstimate summarize(const std::vector<double>& samples) {
  MCEstimate est;
  est.trials = static_cast<long>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  est.mean = sum / static_cast<double>(est.trials);
  double ss = 0.0;
  for (double x : samples) ss += (x - est.mean) * (x - est.mean);
  if (est.trials > 1) {
    double var = ss / static_cast<double>(est.trials - 1);
    est.stderr_ = std::sqrt(var / static_cast<double>(est.trials));
  }
  return est;
}

namespace {

double run_trial(const StochasticGraph& sg, const Protocol& protocol,
                 const Statistic& stat, uint64_t master_seed, long t) {
  Realization real =
      sample_realization(sg, derive_seed(master_seed, "real", t));
  uint64_t proto_seed = derive_seed(master_seed, "proto", t);
  try {
    RunResult rr = run(sg, real, protocol, proto_seed);
    return stat(rr.outputs, real);
  } catch (const std::exception& e) {
    throw std::runtime_error("trial " + std::to_string(t) + ": " + e.what());
  }
}

}  // namespace

MCEstimate monte_carlo(const StochasticGraph& sg, const Protocol& protocol,
                       const Statistic& stat, long trials,
                       uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<double> samples(trials);
  std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (long t = 0; t < trials; ++t) {
    if (error) continue;
    try {
      samples[t] = run_trial(sg, protocol, stat, master_seed, t);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return summarize(samples);
}

MCEstimate monte_carlo_serial(const StochasticGraph& sg,
                              const Protocol& protocol, const Statistic& stat,
                              long trials, uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<double> samples(trials);
  for (long t = 0; t < trials; ++t)
    samples[t] = run_trial(sg, protocol, stat, master_seed, t);
  return summarize(samples);
}

}  // namespace dsg
