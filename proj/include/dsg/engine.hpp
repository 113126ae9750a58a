#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsg/graph.hpp"
#include "dsg/rng.hpp"

namespace dsg {

// A node attempted to send over a non-realized or non-incident edge.
struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RoundLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// What a node sees after realization: its realized incident edges with
// neighbor ids, a private RNG sub-stream, and a shared sub-stream common to
// all nodes (models information exchanged over base edges at no metered
// cost, e.g. per-run role coins).
struct NodeView {
  int vertex = -1;
  // (edge id, neighbor id) for each realized incident edge
  std::vector<std::pair<int, int>> realized;
  uint64_t rng_seed = 0;
  uint64_t shared_seed = 0;
};

struct InMsg {
  int edge;
  int from;
  uint64_t bits;
  int nbits;
};

struct OutMsg {
  int edge;
  uint64_t bits;
  int nbits = 1;
};

// Per-vertex state machine. start() returns true if the node wants to
// participate in synchronous rounds. round() consumes the messages sent in
// the previous round and returns true to request another round. Messages
// emitted in the final executed round are delivered to finish() for free:
// receiving at the end of the last round costs no extra round.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual bool start(const NodeView& view) = 0;
  virtual bool round(std::span<const InMsg> inbox, std::vector<OutMsg>& out) = 0;
  virtual void finish(std::span<const InMsg> /*last_inbox*/) {}
  virtual double output() const = 0;
};

// Behavioral interface for distributed stochastic algorithms. Preprocessing
// has full knowledge of G and all p_e; only the post-realization rounds are
// metered. A Protocol must be immutable after preprocess() so concurrent
// trials can share it.
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual void preprocess(const StochasticGraph& /*sg*/) {}
  virtual std::unique_ptr<NodeProgram> make_node(int v) const = 0;
  // Engine asserts every payload stays within this many bits.
  virtual int payload_bit_budget(const StochasticGraph& /*sg*/) const {
    return 1;
  }
};

struct RunTrace {
  int rounds = 0;
  int max_payload_bits = 0;
  long long total_messages = 0;
  std::vector<long long> per_round;

  std::string to_json() const;
};

struct RunResult {
  std::vector<double> outputs;  // per vertex
  RunTrace trace;
};

RunResult run(const StochasticGraph& sg, const Realization& realization,
              const Protocol& protocol, uint64_t seed,
              int max_rounds = 1 << 20);

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
};

using Statistic =
    std::function<double(const std::vector<double>& outputs,
                         const Realization& realization)>;

// Monte-Carlo estimate of a per-run statistic. Trial t uses realization
// seed derive(master, "real", t) and protocol seed derive(master, "proto",
// t), so the result is independent of execution order and worker count.
MCEstimate monte_carlo(const StochasticGraph& sg, const Protocol& protocol,
                       const Statistic& stat, long trials, uint64_t master_seed);

// Serial reference implementation; must match monte_carlo bit-for-bit.
MCEstimate monte_carlo_serial(const StochasticGraph& sg,
                              const Protocol& protocol, const Statistic& stat,
                              long trials, uint64_t master_seed);

// Mean/stderr of a sample vector, accumulated in index order.
MCEstimate summarize(const std::vector<double>& samples);

}  // namespace dsg
