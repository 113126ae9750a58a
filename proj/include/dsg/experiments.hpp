#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsg/graph.hpp"

namespace dsg {

// One row of the experiment CSV emitted by the CLI `run` subcommand.
struct ResultRow {
  std::string instance;
  std::string algorithm;
  double mean = 0.0;
  double stderr_ = 0.0;
  double baseline_mean = 0.0;
  double baseline_stderr = 0.0;
  double ratio = 0.0;
  int rounds = 0;
  int max_bits = 0;
  double wall_seconds = 0.0;
};

std::string result_csv_header();
std::string to_csv(const ResultRow& row);

struct PairedRatio {
  double ratio = 0.0;
  double stderr_ = 0.0;  // delta-method stderr using the paired covariance
};

// Ratio of means of paired samples with its standard error.
PairedRatio paired_ratio(const std::vector<double>& numer,
                         const std::vector<double>& denom);

struct ExperimentSpec {
  std::string algorithm;  // vc-nocomm | vc-order | vc-waterfill | match-2round
                          // | match-2round-bipartite | match-polyeps | mds
  std::string baseline = "exact";  // exact | frac | none
  long trials = 1000;
  long oracle_trials = 300;  // conditional-f estimation budget
  uint64_t seed = 1;
  double eps = 0.25;
  double alpha = 0.442854;
  double theta = 0.0;  // match-polyeps override, 0 = the 1/eps^10 default
  int cap = 0;         // match-polyeps override, 0 = formula default
  bool serial = false;  // force the serial Monte-Carlo reference path
};

struct RunTrace;

// Paired-seed experiment: algorithm and baseline see the same realizations.
// When trace_out is given it receives the trace of trial 0.
ResultRow run_experiment(const StochasticGraph& sg,
                         const std::string& instance_name,
                         const ExperimentSpec& spec,
                         RunTrace* trace_out = nullptr);

struct Criterion {
  int id = 0;
  std::string name;
  std::function<bool(std::ostream& log)> run;
};

// The registered acceptance criteria, in order.
const std::vector<Criterion>& acceptance_criteria();

// Runs every criterion, printing one pass/fail line each plus detail lines.
// Returns the number of failures.
int run_acceptance(std::ostream& out);

}  // namespace dsg
