// Command-line harness: instance generation, Monte-Carlo experiments,
// oracle baselines, Poisson numerics, the acceptance suite, and a
// parallel-vs-serial engine benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 invariant/model violation,
// 3 acceptance failure.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsg/engine.hpp"
#include "dsg/experiments.hpp"
#include "dsg/graph.hpp"
#include "dsg/mds.hpp"
#include "dsg/oracles.hpp"
#include "dsg/poisson.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct GenOptions {
  std::string kind = "erdos_renyi";
  int n = 20;
  int n_right = 0;
  double density = 0.5;
  double p_lo = 0.5;
  double p_hi = 0.5;
  uint64_t seed = 1;
  int count = 1;
};

void add_gen_options(CLI::App* cmd, GenOptions& g) {
  cmd->add_option("--kind", g.kind,
                  "erdos_renyi | random_bipartite | star | path | complete");
  cmd->add_option("--n", g.n, "vertex count (left side for bipartite)");
  cmd->add_option("--n-right", g.n_right, "right side size (bipartite only)");
  cmd->add_option("--density", g.density, "edge density in [0, 1]");
  cmd->add_option("--p", g.p_lo, "uniform realization probability");
  cmd->add_option("--p-lo", g.p_lo, "lower end of per-edge probability range");
  cmd->add_option("--p-hi", g.p_hi, "upper end of per-edge probability range");
  cmd->add_option("--seed", g.seed, "master seed");
}

dsg::StochasticGraph make_graph(const GenOptions& g, int index) {
  dsg::GenParams params;
  params.n = g.n;
  params.n_right = g.n_right;
  params.density = g.density;
  double hi = std::max(g.p_lo, g.p_hi);
  return dsg::generate(dsg::parse_kind(g.kind), params,
                       dsg::ProbModel::range(g.p_lo, hi),
                       dsg::derive_seed(g.seed, "instance", index));
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw dsg::GraphError("cannot open output file: " + path);
  return file;
}

int cmd_gen(const GenOptions& g, const std::string& out) {
  for (int i = 0; i < g.count; ++i) {
    std::string path = g.count == 1 ? out : out + "." + std::to_string(i);
    dsg::save_graph(make_graph(g, i), path);
    std::cout << path << "\n";
  }
  return 0;
}

int cmd_run(const GenOptions& g, const std::string& graph_path, int count,
            const dsg::ExperimentSpec& spec, const std::string& out,
            const std::string& trace_out) {
  std::ofstream file;
  std::ostream& os = open_or_stdout(file, out);
  os << dsg::result_csv_header() << "\n";
  dsg::RunTrace trace;
  for (int i = 0; i < count; ++i) {
    dsg::StochasticGraph sg =
        graph_path.empty() ? make_graph(g, i) : dsg::load_graph(graph_path);
    std::string name =
        graph_path.empty() ? g.kind + "_" + std::to_string(i) : graph_path;
    dsg::ExperimentSpec s = spec;
    s.seed = dsg::derive_seed(spec.seed, "experiment", i);
    os << dsg::to_csv(dsg::run_experiment(sg, name, s, &trace)) << "\n";
  }
  if (!trace_out.empty()) {
    std::ofstream tf(trace_out);
    if (!tf) throw dsg::GraphError("cannot open trace file: " + trace_out);
    tf << trace.to_json() << "\n";
  }
  return 0;
}

int cmd_oracle(const GenOptions& g, const std::string& graph_path, long trials,
               const std::string& out) {
  dsg::StochasticGraph sg =
      graph_path.empty() ? make_graph(g, 0) : dsg::load_graph(graph_path);
  std::string name = graph_path.empty() ? g.kind : graph_path;
  std::ofstream file;
  std::ostream& os = open_or_stdout(file, out);
  os << "instance,statistic,mean,stderr,trials\n";

  struct Stat {
    const char* label;
    std::function<double(const dsg::EdgeSubgraph&)> eval;
  };
  std::vector<Stat> stats = {
      {"exact_mvc",
       [](const dsg::EdgeSubgraph& s) {
         return static_cast<double>(dsg::exact_min_vertex_cover(s).size());
       }},
      {"exact_matching",
       [](const dsg::EdgeSubgraph& s) {
         return static_cast<double>(dsg::max_matching(s).edge_ids.size());
       }},
      {"exact_mds",
       [](const dsg::EdgeSubgraph& s) {
         return static_cast<double>(dsg::exact_min_dominating_set(s).size());
       }},
      {"frac_vc",
       [](const dsg::EdgeSubgraph& s) {
         return dsg::optimal_fractional_vertex_cover(s).total;
       }},
  };
  for (const Stat& st : stats) {
    std::vector<double> samples(trials);
    try {
      for (long t = 0; t < trials; ++t) {
        dsg::Realization real =
            dsg::sample_realization(sg, dsg::derive_seed(g.seed, "real", t));
        samples[t] = st.eval(dsg::EdgeSubgraph::of(sg.graph, real));
      }
    } catch (const dsg::BudgetError& e) {
      os << name << ',' << st.label << ",nan,nan,0\n";
      std::cerr << st.label << " refused: " << e.what() << "\n";
      continue;
    }
    dsg::MCEstimate est = dsg::summarize(samples);
    os << name << ',' << st.label << ',' << est.mean << ',' << est.stderr_
       << ',' << trials << "\n";
  }
  return 0;
}

int cmd_poisson(bool minimum, bool curve, double lambda, int points,
                double max_lambda, const std::string& out) {
  std::ofstream file;
  std::ostream& os = open_or_stdout(file, out);
  os.precision(10);
  if (minimum) {
    dsg::RatioMinimum mn = dsg::minimize_ratio();
    os << "lambda = " << mn.lambda << "\n";
    os << "ratio = " << mn.ratio << " = 1/" << 1.0 / mn.ratio << "\n";
    return 0;
  }
  os << "lambda,m,beta,exp_fstar,efy,ratio\n";
  if (curve) {
    for (int i = 1; i <= points; ++i) {
      dsg::PoissonPoint pt = dsg::evaluate_point(max_lambda * i / points);
      os << pt.lambda << ',' << pt.m << ',' << pt.beta << ',' << pt.exp_fstar
         << ',' << pt.efy << ',' << pt.ratio << "\n";
    }
  } else {
    dsg::PoissonPoint pt = dsg::evaluate_point(lambda);
    os << pt.lambda << ',' << pt.m << ',' << pt.beta << ',' << pt.exp_fstar
       << ',' << pt.efy << ',' << pt.ratio << "\n";
  }
  return 0;
}

int cmd_bench(int n, double density, long trials, uint64_t seed) {
  dsg::GenParams params;
  params.n = n;
  params.density = density;
  dsg::StochasticGraph sg =
      dsg::generate(dsg::GraphKind::erdos_renyi, params,
                    dsg::ProbModel::range(0.2, 0.8), seed);
  dsg::Ranking ranking = dsg::rank_vertices(sg);
  dsg::MdsProtocol proto(sg, ranking);
  dsg::Statistic stat = [](const std::vector<double>& outputs,
                           const dsg::Realization&) {
    double s = 0.0;
    for (double x : outputs) s += x;
    return s;
  };
  using Clock = std::chrono::steady_clock;

  auto t0 = Clock::now();
  dsg::MCEstimate serial =
      dsg::monte_carlo_serial(sg, proto, stat, trials, seed);
  double serial_s = std::chrono::duration<double>(Clock::now() - t0).count();
  t0 = Clock::now();
  dsg::MCEstimate parallel = dsg::monte_carlo(sg, proto, stat, trials, seed);
  double parallel_s = std::chrono::duration<double>(Clock::now() - t0).count();

  int workers = 1;
#ifdef _OPENMP
  workers = omp_get_max_threads();
#endif
  std::cout << "instance: erdos_renyi n=" << n << " density=" << density
            << ", " << trials << " trials, " << workers << " worker(s)\n";
  std::cout << "serial:   " << serial_s << " s, " << trials / serial_s
            << " trials/s\n";
  std::cout << "parallel: " << parallel_s << " s, " << trials / parallel_s
            << " trials/s (speedup " << serial_s / parallel_s << "x)\n";
  if (serial.mean != parallel.mean || serial.stderr_ != parallel.stderr_)
    throw dsg::ModelViolation("parallel estimate diverged from the serial reference");
  std::cout << "estimates bit-identical: mean " << serial.mean << " stderr "
            << serial.stderr_ << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Expand `--config file` into flat key=value options of the chosen
  // subcommand. Keys given explicitly on the command line win.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] != "--config") continue;
      std::ifstream cfg(args[i + 1]);
      if (!cfg)
        throw dsg::GraphError("cannot open config file: " + args[i + 1]);
      args.erase(args.begin() + i, args.begin() + i + 2);
      std::string line;
      std::vector<std::string> extra;
      while (std::getline(cfg, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
          throw dsg::GraphError("config line is not key=value: " + line);
        std::string key = "--" + line.substr(0, eq);
        if (std::find(args.begin(), args.end(), key) != args.end()) continue;
        extra.push_back(key);
        extra.push_back(line.substr(eq + 1));
      }
      args.insert(args.begin() + i, extra.begin(), extra.end());
      break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"distributed stochastic graph algorithms"};
  app.require_subcommand(1);

  GenOptions g;
  std::string out, graph_path, trace_out;
  dsg::ExperimentSpec spec;
  long oracle_runs = 1000;
  bool poisson_min = false, poisson_curve = false;
  double lambda = 1.0, max_lambda = 20.0;
  int points = 1000, bench_n = 60;
  double bench_density = 0.2;
  long bench_trials = 20000;
  uint64_t bench_seed = 1;

  CLI::App* gen = app.add_subcommand("gen", "generate graph files");
  add_gen_options(gen, g);
  gen->add_option("--count", g.count, "number of instances");
  gen->add_option("--out", out, "output path (suffix .<i> when count > 1)")
      ->required();

  CLI::App* run = app.add_subcommand("run", "run one algorithm config");
  add_gen_options(run, g);
  run->add_option("--graph", graph_path, "graph file (instead of a generator)");
  run->add_option("--count", g.count, "generated instances per config");
  run->add_option("--algorithm", spec.algorithm,
                  "vc-nocomm | vc-order | vc-waterfill | match-2round | "
                  "match-2round-bipartite | match-polyeps | mds")
      ->required();
  run->add_option("--baseline", spec.baseline, "exact | frac | none");
  run->add_option("--trials", spec.trials, "Monte-Carlo trials");
  run->add_option("--oracle-trials", spec.oracle_trials,
                  "conditional-f estimation budget");
  run->add_option("--eps", spec.eps, "epsilon for vc-waterfill/match-polyeps");
  run->add_option("--alpha", spec.alpha, "active probability for match-2round");
  run->add_option("--theta", spec.theta, "degree-pruning threshold override");
  run->add_option("--cap", spec.cap, "sparsifier cap override");
  run->add_flag("--serial", spec.serial, "force the serial trial loop");
  run->add_option("--out", out, "CSV output path (default stdout)");
  run->add_option("--trace-out", trace_out, "JSON trace of trial 0");

  CLI::App* oracle = app.add_subcommand("oracle", "emit baseline estimates");
  add_gen_options(oracle, g);
  oracle->add_option("--graph", graph_path, "graph file");
  oracle->add_option("--trials", oracle_runs, "Monte-Carlo trials");
  oracle->add_option("--out", out, "CSV output path (default stdout)");

  CLI::App* poisson = app.add_subcommand("poisson", "ratio-curve numerics");
  poisson->add_flag("--min", poisson_min, "print the global ratio minimum");
  poisson->add_flag("--curve", poisson_curve, "print the full curve as CSV");
  poisson->add_option("--lambda", lambda, "single evaluation point");
  poisson->add_option("--points", points, "curve resolution");
  poisson->add_option("--max-lambda", max_lambda, "curve upper end");
  poisson->add_option("--out", out, "output path (default stdout)");

  CLI::App* accept =
      app.add_subcommand("accept", "run the full acceptance suite");

  CLI::App* bench =
      app.add_subcommand("bench", "parallel vs serial engine throughput");
  bench->add_option("--n", bench_n, "instance size");
  bench->add_option("--density", bench_density, "edge density");
  bench->add_option("--trials", bench_trials, "Monte-Carlo trials");
  bench->add_option("--seed", bench_seed, "master seed");

  app.footer("Any subcommand accepts --config <file> with flat key=value "
             "lines; explicit flags override the file.");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(g, out);
    if (run->parsed())
      return cmd_run(g, graph_path, g.count, spec, out, trace_out);
    if (oracle->parsed()) return cmd_oracle(g, graph_path, oracle_runs, out);
    if (poisson->parsed())
      return cmd_poisson(poisson_min, poisson_curve, lambda, points,
                         max_lambda, out);
    if (accept->parsed()) {
      int failures = dsg::run_acceptance(std::cout);
      std::cout << (failures == 0 ? "all criteria passed"
                                  : std::to_string(failures) +
                                        " criterion(s) failed")
                << "\n";
      return failures == 0 ? 0 : 3;
    }
    if (bench->parsed())
      return cmd_bench(bench_n, bench_density, bench_trials, bench_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
