#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsg/engine.hpp"
#include "dsg/graph.hpp"
#include "dsg/mds.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace dsg;

namespace {

StochasticGraph single_edge(double p) {
  StochasticGraph sg;
  sg.graph = BaseGraph(2, {{0, 1}});
  sg.prob = {p};
  return sg;
}

// Sends one bit per round for `rounds` rounds; output counts received
// messages, including the free delivery into finish().
class PingProtocol : public Protocol {
 public:
  explicit PingProtocol(int rounds) : rounds_(rounds) {}
  std::unique_ptr<NodeProgram> make_node(int) const override {
    class Node : public NodeProgram {
     public:
      explicit Node(int rounds) : left_(rounds) {}
      bool start(const NodeView& view) override {
        view_ = view;
        return !view_.realized.empty() && left_ > 0;
      }
      bool round(std::span<const InMsg> inbox,
                 std::vector<OutMsg>& out) override {
        received_ += static_cast<int>(inbox.size());
        for (auto [e, nb] : view_.realized) out.push_back({e, 1, 1});
        return --left_ > 0;
      }
      void finish(std::span<const InMsg> last) override {
        received_ += static_cast<int>(last.size());
      }
      double output() const override { return received_; }

     private:
      NodeView view_;
      int left_;
      int received_ = 0;
    };
    return std::make_unique<Node>(rounds_);
  }

 private:
  int rounds_;
};

class RogueSender : public Protocol {
 public:
  enum Mode { absent_edge, foreign_edge, fat_payload };
  explicit RogueSender(Mode mode) : mode_(mode) {}
  std::unique_ptr<NodeProgram> make_node(int v) const override {
    class Node : public NodeProgram {
     public:
      Node(int v, Mode mode) : v_(v), mode_(mode) {}
      bool start(const NodeView&) override { return v_ == 0; }
      bool round(std::span<const InMsg>, std::vector<OutMsg>& out) override {
        if (mode_ == absent_edge) out.push_back({0, 1, 1});
        if (mode_ == foreign_edge) out.push_back({1, 1, 1});
        if (mode_ == fat_payload) out.push_back({0, 3, 2});
        return false;
      }
      double output() const override { return 0; }

     private:
      int v_;
      Mode mode_;
    };
    return std::make_unique<Node>(v, mode_);
  }

 private:
  Mode mode_;
};

}  // namespace

TEST_CASE("messages sent in round r are read in round r+1") {
  StochasticGraph sg = single_edge(1.0);
  Realization real(sg.graph, {1});
  RunResult rr = run(sg, real, PingProtocol(3), 1);
  CHECK(rr.trace.rounds == 3);
  // rounds 2 and 3 each deliver one message; the round-3 send arrives in
  // finish() at no round cost
  CHECK(rr.outputs[0] == 3.0);
  CHECK(rr.outputs[1] == 3.0);
  CHECK(rr.trace.total_messages == 6);
  CHECK(rr.trace.max_payload_bits == 1);
  CHECK(rr.trace.per_round == std::vector<long long>{2, 2, 2});
}

TEST_CASE("isolated nodes cost no rounds") {
  StochasticGraph sg = single_edge(0.5);
  Realization real(sg.graph, {0});
  RunResult rr = run(sg, real, PingProtocol(3), 1);
  CHECK(rr.trace.rounds == 0);
  CHECK(rr.trace.total_messages == 0);
}

TEST_CASE("model violations abort the run") {
  // 3-path so edge 1 is not incident to vertex 0
  StochasticGraph sg;
  sg.graph = BaseGraph(3, {{0, 1}, {1, 2}});
  sg.prob = {0.5, 0.5};

  Realization absent(sg.graph, {0, 1});
  CHECK_THROWS_AS(run(sg, absent, RogueSender(RogueSender::absent_edge), 1),
                  ModelViolation);

  Realization both(sg.graph, {1, 1});
  CHECK_THROWS_AS(run(sg, both, RogueSender(RogueSender::foreign_edge), 1),
                  ModelViolation);
  CHECK_THROWS_AS(run(sg, both, RogueSender(RogueSender::fat_payload), 1),
                  ModelViolation);
}

TEST_CASE("round limit is enforced") {
  StochasticGraph sg = single_edge(1.0);
  Realization real(sg.graph, {1});
  CHECK_THROWS_AS(run(sg, real, PingProtocol(10), 1, 4), RoundLimitExceeded);
}

TEST_CASE("summarize matches hand-computed mean and stderr") {
  MCEstimate est = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(est.trials == 4);
  CHECK(est.mean == doctest::Approx(2.5));
  // sample variance 5/3, stderr sqrt(5/12)
  CHECK(est.stderr_ == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("parallel and serial Monte-Carlo agree bit for bit") {
  GenParams gp;
  gp.n = 16;
  gp.density = 0.3;
  StochasticGraph sg =
      generate(GraphKind::erdos_renyi, gp, ProbModel::range(0.2, 0.8), 21);
  Ranking ranking = rank_vertices(sg);
  MdsProtocol proto(sg, ranking);
  Statistic stat = [](const std::vector<double>& outputs, const Realization&) {
    double s = 0;
    for (double x : outputs) s += x;
    return s;
  };
  MCEstimate serial = monte_carlo_serial(sg, proto, stat, 500, 77);
  MCEstimate parallel = monte_carlo(sg, proto, stat, 500, 77);
  CHECK(serial.mean == parallel.mean);
  CHECK(serial.stderr_ == parallel.stderr_);
#ifdef _OPENMP
  omp_set_num_threads(4);
  MCEstimate four = monte_carlo(sg, proto, stat, 500, 77);
  omp_set_num_threads(1);
  CHECK(serial.mean == four.mean);
  CHECK(serial.stderr_ == four.stderr_);
#endif
}

TEST_CASE("trace serializes as JSON") {
  StochasticGraph sg = single_edge(1.0);
  Realization real(sg.graph, {1});
  RunResult rr = run(sg, real, PingProtocol(1), 1);
  CHECK(rr.trace.to_json() ==
        "{\"rounds\":1,\"max_payload_bits\":1,\"total_messages\":2,"
        "\"per_round\":[2]}");
}
