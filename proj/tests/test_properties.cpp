#include "doctest.h"

#include <map>
#include <vector>

#include "macsim/experiment.hpp"
#include "macsim/sim.hpp"

using namespace macsim;

namespace {

SimConfig scenario(const std::string& proto, Tick interarrival, Tick duration,
                   std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.protocol = proto;
  cfg.traffic.interarrival = interarrival;
  cfg.duration = duration;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("replay determinism: identical configs produce identical csv") {
  const std::vector<SimConfig> configs = {
      scenario("smac", sec(2), sec(30)),
      scenario("xmac", sec(2), sec(30)),
      [] {
        SimConfig c = scenario("tmac", sec(1), sec(30));
        c.traffic.pattern = TrafficPattern::LOCAL_GOSSIP;
        return c;
      }(),
  };
  for (const SimConfig& cfg : configs) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const std::string a = rows_to_csv({run_experiment(cfg, seed)});
      const std::string b = rows_to_csv({run_experiment(cfg, seed)});
      CHECK(a == b);
      CHECK(a.find(cfg.protocol) != std::string::npos);
    }
  }
}

TEST_CASE("different seeds actually change the run") {
  SimConfig cfg = scenario("smac", sec(2), sec(30));
  CHECK(rows_to_csv({run_experiment(cfg, 1)}) !=
        rows_to_csv({run_experiment(cfg, 2)}));
}

namespace {

// Asserts on every delivery that the receiver is in a state that can hear.
struct AwakeCheck : ChannelTrace {
  Simulation* sim = nullptr;
  std::uint64_t deliveries = 0;
  void on_delivery(NodeId from, NodeId to, const Frame& frame, Tick start,
                   Tick end) override {
    deliveries++;
    const RadioState s = sim->channel().state(to);
    // The channel restores an engaged receiver to LISTEN right before
    // delivering; SLEEP or TX here would mean a phantom reception.
    CHECK((s == RadioState::LISTEN || s == RadioState::RX));
    CHECK(end > start);
    CHECK(sim->topology().linked(from, to));
  }
};

}  // namespace

TEST_CASE("no node ever receives while asleep or transmitting") {
  for (const char* proto : {"smac", "tmac", "dmac", "bmac", "bmac+", "xmac",
                            "wisemac"}) {
    Simulation sim(scenario(proto, sec(2), sec(30)));
    AwakeCheck trace;
    trace.sim = &sim;
    sim.set_trace(&trace);
    sim.run();
    CHECK(trace.deliveries > 0);
  }
}

namespace {

// Per-receiver serialization: two decodable frames never overlap at a node
// that ends up receiving one of them.
struct OverlapCheck : ChannelTrace {
  std::map<NodeId, std::vector<std::pair<Tick, Tick>>> delivered;
  void on_delivery(NodeId, NodeId to, const Frame&, Tick start,
                   Tick end) override {
    delivered[to].push_back({start, end});
  }
};

}  // namespace

TEST_CASE("delivered frames never overlap at their receiver") {
  Simulation sim(scenario("bmac", sec(1), sec(60)));
  OverlapCheck trace;
  sim.set_trace(&trace);
  sim.run();
  std::size_t checked = 0;
  for (auto& [node, spans] : trace.delivered) {
    for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
      CHECK(spans[i].second <= spans[i + 1].first);
      checked++;
    }
  }
  CHECK(checked > 0);
}

namespace {

// Independent energy integration from the raw transition stream.
struct Integrator : ChannelTrace {
  struct Node {
    RadioState state = RadioState::SLEEP;
    Tick since = 0;
    std::uint64_t pj = 0;
    Tick awake = 0;
  };
  PowerProfile power;
  std::vector<Node> nodes;
  explicit Integrator(std::size_t n) : nodes(n) {}
  void on_state(NodeId node, RadioState state, Tick at) override {
    close(node, at);
    nodes[node].state = state;
  }
  void close(NodeId n, Tick at) {
    Node& nd = nodes[n];
    nd.pj += power.power_uw(nd.state) * (at - nd.since);
    nd.since = at;
  }
  void finish(Tick end) {
    for (std::size_t n = 0; n < nodes.size(); ++n) close(n, end);
  }
};

}  // namespace

TEST_CASE("ledger totals equal an independent integration, exactly") {
  SimConfig cfg = scenario("smac", sec(1), sec(10));
  Simulation sim(cfg);
  Integrator integ(25);
  sim.set_trace(&integ);
  sim.run();
  integ.finish(cfg.duration);
  for (NodeId n = 0; n < 25; ++n) {
    CHECK(sim.ledger().total_energy_pj(n) == integ.nodes[n].pj);
    Tick sum = 0;
    for (int s = 0; s < kRadioStateCount; ++s)
      sum += sim.ledger().state_time(n, static_cast<RadioState>(s));
    CHECK(sum == cfg.duration);
  }
}

namespace {

// A node that initiates an exchange while its own NAV is set is violating
// the very reservation it recorded.
struct NavCheck : ChannelTrace {
  Simulation* sim = nullptr;
  std::uint64_t rts_seen = 0, violations = 0;
  void on_tx_start(NodeId node, const Frame& f, Tick at) override {
    if (f.kind != FrameKind::RTS) return;  // responses inherit the exchange
    rts_seen++;
    if (sim->protocol(node).nav_until() > at) violations++;
  }
};

}  // namespace

TEST_CASE("smac and tmac never send an rts under their own nav") {
  for (const char* proto : {"smac", "tmac"}) {
    Simulation sim(scenario(proto, sec(1), sec(60)));
    NavCheck trace;
    trace.sim = &sim;
    sim.set_trace(&trace);
    sim.run();
    CHECK(trace.rts_seen > 0);
    CHECK(trace.violations == 0);
  }
}
