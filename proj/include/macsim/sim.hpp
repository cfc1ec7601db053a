#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "macsim/energy.hpp"
#include "macsim/kernel.hpp"
#include "macsim/mac.hpp"
#include "macsim/radio.hpp"
#include "macsim/topology.hpp"

namespace macsim {

struct TrafficSpec {
  TrafficPattern pattern = TrafficPattern::CONVERGECAST;
  Tick interarrival = sec(10);  // mean gap per source
};

struct SimConfig {
  std::string protocol = "smac";
  MacParams params;
  PowerProfile power;
  std::uint32_t rows = 5, cols = 5;
  double spacing = 10.0, range = 10.0;
  NodeId root = 0;
  TrafficSpec traffic;
  Tick duration = sec(600);
  std::uint64_t seed = 1;
};

struct SimResult {
  std::uint64_t originated = 0, delivered = 0, dropped = 0;
  double delivery_ratio = 1.0;
  double avg_node_energy_mj = 0.0;
  double total_energy_mj = 0.0;
  double avg_latency_ms = 0.0;
};

bool protocol_known(const std::string& name);

// One experiment instance: kernel + channel + ledger + one MAC per node +
// application-layer traffic and forwarding.
class Simulation : public AppSink {
 public:
  explicit Simulation(SimConfig cfg);

  SimResult run();  // run to cfg.duration and fold up the metrics

  Scheduler& scheduler() { return sched_; }
  Channel& channel() { return channel_; }
  EnergyLedger& ledger() { return ledger_; }
  const Topology& topology() const { return topo_; }
  const GatheringTree& tree() const { return tree_; }
  MacProtocol& protocol(NodeId n) { return *macs_.at(n); }
  const SimConfig& config() const { return cfg_; }
  void set_trace(ChannelTrace* t) { channel_.set_trace(t); }

  void on_app_delivery(NodeId at, NodeId src, std::uint64_t payload_id) override;
  void on_payload_failed(NodeId at, std::uint64_t payload_id) override;

 private:
  struct Payload {
    NodeId origin = 0;
    NodeId final_dst = 0;  // root for converge-cast, neighbor for gossip
    Tick created = 0;
    bool delivered = false;
    bool dropped = false;
  };

  void boot_all();
  void schedule_origination(NodeId node);
  void originate(NodeId node);

  SimConfig cfg_;
  Scheduler sched_;
  Topology topo_;
  GatheringTree tree_;
  EnergyLedger ledger_;
  Channel channel_;
  RngSource rng_;
  std::vector<std::unique_ptr<MacProtocol>> macs_;

  std::vector<Payload> payloads_;  // index = payload_id - 1
  std::unordered_set<std::uint64_t> seen_;  // (payload_id << 32 | node) dedup
  std::uint64_t dropped_ = 0, delivered_ = 0;
  double latency_sum_ms_ = 0.0;
};

}  // namespace macsim
