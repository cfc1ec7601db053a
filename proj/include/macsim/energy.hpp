#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "macsim/time.hpp"

namespace macsim {

enum class RadioState : std::uint8_t { SLEEP = 0, LISTEN = 1, RX = 2, TX = 3 };
inline constexpr int kRadioStateCount = 4;

const char* radio_state_name(RadioState s);

// Power per radio state. Stored in microwatts so that energy accumulates
// exactly as integer picojoules (uW * us = pJ).
struct PowerProfile {
  std::uint64_t sleep_uw = 90;      // 0.09 mW
  std::uint64_t listen_uw = 45000;  // 45 mW
  std::uint64_t rx_uw = 45000;
  std::uint64_t tx_uw = 60000;

  std::uint64_t power_uw(RadioState s) const {
    switch (s) {
      case RadioState::SLEEP: return sleep_uw;
      case RadioState::LISTEN: return listen_uw;
      case RadioState::RX: return rx_uw;
      case RadioState::TX: return tx_uw;
    }
    return 0;
  }
};

// Per-node radio-state timeline folded into joule accounting.
class EnergyLedger {
 public:
  EnergyLedger() = default;
  EnergyLedger(std::size_t node_count, PowerProfile profile)
      : profile_(profile), nodes_(node_count) {}

  void note_transition(NodeId node, RadioState new_state, Tick at) {
    Node& n = nodes_.at(node);
    if (at < n.since) throw std::logic_error("EnergyLedger: time regression");
    close_interval(n, at);
    n.state = new_state;
  }

  // Flushes the open interval up to t_end without changing state.
  void flush(Tick t_end) {
    for (auto& n : nodes_) close_interval(n, t_end);
  }

  Tick state_time(NodeId node, RadioState s) const {
    return nodes_.at(node).time_ticks[static_cast<int>(s)];
  }
  std::uint64_t state_energy_pj(NodeId node, RadioState s) const {
    return nodes_.at(node).energy_pj[static_cast<int>(s)];
  }
  double state_energy_mj(NodeId node, RadioState s) const {
    return static_cast<double>(state_energy_pj(node, s)) / 1e9;
  }

  std::uint64_t total_energy_pj(NodeId node) const {
    std::uint64_t sum = 0;
    for (int s = 0; s < kRadioStateCount; ++s) sum += nodes_.at(node).energy_pj[s];
    return sum;
  }
  double total_energy_mj(NodeId node) const {
    return static_cast<double>(total_energy_pj(node)) / 1e9;
  }

  // Arithmetic mean over all nodes, in millijoules.
  double fleet_average_mj() const {
    if (nodes_.empty()) throw std::logic_error("EnergyLedger: no nodes");
    double sum = 0;
    for (NodeId n = 0; n < nodes_.size(); ++n) sum += total_energy_mj(n);
    return sum / static_cast<double>(nodes_.size());
  }
  double fleet_total_mj() const {
    double sum = 0;
    for (NodeId n = 0; n < nodes_.size(); ++n) sum += total_energy_mj(n);
    return sum;
  }

  std::size_t node_count() const { return nodes_.size(); }
  const PowerProfile& profile() const { return profile_; }
  RadioState current_state(NodeId node) const { return nodes_.at(node).state; }

 private:
  struct Node {
    RadioState state = RadioState::SLEEP;
    Tick since = 0;
    std::array<Tick, kRadioStateCount> time_ticks{};
    std::array<std::uint64_t, kRadioStateCount> energy_pj{};
  };

  void close_interval(Node& n, Tick at) {
    const Tick dt = at - n.since;
    const int s = static_cast<int>(n.state);
    n.time_ticks[s] += dt;
    n.energy_pj[s] += profile_.power_uw(n.state) * dt;
    n.since = at;
  }

  PowerProfile profile_;
  std::vector<Node> nodes_;
};

}  // namespace macsim
