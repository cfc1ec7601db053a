#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "macsim/energy.hpp"
#include "macsim/frame.hpp"
#include "macsim/kernel.hpp"
#include "macsim/topology.hpp"

namespace macsim {

enum class CcaResult : std::uint8_t { CLEAR, BUSY };

// Per-node callbacks out of the channel. Implemented by the MAC layer.
class RadioSink {
 public:
  virtual ~RadioSink() = default;
  // An in-range transmission began while this node was awake. `clean` is
  // false when another audible transmission already overlaps here.
  virtual void on_frame_start(const Frame& frame, bool clean) {}
  // Frame observed for its full airtime with no overlap.
  virtual void on_frame_received(const Frame& frame) {}
  // A frame this node was locked onto ended corrupted (overlap, or the
  // transmitter aborted).
  virtual void on_corruption(const Frame& frame) {}
  virtual void on_frame_sent(const Frame& frame) {}
};

// Test/diagnostic hook: observes state transitions and deliveries.
class ChannelTrace {
 public:
  virtual ~ChannelTrace() = default;
  virtual void on_state(NodeId node, RadioState state, Tick at) {}
  virtual void on_delivery(NodeId from, NodeId to, const Frame& frame,
                           Tick start, Tick end) {}
  virtual void on_tx_start(NodeId node, const Frame& frame, Tick at) {}
};

// Radio state machines, unit-disk propagation, collisions, carrier sense and
// per-node clock drift.
class Channel {
 public:
  Channel(Scheduler& sched, const Topology& topo, EnergyLedger& ledger);

  void set_sink(NodeId node, RadioSink* sink) { nodes_.at(node).sink = sink; }
  void set_drift(NodeId node, double drift) { nodes_.at(node).drift = drift; }
  double drift(NodeId node) const { return nodes_.at(node).drift; }
  void set_trace(ChannelTrace* trace) { trace_ = trace; }

  RadioState state(NodeId node) const { return nodes_.at(node).state; }

  // Leaving TX before the frame ends aborts the transmission and corrupts it
  // at every engaged listener.
  RadioState set_state(NodeId node, RadioState state);

  std::uint64_t start_transmission(NodeId node, const Frame& frame);

  // Pure observation; calling from SLEEP is a protocol bug.
  CcaResult cca(NodeId node) const;

  // t scaled by this node's drift, rounded to nearest tick.
  Tick local_time(NodeId node, Tick t) const;
  Tick local_now(NodeId node) const { return local_time(node, sched_.now()); }
  // Global delay equivalent to `local_delay` on this node's clock.
  Tick global_delay(NodeId node, Tick local_delay) const;

  const Topology& topology() const { return topo_; }
  Scheduler& scheduler() { return sched_; }

 private:
  struct Transmission {
    std::uint64_t id;
    NodeId src;
    Frame frame;
    Tick start, end;
    bool aborted = false;
    // Receivers that were awake at frame start and still eligible to decode.
    std::map<NodeId, bool> engaged;  // value: still intact here
    EventHandle end_event;
  };

  struct NodeInfo {
    RadioState state = RadioState::SLEEP;
    RadioSink* sink = nullptr;
    double drift = 0.0;
    std::vector<std::uint64_t> audible;  // active transmissions in range
    std::uint64_t sending = 0;           // transmission id while in TX
    std::uint32_t engagements = 0;       // frames this node is locked onto
  };

  void finish_transmission(std::uint64_t id);
  void drop_engagement(NodeId node, const char* reason);
  Transmission* find_tx(std::uint64_t id);

  Scheduler& sched_;
  const Topology& topo_;
  EnergyLedger& ledger_;
  std::vector<NodeInfo> nodes_;
  std::map<std::uint64_t, Transmission> active_;
  std::uint64_t next_tx_id_ = 1;
  ChannelTrace* trace_ = nullptr;
};

}  // namespace macsim
