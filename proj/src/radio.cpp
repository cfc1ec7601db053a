#include "macsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace macsim {

const char* frame_kind_name(FrameKind k) {
  switch (k) {
    case FrameKind::SYNC: return "SYNC";
    case FrameKind::RTS: return "RTS";
    case FrameKind::CTS: return "CTS";
    case FrameKind::DATA: return "DATA";
    case FrameKind::ACK: return "ACK";
    case FrameKind::FRTS: return "FRTS";
    case FrameKind::PREAMBLE: return "PREAMBLE";
    case FrameKind::PREAMBLE_BLOCK: return "PREAMBLE_BLOCK";
    case FrameKind::STROBE: return "STROBE";
    case FrameKind::STROBE_ACK: return "STROBE_ACK";
  }
  return "?";
}

const char* radio_state_name(RadioState s) {
  switch (s) {
    case RadioState::SLEEP: return "SLEEP";
    case RadioState::LISTEN: return "LISTEN";
    case RadioState::RX: return "RX";
    case RadioState::TX: return "TX";
  }
  return "?";
}

Channel::Channel(Scheduler& sched, const Topology& topo, EnergyLedger& ledger)
    : sched_(sched), topo_(topo), ledger_(ledger), nodes_(topo.node_count()) {}

namespace {
bool awake(RadioState s) { return s == RadioState::LISTEN || s == RadioState::RX; }
}  // namespace

RadioState Channel::set_state(NodeId node, RadioState state) {
  NodeInfo& n = nodes_.at(node);
  const RadioState prev = n.state;
  if (prev == state) return prev;

  if (prev == RadioState::TX && n.sending != 0) {
    // Abort: corrupts the frame at every engaged listener.
    Transmission* tx = find_tx(n.sending);
    if (tx != nullptr) {
      tx->aborted = true;
      const Tick now = sched_.now();
      for (auto& [rcv, intact] : tx->engaged) {
        intact = false;
        NodeInfo& r = nodes_.at(rcv);
        if (r.engagements > 0 && --r.engagements == 0 &&
            r.state == RadioState::RX) {
          r.state = RadioState::LISTEN;
          ledger_.note_transition(rcv, RadioState::LISTEN, now);
          if (trace_) trace_->on_state(rcv, RadioState::LISTEN, now);
        }
        if (r.sink) r.sink->on_corruption(tx->frame);
      }
      for (NodeId nb : topo_.neighbors(node)) {
        auto& aud = nodes_.at(nb).audible;
        aud.erase(std::remove(aud.begin(), aud.end(), tx->id), aud.end());
      }
      sched_.cancel(tx->end_event);
      active_.erase(tx->id);
    }
    n.sending = 0;
  }

  if (awake(prev) && !awake(state) && n.engagements > 0) {
    // Listener bailed out mid-frame: it simply misses the frame.
    for (auto& [id, tx] : active_) tx.engaged.erase(node);
    n.engagements = 0;
  }

  n.state = state;
  ledger_.note_transition(node, state, sched_.now());
  if (trace_) trace_->on_state(node, state, sched_.now());
  return prev;
}

std::uint64_t Channel::start_transmission(NodeId node, const Frame& frame) {
  NodeInfo& n = nodes_.at(node);
  if (n.state == RadioState::TX)
    throw std::logic_error("Channel: start_transmission while already in TX");
  if (frame.airtime == 0)
    throw std::logic_error("Channel: zero-airtime frame");

  set_state(node, RadioState::TX);
  const std::uint64_t id = next_tx_id_++;
  n.sending = id;
  const Tick start = sched_.now();
  const Tick end = start + frame.airtime;

  Transmission tx;
  tx.id = id;
  tx.src = node;
  tx.frame = frame;
  tx.frame.src = node;
  tx.start = start;
  tx.end = end;
  if (trace_) trace_->on_tx_start(node, tx.frame, start);

  for (NodeId nb : topo_.neighbors(node)) {
    NodeInfo& r = nodes_.at(nb);
    const bool overlapped = !r.audible.empty();
    r.audible.push_back(id);
    if (!awake(r.state)) continue;
    // Any overlap corrupts every frame audible here, both ways.
    if (overlapped) {
      for (std::uint64_t other : r.audible) {
        if (other == id) continue;
        Transmission* ot = find_tx(other);
        if (ot == nullptr) continue;
        auto it = ot->engaged.find(nb);
        if (it != ot->engaged.end()) it->second = false;
      }
    }
    tx.engaged.emplace(nb, !overlapped);
    ++r.engagements;
    if (r.state == RadioState::LISTEN) {
      r.state = RadioState::RX;
      ledger_.note_transition(nb, RadioState::RX, start);
      if (trace_) trace_->on_state(nb, RadioState::RX, start);
    }
  }

  auto [it, ok] = active_.emplace(id, std::move(tx));
  it->second.end_event =
      sched_.schedule(end, [this, id]() { finish_transmission(id); });

  // Notify after bookkeeping so sinks see a consistent channel.
  const Frame& f = it->second.frame;
  for (NodeId nb : topo_.neighbors(node)) {
    NodeInfo& r = nodes_.at(nb);
    if (!awake(r.state)) continue;
    auto eit = it->second.engaged.find(nb);
    const bool clean = eit != it->second.engaged.end() && eit->second;
    if (r.sink) r.sink->on_frame_start(f, clean);
  }
  return id;
}

void Channel::finish_transmission(std::uint64_t id) {
  auto it = active_.find(id);
  if (it == active_.end()) return;
  Transmission tx = std::move(it->second);
  active_.erase(it);

  for (NodeId nb : topo_.neighbors(tx.src)) {
    auto& aud = nodes_.at(nb).audible;
    aud.erase(std::remove(aud.begin(), aud.end(), id), aud.end());
  }

  // Transmitter returns to LISTEN; the MAC decides what happens next.
  NodeInfo& s = nodes_.at(tx.src);
  s.sending = 0;
  if (s.state == RadioState::TX) {
    s.state = RadioState::LISTEN;
    ledger_.note_transition(tx.src, RadioState::LISTEN, sched_.now());
    if (trace_) trace_->on_state(tx.src, RadioState::LISTEN, sched_.now());
  }

  for (auto& [rcv, intact] : tx.engaged) {
    NodeInfo& r = nodes_.at(rcv);
    if (r.engagements > 0 && --r.engagements == 0 && r.state == RadioState::RX) {
      r.state = RadioState::LISTEN;
      ledger_.note_transition(rcv, RadioState::LISTEN, sched_.now());
      if (trace_) trace_->on_state(rcv, RadioState::LISTEN, sched_.now());
    }
  }
  for (auto& [rcv, intact] : tx.engaged) {
    NodeInfo& r = nodes_.at(rcv);
    if (!r.sink) continue;
    if (intact) {
      if (trace_) trace_->on_delivery(tx.src, rcv, tx.frame, tx.start, tx.end);
      r.sink->on_frame_received(tx.frame);
    } else {
      r.sink->on_corruption(tx.frame);
    }
  }
  if (s.sink) s.sink->on_frame_sent(tx.frame);
}

CcaResult Channel::cca(NodeId node) const {
  const NodeInfo& n = nodes_.at(node);
  if (n.state == RadioState::SLEEP)
    throw std::logic_error("Channel: CCA from SLEEP");
  return n.audible.empty() ? CcaResult::CLEAR : CcaResult::BUSY;
}

Tick Channel::local_time(NodeId node, Tick t) const {
  const double d = nodes_.at(node).drift;
  return static_cast<Tick>(std::llround(static_cast<double>(t) * (1.0 + d)));
}

Tick Channel::global_delay(NodeId node, Tick local_delay) const {
  const double d = nodes_.at(node).drift;
  const Tick g = static_cast<Tick>(
      std::llround(static_cast<double>(local_delay) / (1.0 + d)));
  return g == 0 ? 1 : g;
}

Channel::Transmission* Channel::find_tx(std::uint64_t id) {
  auto it = active_.find(id);
  return it == active_.end() ? nullptr : &it->second;
}

}  // namespace macsim
