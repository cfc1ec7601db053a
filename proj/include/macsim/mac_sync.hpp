#pragma once

#include <map>
#include <optional>
#include <vector>

#include "macsim/mac.hpp"

namespace macsim {

// S-MAC: static sleep schedule, SYNC virtual clusters, RTS-CTS-DATA-ACK with
// NAV-based overhearing avoidance. TMAC derives from this machine.
class SmacProtocol : public MacProtocol {
 public:
  explicit SmacProtocol(MacContext ctx) : MacProtocol(ctx) {}

  void on_boot() override;
  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

  // One followed schedule; nodes following >1 are border nodes.
  struct Schedule {
    Tick next_active_start = 0;  // global clock anchor, advanced per frame
    Tick active_start_time = 0;  // when the current active period began
    bool in_active = false;
    bool self_made = false;  // invented on search timeout, not heard
    bool announced = false;  // we have broadcast a SYNC for it
    std::uint64_t frame_count = 0;
    EventHandle start_ev, end_ev;
  };
  const std::vector<Schedule>& schedules() const { return schedules_; }
  bool is_border() const { return schedules_.size() > 1; }

 protected:
  enum class ExchangeRole : std::uint8_t { NONE, SENDER, RECEIVER };
  enum class ExchangeStage : std::uint8_t {
    IDLE, WAIT_CTS, WAIT_DATA_TX, WAIT_ACK, WAIT_DATA_RX, SEND_CTS, SEND_ACK
  };

  // TMAC hook points.
  virtual void on_active_start(std::size_t schedule_idx);
  virtual void on_active_end(std::size_t schedule_idx);
  virtual void on_activity() {}
  virtual Tick data_delay_after_cts() const { return p().sifs; }
  virtual bool handle_rts_full_buffer(const Frame& f) { return false; }
  virtual void on_cts_overheard(const Frame& f) {}
  virtual void on_nav_wake() {}

  void adopt_schedule(Tick next_active_start, bool self_made = false);
  void schedule_frame_events(std::size_t idx);
  bool any_active() const;
  bool in_data_period() const;
  // Data period of the schedule `dst` is known to follow (from its SYNCs).
  bool in_data_period_for(NodeId dst) const;
  Tick next_wake_time() const;
  void maybe_sleep();
  void wake_for_schedule();
  void nav_sleep();

  void try_send();
  void attempt_tx();
  void start_sync_broadcast();
  void exchange_failed();
  void exchange_done();
  void finish_sender_payload();

  Tick rts_duration() const;
  Tick cts_duration() const;

  std::vector<Schedule> schedules_;
  bool searching_ = true;
  bool bootstrap_hold_ = true;  // listen through cluster formation
  std::map<NodeId, Tick> neighbor_sched_;  // neighbour -> announced anchor
  EventHandle search_timeout_;
  bool pending_sync_ = false;
  std::uint64_t sync_slot_ = 0;  // which frame (mod period) we re-broadcast in

  ExchangeRole role_ = ExchangeRole::NONE;
  ExchangeStage stage_ = ExchangeStage::IDLE;
  NodeId peer_ = 0;
  std::uint64_t rx_payload_ = 0;
  NodeId rx_src_ = 0;
  EventHandle stage_timeout_;
  EventHandle backoff_ev_;
  bool attempting_ = false;   // contention/backoff pending
  bool sending_sync_ = false;
  EventHandle nav_wake_ev_;
};

// T-MAC: SMAC frame structure plus adaptive timeout (TA), FRTS and
// full-buffer priority.
class TmacProtocol : public SmacProtocol {
 public:
  explicit TmacProtocol(MacContext ctx) : SmacProtocol(ctx) {}

  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

 protected:
  void on_active_start(std::size_t schedule_idx) override;
  void on_active_end(std::size_t schedule_idx) override;
  void on_activity() override;
  Tick data_delay_after_cts() const override {
    // Leaves a slot for FRTS between CTS and DATA.
    return p().sifs + p().ctrl_airtime() + p().sifs;
  }
  bool handle_rts_full_buffer(const Frame& f) override;
  void on_cts_overheard(const Frame& f) override;
  void on_nav_wake() override;

  void reset_ta_deadline();
  void ta_expired();

  Tick ta_deadline_ = 0;
  EventHandle ta_ev_;
  bool frts_wake_pending_ = false;
};

// D-MAC: staggered receive/transmit slots along the gathering tree, data
// prediction (+3mu wakeups) and the MTS flag.
class DmacProtocol : public MacProtocol {
 public:
  explicit DmacProtocol(MacContext ctx) : MacProtocol(ctx) {}

  void on_boot() override;
  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

  std::optional<std::uint32_t> depth() const { return depth_; }

 protected:
  void queue_changed() override {}

  Tick cycle_len() const;
  void flood_rebroadcast();
  void end_flood();
  void start_schedule(Tick anchor);
  void schedule_next_cycle();
  void open_rx_window(Tick window_start);
  void close_rx_window();
  void open_tx_window(Tick window_start);
  void attempt_data();
  void tx_give_up();
  void maybe_sleep();
  bool is_leaf() const;

  std::optional<std::uint32_t> depth_;
  bool flooding_ = false;
  bool announced_level_ = false;
  Tick anchor_ = 0;
  std::uint64_t cycle_index_ = 0;

  bool in_rx_window_ = false;
  Tick rx_window_start_ = 0;
  bool received_in_window_ = false;
  bool rx_busy_ = false;  // receiving/acking past window end

  bool in_tx_window_ = false;
  Tick tx_window_start_ = 0;
  std::uint32_t tx_tries_this_window_ = 0;
  bool tx_busy_ = false;
  EventHandle window_ev_, tx_ev_, tx_end_ev_, ack_timeout_;
  EventHandle predict_ev_, backoff_ev_;
};

}  // namespace macsim
