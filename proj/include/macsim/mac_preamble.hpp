#pragma once

#include <algorithm>
#include <map>
#include <optional>

#include "macsim/mac.hpp"

namespace macsim {

// Shared low-power-listening scaffold: periodic channel samples on the node's
// local clock; a busy sample hands control to the protocol's receive path.
class LplProtocol : public MacProtocol {
 public:
  explicit LplProtocol(MacContext ctx) : MacProtocol(ctx) {}

  void on_boot() override;

  Tick next_sample_at() const { return next_sample_at_; }

 protected:
  // True while the protocol is mid-send or mid-receive; samples are skipped.
  virtual bool busy() const = 0;
  // How long one channel sample keeps the radio on.
  virtual Tick sample_window() const { return p().sample_len; }
  // The sample window ended with a busy channel; stay awake and receive.
  virtual void on_sample_detect() = 0;

  void schedule_next_sample();
  void run_sample();

  Tick next_sample_at_ = 0;  // global time of the next scheduled sample
  bool sampling_ = false;
  EventHandle sample_ev_;
};

// B-MAC: full-length preamble (tw + sample), receivers hold the radio on for
// the whole remainder; overhearers bail after decoding the data header.
class BmacProtocol : public LplProtocol {
 public:
  explicit BmacProtocol(MacContext ctx) : LplProtocol(ctx) {}

  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

 protected:
  enum class Role : std::uint8_t { IDLE, SENDING, RECEIVING };

  void queue_changed() override { try_send(); }
  bool busy() const override { return role_ != Role::IDLE; }
  void on_sample_detect() override;

  void try_send();
  void attempt_tx();
  void send_done(bool ok);
  void rx_done();

  Role role_ = Role::IDLE;
  bool attempting_ = false;
  EventHandle backoff_ev_, ack_timeout_, rx_timeout_, bail_ev_;
};

// B-MAC+: the preamble is a countdown of short blocks; the target receiver
// computes the data start time, sleeps through the rest of the countdown and
// wakes just in time.
class BmacPlusProtocol : public LplProtocol {
 public:
  explicit BmacPlusProtocol(MacContext ctx) : LplProtocol(ctx) {}

  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

  std::uint32_t block_count() const;
  // Data start computed from the last detection block's countdown field.
  Tick predicted_data_start() const { return predicted_data_start_; }

 protected:
  enum class Role : std::uint8_t { IDLE, SENDING, RECEIVING, WAIT_DATA };

  void queue_changed() override { try_send(); }
  bool busy() const override { return role_ != Role::IDLE; }
  void on_sample_detect() override;

  void try_send();
  void attempt_tx();
  void send_block();
  void send_done(bool ok);
  void rx_done();

  Role role_ = Role::IDLE;
  bool attempting_ = false;
  std::uint32_t blocks_left_ = 0;
  Tick predicted_data_start_ = 0;
  NodeId predicted_src_ = 0;  // sender whose countdown set the prediction
  EventHandle backoff_ev_, ack_timeout_, rx_timeout_, wake_ev_;
};

// X-MAC: strobed preamble with gaps; the receiver's early strobe-ack cuts the
// train short, and it lingers awake briefly after the exchange so queued
// senders can transmit without strobing.
class XmacProtocol : public LplProtocol {
 public:
  explicit XmacProtocol(MacContext ctx) : LplProtocol(ctx) {}

  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

  std::uint32_t strobe_limit() const;

 protected:
  enum class Role : std::uint8_t {
    IDLE, STROBING, SEND_DATA, WAIT_ACK, RECEIVING, WAIT_DATA, LINGER
  };

  void queue_changed() override { try_send(); }
  bool busy() const override { return role_ != Role::IDLE; }
  // The strobe train has silent gaps; the sample must outlast one gap so a
  // strobe is guaranteed to start (or be decoded whole) inside the window.
  Tick sample_window() const override {
    return std::max(p().sample_len, p().gap_len() + us(200));
  }
  void on_sample_detect() override;

  void try_send();
  void attempt_tx();
  void send_strobe();
  void begin_data();
  void send_done(bool ok);
  void start_linger();
  void rx_done();

  Role role_ = Role::IDLE;
  bool attempting_ = false;
  bool direct_send_ = false;  // second-sender shortcut: skip the strobe train
  std::uint32_t strobes_left_ = 0;
  NodeId rx_peer_ = 0;
  EventHandle backoff_ev_, gap_ev_, ack_timeout_, rx_timeout_, linger_ev_;
};

// WiseMAC: learns each neighbour's sampling schedule from its acks and sends
// a minimal preamble centred on the predicted sample; falls back to a full
// wakeup-interval preamble on first contact or after a miss.
class WisemacProtocol : public LplProtocol {
 public:
  explicit WisemacProtocol(MacContext ctx) : LplProtocol(ctx) {}

  void on_frame_start(const Frame& f, bool clean) override;
  void on_frame_received(const Frame& f) override;
  void on_corruption(const Frame& f) override;
  void on_frame_sent(const Frame& f) override;

  struct ScheduleEntry {
    Tick next_sample = 0;  // predicted global time of the neighbour's sample
    Tick updated_at = 0;
  };
  const std::map<NodeId, ScheduleEntry>& schedule_table() const {
    return table_;
  }

 protected:
  enum class Role : std::uint8_t {
    IDLE, WAIT_SLOT, SENDING, WAIT_ACK, RECEIVING, WAIT_MORE
  };

  void queue_changed() override { try_send(); }
  bool busy() const override { return role_ != Role::IDLE; }
  void on_sample_detect() override;

  void try_send();
  void plan_transmission();
  void attempt_tx(Tick preamble_ticks);
  void send_done(bool ok);
  void rx_done();
  void learn_from_ack(const Frame& f);

  std::map<NodeId, ScheduleEntry> table_;
  Role role_ = Role::IDLE;
  bool attempting_ = false;
  bool force_full_preamble_ = false;
  bool last_more_bit_ = false;
  Tick planned_preamble_ = 0;
  NodeId rx_peer_ = 0;
  EventHandle slot_ev_, backoff_ev_, ack_timeout_, rx_timeout_;
};

}  // namespace macsim
