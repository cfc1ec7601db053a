#include "macsim/mac_preamble.hpp"

#include <cmath>

namespace macsim {

Tick wisemac_tp(double theta_ppm, Tick interval_l, Tick tw) {
  // Exact integer ceiling of 4 * theta * L: theta_ppm is scaled to parts
  // per billion first so no floating-point rounding can flip the result.
  const auto theta_ppb =
      static_cast<unsigned __int128>(std::llround(theta_ppm * 1000.0));
  const unsigned __int128 num =
      4 * theta_ppb * static_cast<unsigned __int128>(interval_l);
  constexpr unsigned __int128 kBillion = 1000000000;
  Tick t = static_cast<Tick>((num + kBillion - 1) / kBillion);
  if (t < 1) t = 1;
  return std::min(t, tw);
}

// ------------------------------------------------------------- LPL base ----

void LplProtocol::on_boot() {
  sleep();
  Tick phase = rng("lpl").draw(p().tw);
  if (phase == 0) phase = 1;
  next_sample_at_ = now() + ch().global_delay(id(), phase);
  sample_ev_ = sched().schedule(next_sample_at_, [this]() { run_sample(); });
}

void LplProtocol::schedule_next_sample() {
  next_sample_at_ += ch().global_delay(id(), p().tw);
  sample_ev_ = sched().schedule(next_sample_at_, [this]() { run_sample(); });
}

void LplProtocol::run_sample() {
  schedule_next_sample();
  if (busy()) return;  // the protocol already owns the radio
  counters["samples"]++;
  if (state() == RadioState::SLEEP) listen();
  // A frame already in flight is audible as raw energy even though it can
  // no longer be decoded. React right away: a strobed preamble could
  // otherwise slip past the whole window during its silent gap.
  if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
    counters["samples_busy"]++;
    on_sample_detect();
    return;
  }
  sampling_ = true;
  after(sample_window(), [this]() {
    sampling_ = false;
    if (busy() || state() == RadioState::SLEEP || state() == RadioState::TX)
      return;
    if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
      counters["samples_busy"]++;
      on_sample_detect();
    } else if (state() == RadioState::LISTEN) {
      sleep();
    }
  });
}

// ----------------------------------------------------------------- B-MAC ----

void BmacProtocol::try_send() {
  if (queue_.empty() || role_ != Role::IDLE || attempting_) return;
  attempting_ = true;
  if (state() == RadioState::SLEEP) listen();
  backoff_ev_ = after(contention_delay(), [this]() { attempt_tx(); });
}

void BmacProtocol::attempt_tx() {
  attempting_ = false;
  if (queue_.empty() || role_ != Role::IDLE) return;
  if (state() == RadioState::SLEEP) listen();
  if (state() == RadioState::RX) return;  // reception in progress wins
  if (cca() == CcaResult::BUSY) {
    sleep();
    after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
    return;
  }
  role_ = Role::SENDING;
  queue_.head().attempts++;
  Frame pre;
  pre.kind = FrameKind::PREAMBLE;
  pre.src = id();
  pre.dst = kBroadcast;
  pre.airtime = p().preamble_airtime();
  counters["preambles_sent"]++;
  transmit(pre);
}

void BmacProtocol::send_done(bool ok) {
  role_ = Role::IDLE;
  counters[ok ? "send_ok" : "send_failed_final"]++;
  if (!queue_.empty()) {
    try_send();
  } else if (state() == RadioState::LISTEN) {
    sleep();
  }
}

void BmacProtocol::rx_done() {
  cancel(rx_timeout_);
  cancel(bail_ev_);
  role_ = Role::IDLE;
  if (state() == RadioState::LISTEN) sleep();
  try_send();
}

void BmacProtocol::on_sample_detect() {
  role_ = Role::RECEIVING;
  const Tick slack = 2 * (p().sifs + p().ctrl_airtime());
  rx_timeout_ = after(p().preamble_airtime() + p().data_airtime() + slack,
                      [this]() { rx_done(); });
}

void BmacProtocol::on_frame_start(const Frame& f, bool clean) {
  if (role_ != Role::RECEIVING || !clean) return;
  if (f.kind == FrameKind::DATA && f.dst != id() && f.dst != kBroadcast) {
    // Not for us: decode the header, then go back to sleep.
    counters["header_bails"]++;
    bail_ev_ = after(p().header_airtime(), [this]() {
      if (role_ == Role::RECEIVING) rx_done();
    });
  }
}

void BmacProtocol::on_frame_received(const Frame& f) {
  switch (f.kind) {
    case FrameKind::PREAMBLE:
      if (role_ == Role::RECEIVING) {
        cancel(rx_timeout_);
        rx_timeout_ = after(p().data_airtime() + 2 * p().sifs +
                                p().ctrl_airtime() + p().slot_len,
                            [this]() { rx_done(); });
      }
      return;
    case FrameKind::DATA:
      if (f.dst == kBroadcast) {
        deliver_to_app(f.src, f.payload_id);
        if (role_ == Role::RECEIVING) rx_done();
        return;
      }
      if (f.dst == id() && role_ == Role::RECEIVING) {
        cancel(rx_timeout_);
        cancel(bail_ev_);
        deliver_to_app(f.src, f.payload_id);
        const NodeId dst = f.src;
        after(p().sifs, [this, dst]() {
          if (role_ == Role::RECEIVING) transmit(make_ctrl(FrameKind::ACK, dst));
        });
      }
      return;
    case FrameKind::ACK:
      if (f.dst == id() && role_ == Role::SENDING) {
        cancel(ack_timeout_);
        if (!queue_.empty()) queue_.pop();
        send_done(true);
      }
      return;
    default:
      return;
  }
}

void BmacProtocol::on_corruption(const Frame& f) {
  if (role_ == Role::RECEIVING) {
    cancel(bail_ev_);  // header was garbage; keep listening for a retry
  }
}

void BmacProtocol::on_frame_sent(const Frame& f) {
  switch (f.kind) {
    case FrameKind::PREAMBLE:
      if (role_ == Role::SENDING && !queue_.empty())
        transmit(make_data(queue_.head().dst, queue_.head().payload_id));
      return;
    case FrameKind::DATA:
      if (role_ != Role::SENDING) return;
      if (f.dst == kBroadcast) {
        if (!queue_.empty()) queue_.pop();
        send_done(true);
        return;
      }
      ack_timeout_ =
          after(p().sifs + p().ctrl_airtime() + p().sifs, [this]() {
            if (!queue_.empty() && queue_.head().attempts > p().retries) {
              QueueItem it = queue_.pop();
              payload_failed(it.payload_id);
              send_done(false);
            } else {
              // Space the retry out; an immediate retry tends to re-collide
              // with the other sender's equally long preamble.
              role_ = Role::IDLE;
              sleep();
              after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
            }
          });
      return;
    case FrameKind::ACK:
      if (role_ == Role::RECEIVING) rx_done();
      return;
    default:
      return;
  }
}

// ---------------------------------------------------------------- B-MAC+ ----

std::uint32_t BmacPlusProtocol::block_count() const {
  const Tick ba = p().block_airtime();
  return static_cast<std::uint32_t>((p().preamble_airtime() + ba - 1) / ba);
}

void BmacPlusProtocol::try_send() {
  if (queue_.empty() || role_ != Role::IDLE || attempting_) return;
  attempting_ = true;
  if (state() == RadioState::SLEEP) listen();
  backoff_ev_ = after(contention_delay(), [this]() { attempt_tx(); });
}

void BmacPlusProtocol::attempt_tx() {
  attempting_ = false;
  if (queue_.empty() || role_ != Role::IDLE) return;
  if (state() == RadioState::SLEEP) listen();
  if (state() == RadioState::RX) return;
  if (cca() == CcaResult::BUSY) {
    sleep();
    after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
    return;
  }
  role_ = Role::SENDING;
  queue_.head().attempts++;
  blocks_left_ = block_count();
  counters["preambles_sent"]++;
  send_block();
}

void BmacPlusProtocol::send_block() {
  blocks_left_--;
  Frame b;
  b.kind = FrameKind::PREAMBLE_BLOCK;
  b.src = id();
  b.dst = queue_.empty() ? kBroadcast : queue_.head().dst;
  b.airtime = p().block_airtime();
  b.countdown = blocks_left_;  // blocks still to come after this one
  counters["blocks_sent"]++;
  transmit(b);
}

void BmacPlusProtocol::send_done(bool ok) {
  role_ = Role::IDLE;
  counters[ok ? "send_ok" : "send_failed_final"]++;
  if (!queue_.empty()) {
    try_send();
  } else if (state() == RadioState::LISTEN) {
    sleep();
  }
}

void BmacPlusProtocol::rx_done() {
  cancel(rx_timeout_);
  cancel(wake_ev_);
  role_ = Role::IDLE;
  if (state() == RadioState::LISTEN) sleep();
  try_send();
}

void BmacPlusProtocol::on_sample_detect() {
  role_ = Role::RECEIVING;
  // Worst case we woke mid-block; the next full block decodes.
  rx_timeout_ = after(3 * p().block_airtime() + p().slot_len,
                      [this]() { rx_done(); });
}

void BmacPlusProtocol::on_frame_start(const Frame& f, bool clean) {
  if (role_ == Role::WAIT_DATA && f.kind == FrameKind::DATA &&
      f.src == predicted_src_ && (f.dst == id() || f.dst == kBroadcast)) {
    const Tick err = now() > predicted_data_start_
                         ? now() - predicted_data_start_
                         : predicted_data_start_ - now();
    counters["data_start_err_max"] =
        std::max(counters["data_start_err_max"], static_cast<std::int64_t>(err));
    counters["data_start_checked"]++;
  }
}

void BmacPlusProtocol::on_frame_received(const Frame& f) {
  switch (f.kind) {
    case FrameKind::PREAMBLE_BLOCK: {
      if (role_ != Role::RECEIVING) return;
      cancel(rx_timeout_);
      if (f.dst != id() && f.dst != kBroadcast) {
        rx_done();  // someone else's traffic
        return;
      }
      // This block just ended; the data starts after the remaining blocks.
      predicted_data_start_ = now() + f.countdown * p().block_airtime();
      predicted_src_ = f.src;
      role_ = Role::WAIT_DATA;
      const Tick guard = us(50);
      const Tick wake_at = predicted_data_start_ > now() + guard
                               ? predicted_data_start_ - guard
                               : now();
      if (wake_at > now() + guard) {
        sleep();
        wake_ev_ = sched().schedule(wake_at, [this]() {
          if (role_ == Role::WAIT_DATA && state() == RadioState::SLEEP)
            listen();
        });
      }
      rx_timeout_ = after(predicted_data_start_ - now() + p().data_airtime() +
                              p().slot_len,
                          [this]() { rx_done(); });
      return;
    }
    case FrameKind::DATA:
      if (role_ != Role::WAIT_DATA && role_ != Role::RECEIVING) return;
      if (f.dst == kBroadcast) {
        deliver_to_app(f.src, f.payload_id);
        rx_done();
        return;
      }
      if (f.dst == id()) {
        cancel(rx_timeout_);
        deliver_to_app(f.src, f.payload_id);
        const NodeId dst = f.src;
        after(p().sifs, [this, dst]() {
          if (role_ == Role::WAIT_DATA || role_ == Role::RECEIVING)
            transmit(make_ctrl(FrameKind::ACK, dst));
        });
      }
      return;
    case FrameKind::ACK:
      if (f.dst == id() && role_ == Role::SENDING) {
        cancel(ack_timeout_);
        if (!queue_.empty()) queue_.pop();
        send_done(true);
      }
      return;
    default:
      return;
  }
}

void BmacPlusProtocol::on_corruption(const Frame& f) {
  if (role_ == Role::RECEIVING && f.kind == FrameKind::PREAMBLE_BLOCK) {
    cancel(rx_timeout_);
    rx_timeout_ = after(2 * p().block_airtime() + p().slot_len,
                        [this]() { rx_done(); });
  }
}

void BmacPlusProtocol::on_frame_sent(const Frame& f) {
  switch (f.kind) {
    case FrameKind::PREAMBLE_BLOCK:
      if (role_ != Role::SENDING) return;
      if (blocks_left_ > 0) {
        send_block();
      } else if (!queue_.empty()) {
        transmit(make_data(queue_.head().dst, queue_.head().payload_id));
      }
      return;
    case FrameKind::DATA:
      if (role_ != Role::SENDING) return;
      if (f.dst == kBroadcast) {
        if (!queue_.empty()) queue_.pop();
        send_done(true);
        return;
      }
      ack_timeout_ =
          after(p().sifs + p().ctrl_airtime() + p().sifs, [this]() {
            if (!queue_.empty() && queue_.head().attempts > p().retries) {
              QueueItem it = queue_.pop();
              payload_failed(it.payload_id);
              send_done(false);
            } else {
              role_ = Role::IDLE;
              sleep();
              after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
            }
          });
      return;
    case FrameKind::ACK:
      if (role_ == Role::WAIT_DATA || role_ == Role::RECEIVING) rx_done();
      return;
    default:
      return;
  }
}

// ----------------------------------------------------------------- X-MAC ----

std::uint32_t XmacProtocol::strobe_limit() const {
  const Tick unit = p().ctrl_airtime() + p().gap_len();
  return static_cast<std::uint32_t>((p().preamble_airtime() + unit - 1) / unit);
}

void XmacProtocol::try_send() {
  if (queue_.empty() || role_ != Role::IDLE || attempting_) return;
  attempting_ = true;
  if (state() == RadioState::SLEEP) listen();
  backoff_ev_ = after(contention_delay(), [this]() { attempt_tx(); });
}

void XmacProtocol::attempt_tx() {
  attempting_ = false;
  if (queue_.empty() || role_ != Role::IDLE) return;
  if (state() == RadioState::SLEEP) listen();
  if (state() == RadioState::RX) return;
  if (cca() == CcaResult::BUSY) {
    sleep();
    after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
    return;
  }
  queue_.head().attempts++;
  if (direct_send_) {
    counters["direct_data_sent"]++;
    begin_data();
    return;
  }
  role_ = Role::STROBING;
  strobes_left_ = strobe_limit();
  send_strobe();
}

void XmacProtocol::send_strobe() {
  if (role_ != Role::STROBING) return;
  if (strobes_left_ == 0 || queue_.empty()) {
    counters["train_no_ack"]++;
    begin_data();  // nobody answered; send anyway (broadcast / deaf target)
    return;
  }
  strobes_left_--;
  Frame s = make_ctrl(FrameKind::STROBE, queue_.head().dst);
  s.countdown = strobes_left_;
  counters["strobes_sent"]++;
  transmit(s);
}

void XmacProtocol::begin_data() {
  cancel(gap_ev_);
  role_ = Role::SEND_DATA;
  after(p().sifs, [this]() {
    if (role_ != Role::SEND_DATA || queue_.empty()) return;
    transmit(make_data(queue_.head().dst, queue_.head().payload_id));
  });
}

void XmacProtocol::send_done(bool ok) {
  role_ = Role::IDLE;
  direct_send_ = false;
  counters[ok ? "send_ok" : "send_failed_final"]++;
  if (!queue_.empty()) {
    try_send();
  } else if (state() == RadioState::LISTEN) {
    sleep();
  }
}

void XmacProtocol::start_linger() {
  role_ = Role::LINGER;
  cancel(linger_ev_);
  linger_ev_ = after(p().linger_len(), [this]() { rx_done(); });
}

void XmacProtocol::rx_done() {
  cancel(rx_timeout_);
  cancel(linger_ev_);
  role_ = Role::IDLE;
  if (state() == RadioState::LISTEN) sleep();
  try_send();
}

void XmacProtocol::on_sample_detect() {
  role_ = Role::RECEIVING;
  const Tick strobe_period = p().ctrl_airtime() + p().gap_len();
  rx_timeout_ = after(2 * strobe_period + p().slot_len, [this]() { rx_done(); });
}

void XmacProtocol::on_frame_start(const Frame& f, bool clean) {
  if (role_ == Role::LINGER && f.kind == FrameKind::DATA &&
      (f.dst == id() || f.dst == kBroadcast)) {
    cancel(linger_ev_);  // a queued sender went ahead; hear it out
  }
}

void XmacProtocol::on_frame_received(const Frame& f) {
  switch (f.kind) {
    case FrameKind::STROBE: {
      // A strobe for us while we are backing off or strobing ourselves:
      // yield and take the reception, or the sender burns its whole train.
      if (f.dst == id() &&
          (role_ == Role::IDLE || role_ == Role::STROBING)) {
        cancel(backoff_ev_);
        cancel(gap_ev_);
        attempting_ = false;
        role_ = Role::RECEIVING;
        counters["strobe_yields"]++;
      }
      if (role_ == Role::RECEIVING || role_ == Role::LINGER) {
        if (f.dst == id()) {
          cancel(rx_timeout_);
          cancel(linger_ev_);
          role_ = Role::RECEIVING;
          rx_peer_ = f.src;
          const NodeId dst = f.src;
          after(p().sifs, [this, dst]() {
            if (role_ == Role::RECEIVING)
              transmit(make_ctrl(FrameKind::STROBE_ACK, dst));
          });
        } else if (f.dst == kBroadcast) {
          cancel(rx_timeout_);
          role_ = Role::WAIT_DATA;
          const Tick remaining =
              f.countdown * (p().ctrl_airtime() + p().gap_len());
          rx_timeout_ = after(remaining + p().sifs + p().data_airtime() +
                                  p().slot_len,
                              [this]() { rx_done(); });
        } else {
          rx_done();  // strobing at somebody else
        }
      }
      return;
    }
    case FrameKind::STROBE_ACK: {
      if (f.dst == id() && role_ == Role::STROBING && !queue_.empty() &&
          f.src == queue_.head().dst) {
        cancel(gap_ev_);
        counters["early_acks"]++;
        begin_data();
        return;
      }
      // Second sender: the node we want just answered somebody else's
      // strobes; skip our own strobe train and send right after them.
      if (f.dst != id() && !queue_.empty() && f.src == queue_.head().dst &&
          (role_ == Role::IDLE || role_ == Role::STROBING)) {
        if (role_ == Role::STROBING) {
          cancel(gap_ev_);
          role_ = Role::IDLE;
        }
        direct_send_ = true;
        counters["second_sender"]++;
        cancel(backoff_ev_);
        attempting_ = true;
        const Tick wait = p().sifs + p().data_airtime() + p().sifs +
                          p().ctrl_airtime() + p().sifs + contention_delay();
        sleep();
        backoff_ev_ = after(wait, [this]() {
          if (state() == RadioState::SLEEP) listen();
          attempt_tx();
        });
      }
      return;
    }
    case FrameKind::DATA: {
      if (f.dst == kBroadcast) {
        deliver_to_app(f.src, f.payload_id);
        if (role_ == Role::WAIT_DATA || role_ == Role::RECEIVING ||
            role_ == Role::LINGER)
          rx_done();
        return;
      }
      if (f.dst == id() && (role_ == Role::WAIT_DATA ||
                            role_ == Role::RECEIVING || role_ == Role::LINGER)) {
        cancel(rx_timeout_);
        cancel(linger_ev_);
        role_ = Role::RECEIVING;
        deliver_to_app(f.src, f.payload_id);
        const NodeId dst = f.src;
        after(p().sifs, [this, dst]() {
          if (role_ == Role::RECEIVING) transmit(make_ctrl(FrameKind::ACK, dst));
        });
      }
      return;
    }
    case FrameKind::ACK:
      if (f.dst == id() && role_ == Role::WAIT_ACK) {
        cancel(ack_timeout_);
        if (!queue_.empty()) queue_.pop();
        send_done(true);
      }
      return;
    default:
      return;
  }
}

void XmacProtocol::on_corruption(const Frame& f) {
  if (role_ == Role::RECEIVING) {
    cancel(rx_timeout_);
    const Tick strobe_period = p().ctrl_airtime() + p().gap_len();
    rx_timeout_ =
        after(2 * strobe_period + p().slot_len, [this]() { rx_done(); });
  }
}

void XmacProtocol::on_frame_sent(const Frame& f) {
  switch (f.kind) {
    case FrameKind::STROBE:
      if (role_ == Role::STROBING)
        gap_ev_ = after(p().gap_len(), [this]() { send_strobe(); });
      return;
    case FrameKind::STROBE_ACK:
      if (role_ == Role::RECEIVING) {
        role_ = Role::WAIT_DATA;
        cancel(rx_timeout_);
        rx_timeout_ = after(p().sifs + p().data_airtime() + p().slot_len,
                            [this]() { rx_done(); });
      }
      return;
    case FrameKind::DATA:
      if (role_ != Role::SEND_DATA) return;
      if (f.dst == kBroadcast) {
        if (!queue_.empty()) queue_.pop();
        send_done(true);
        return;
      }
      role_ = Role::WAIT_ACK;
      ack_timeout_ =
          after(p().sifs + p().ctrl_airtime() + p().sifs, [this]() {
            direct_send_ = false;  // fall back to strobing on retry
            if (!queue_.empty() && queue_.head().attempts > p().retries) {
              QueueItem it = queue_.pop();
              payload_failed(it.payload_id);
              send_done(false);
            } else {
              role_ = Role::IDLE;
              sleep();
              after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
            }
          });
      return;
    case FrameKind::ACK:
      if (role_ == Role::RECEIVING) start_linger();
      return;
    default:
      return;
  }
}

// --------------------------------------------------------------- WiseMAC ----

void WisemacProtocol::try_send() {
  if (queue_.empty() || role_ != Role::IDLE || attempting_) return;
  plan_transmission();
}

void WisemacProtocol::plan_transmission() {
  const NodeId dst = queue_.head().dst;
  auto it = table_.find(dst);
  Tick tp = p().preamble_airtime();  // full wake interval: first contact
  bool full = true;
  if (!force_full_preamble_ && dst != kBroadcast && it != table_.end()) {
    const Tick l = now() > it->second.updated_at
                       ? now() - it->second.updated_at
                       : 1;
    const Tick min_tp = wisemac_tp(p().theta_ppm, l, p().tw);
    if (min_tp >= p().tw) {
      table_.erase(it);  // too stale to help
    } else {
      // Centre the short preamble on the predicted sample.
      const Tick lead =
          static_cast<Tick>(p().cw) * p().slot_len + p().sample_len + us(100);
      Tick pred = it->second.next_sample;
      while (pred < now() + lead + min_tp / 2) pred += p().tw;
      const Tick start = pred - min_tp / 2;
      tp = min_tp + p().sample_len;
      full = false;
      attempting_ = true;
      role_ = Role::WAIT_SLOT;
      counters["short_preambles"]++;
      const Tick wake_at = start > contention_delay() + now()
                               ? start
                               : now() + 1;
      slot_ev_ = sched().schedule(wake_at > now() ? wake_at : now() + 1,
                                  [this, tp]() {
                                    if (state() == RadioState::SLEEP) listen();
                                    attempt_tx(tp);
                                  });
      return;
    }
  }
  counters["full_preambles"]++;
  attempting_ = true;
  role_ = Role::WAIT_SLOT;
  if (state() == RadioState::SLEEP) listen();
  backoff_ev_ =
      after(contention_delay(), [this, tp]() { attempt_tx(tp); });
}

void WisemacProtocol::attempt_tx(Tick preamble_ticks) {
  attempting_ = false;
  if (queue_.empty() || role_ != Role::WAIT_SLOT) return;
  if (state() == RadioState::SLEEP) listen();
  if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
    role_ = Role::IDLE;
    sleep();
    after(rng("lpl").draw(p().tw) + 1, [this]() { try_send(); });
    return;
  }
  role_ = Role::SENDING;
  queue_.head().attempts++;
  planned_preamble_ = preamble_ticks;
  Frame pre;
  pre.kind = FrameKind::PREAMBLE;
  pre.src = id();
  pre.dst = queue_.head().dst;
  pre.airtime = preamble_ticks;
  transmit(pre);
}

void WisemacProtocol::send_done(bool ok) {
  role_ = Role::IDLE;
  counters[ok ? "send_ok" : "send_failed_final"]++;
  if (!queue_.empty()) {
    try_send();
  } else if (state() == RadioState::LISTEN) {
    sleep();
  }
}

void WisemacProtocol::rx_done() {
  cancel(rx_timeout_);
  role_ = Role::IDLE;
  if (state() == RadioState::LISTEN) sleep();
  try_send();
}

void WisemacProtocol::learn_from_ack(const Frame& f) {
  table_[f.src] = ScheduleEntry{now() + f.sampling_offset, now()};
}

void WisemacProtocol::on_sample_detect() {
  role_ = Role::RECEIVING;
  rx_timeout_ = after(p().preamble_airtime() + p().data_airtime() +
                          2 * (p().sifs + p().ctrl_airtime()) + p().slot_len,
                      [this]() { rx_done(); });
}

void WisemacProtocol::on_frame_start(const Frame& f, bool clean) {}

void WisemacProtocol::on_frame_received(const Frame& f) {
  if (f.kind == FrameKind::ACK) {
    // Every overheard ack refreshes the sender's schedule table.
    learn_from_ack(f);
    if (f.dst == id() && role_ == Role::WAIT_ACK) {
      cancel(ack_timeout_);
      force_full_preamble_ = false;
      const NodeId dst = f.src;
      if (!queue_.empty()) queue_.pop();
      if (last_more_bit_ && !queue_.empty() && queue_.head().dst == dst) {
        // Receiver stays awake for the announced follow-up.
        role_ = Role::SENDING;
        counters["more_bit_chains"]++;
        after(p().sifs, [this]() {
          if (role_ != Role::SENDING || queue_.empty()) return;
          Frame d = make_data(queue_.head().dst, queue_.head().payload_id);
          queue_.head().attempts++;
          d.more_bit = queue_.size() > 1;
          last_more_bit_ = d.more_bit;
          transmit(d);
        });
      } else {
        send_done(true);
      }
      return;
    }
    if (role_ == Role::RECEIVING) rx_done();  // overheard exchange finished
    return;
  }
  switch (f.kind) {
    case FrameKind::PREAMBLE:
      if (role_ == Role::RECEIVING) {
        cancel(rx_timeout_);
        rx_timeout_ = after(p().data_airtime() + 2 * p().sifs +
                                p().ctrl_airtime() + p().slot_len,
                            [this]() { rx_done(); });
      }
      return;
    case FrameKind::DATA: {
      if (f.dst == kBroadcast) {
        deliver_to_app(f.src, f.payload_id);
        if (role_ == Role::RECEIVING || role_ == Role::WAIT_MORE) rx_done();
        return;
      }
      if (f.dst == id() &&
          (role_ == Role::RECEIVING || role_ == Role::WAIT_MORE)) {
        cancel(rx_timeout_);
        role_ = Role::RECEIVING;
        rx_peer_ = f.src;
        deliver_to_app(f.src, f.payload_id);
        const bool more = f.more_bit;
        const NodeId dst = f.src;
        after(p().sifs, [this, dst, more]() {
          if (role_ != Role::RECEIVING) return;
          Frame a = make_ctrl(FrameKind::ACK, dst);
          const Tick eta = now() + p().ctrl_airtime();
          a.sampling_offset = next_sample_at_ > eta ? next_sample_at_ - eta : 0;
          a.more_bit = more;
          transmit(a);
        });
      }
      return;
    }
    default:
      return;
  }
}

void WisemacProtocol::on_corruption(const Frame& f) {
  if (role_ == Role::RECEIVING) {
    cancel(rx_timeout_);
    rx_timeout_ = after(p().preamble_airtime() + p().data_airtime() +
                            2 * (p().sifs + p().ctrl_airtime()),
                        [this]() { rx_done(); });
  }
}

void WisemacProtocol::on_frame_sent(const Frame& f) {
  switch (f.kind) {
    case FrameKind::PREAMBLE:
      if (role_ == Role::SENDING && !queue_.empty()) {
        Frame d = make_data(queue_.head().dst, queue_.head().payload_id);
        d.more_bit = queue_.size() > 1 &&
                     queue_.head().dst != kBroadcast;
        last_more_bit_ = d.more_bit;
        transmit(d);
      }
      return;
    case FrameKind::DATA:
      if (role_ != Role::SENDING) return;
      if (f.dst == kBroadcast) {
        if (!queue_.empty()) queue_.pop();
        send_done(true);
        return;
      }
      role_ = Role::WAIT_ACK;
      ack_timeout_ =
          after(p().sifs + p().ctrl_airtime() + p().sifs, [this]() {
            // Missed: forget the schedule and retry with a full preamble.
            if (!queue_.empty()) table_.erase(queue_.head().dst);
            force_full_preamble_ = true;
            counters["ack_misses"]++;
            if (!queue_.empty() && queue_.head().attempts > p().retries) {
              QueueItem it = queue_.pop();
              payload_failed(it.payload_id);
              send_done(false);
            } else {
              role_ = Role::IDLE;
              try_send();
            }
          });
      return;
    case FrameKind::ACK:
      if (role_ == Role::RECEIVING) {
        if (f.more_bit) {
          role_ = Role::WAIT_MORE;
          cancel(rx_timeout_);
          rx_timeout_ = after(p().sifs + p().data_airtime() + p().slot_len,
                              [this]() { rx_done(); });
        } else {
          rx_done();
        }
      }
      return;
    default:
      return;
  }
}

}  // namespace macsim
