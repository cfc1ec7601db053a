#include "macsim/mac_sync.hpp"

#include <algorithm>

namespace macsim {

namespace {
constexpr Tick kSyncMatchTol = ms(10);
}

// ---------------------------------------------------------------- S-MAC ----

void SmacProtocol::on_boot() {
  listen();
  // Listen for a neighbour's SYNC; claim our own schedule on timeout.
  const Tick timeout = p().frame_len + rng("sync").draw(p().frame_len);
  search_timeout_ = after(timeout, [this]() {
    if (!searching_) return;
    searching_ = false;
    const Tick phase = rng("sync").draw(p().frame_len);
    adopt_schedule(now() + phase, /*self_made=*/true);
  });
}

void SmacProtocol::adopt_schedule(Tick next_active_start, bool self_made) {
  searching_ = false;
  cancel(search_timeout_);
  Schedule s;
  s.self_made = self_made;
  s.next_active_start = next_active_start;
  while (s.next_active_start < now() + 1) s.next_active_start += p().frame_len;
  schedules_.push_back(s);
  const std::size_t idx = schedules_.size() - 1;
  if (idx == 0) sync_slot_ = rng("sync").draw(p().sync_period_frames);
  pending_sync_ = true;
  counters["schedules_adopted"]++;
  schedule_frame_events(idx);
  // Announce right away, while neighbours are still in their
  // listen-for-SYNC phase; otherwise one common schedule cannot flood the
  // network before distant nodes' search timeouts invent their own.
  start_sync_broadcast();
  maybe_sleep();
}

void SmacProtocol::schedule_frame_events(std::size_t idx) {
  Schedule& s = schedules_[idx];
  s.start_ev = sched().schedule(s.next_active_start,
                                [this, idx]() { on_active_start(idx); });
}

void SmacProtocol::on_active_start(std::size_t idx) {
  Schedule& s = schedules_[idx];
  bootstrap_hold_ = false;
  s.in_active = true;
  s.active_start_time = now();
  s.frame_count++;
  s.next_active_start = now() + ch().global_delay(id(), p().frame_len);
  schedule_frame_events(idx);
  s.end_ev = after(p().active_len, [this, idx]() { on_active_end(idx); });

  if (!nav_active()) {
    wake_for_schedule();
  } else {
    nav_sleep();
  }

  // Synchronization sub-period: periodic (or pending) SYNC re-broadcast.
  if (idx == 0 &&
      (pending_sync_ || s.frame_count % p().sync_period_frames == sync_slot_)) {
    start_sync_broadcast();
  }
  after(p().sync_len, [this]() {
    if (any_active()) try_send();
  });
}

void SmacProtocol::on_active_end(std::size_t idx) {
  schedules_[idx].in_active = false;
  // An in-progress exchange extends the active period; otherwise sleep.
  maybe_sleep();
}

bool SmacProtocol::any_active() const {
  for (const auto& s : schedules_)
    if (s.in_active) return true;
  return false;
}

bool SmacProtocol::in_data_period() const {
  // Inside some active period, past its sync sub-period.
  for (const auto& s : schedules_) {
    if (s.in_active && now() >= s.active_start_time + p().sync_len) return true;
  }
  return false;
}

bool SmacProtocol::in_data_period_for(NodeId dst) const {
  auto it = neighbor_sched_.find(dst);
  if (dst == kBroadcast || it == neighbor_sched_.end()) return in_data_period();
  for (const auto& s : schedules_) {
    const Tick a = s.next_active_start % p().frame_len;
    const Tick b = it->second % p().frame_len;
    Tick d = a > b ? a - b : b - a;
    d = std::min(d, p().frame_len - d);
    if (d <= kSyncMatchTol)
      return s.in_active && now() >= s.active_start_time + p().sync_len;
  }
  return in_data_period();
}

Tick SmacProtocol::next_wake_time() const {
  Tick t = ~Tick{0};
  for (const auto& s : schedules_) t = std::min(t, s.next_active_start);
  return t;
}

void SmacProtocol::wake_for_schedule() {
  if (state() == RadioState::SLEEP) listen();
}

void SmacProtocol::maybe_sleep() {
  if (bootstrap_hold_) return;  // keep hearing rival clusters' announcements
  if (role_ != ExchangeRole::NONE || attempting_ || sending_sync_) return;
  if (any_active() && !nav_active()) return;
  if (state() == RadioState::LISTEN) sleep();
}

void SmacProtocol::nav_sleep() {
  if (!nav_active() || role_ != ExchangeRole::NONE) return;
  cancel(backoff_ev_);
  attempting_ = false;
  if (state() == RadioState::LISTEN) sleep();
  cancel(nav_wake_ev_);
  nav_wake_ev_ = sched().schedule(nav_until_, [this]() {
    // NAV expired: resume the normal schedule.
    if (role_ != ExchangeRole::NONE) return;
    if (any_active()) {
      wake_for_schedule();
      on_nav_wake();
      try_send();
    }
  });
}

void SmacProtocol::start_sync_broadcast() {
  if (sending_sync_) return;
  sending_sync_ = true;
  const Tick jitter = rng("sync").draw(p().sync_len / 2) + contention_delay();
  after(jitter, [this]() {
    if (role_ != ExchangeRole::NONE || !awake() || nav_active() ||
        state() == RadioState::RX || cca() == CcaResult::BUSY) {
      sending_sync_ = false;  // skip this round, try again next period
      return;
    }
    Frame f = make_ctrl(FrameKind::SYNC, kBroadcast);
    // Offset is measured from the frame's end, where receivers act on it.
    f.sampling_offset =
        schedules_[0].next_active_start - (now() + p().ctrl_airtime());
    schedules_[0].announced = true;
    pending_sync_ = false;
    counters["sync_sent"]++;
    transmit(f);
  });
}

Tick SmacProtocol::rts_duration() const {
  // Remainder of the exchange after the RTS: CTS + DATA + ACK and gaps.
  return p().sifs + p().ctrl_airtime() + data_delay_after_cts() +
         p().data_airtime() + p().sifs + p().ctrl_airtime();
}

Tick SmacProtocol::cts_duration() const {
  return data_delay_after_cts() + p().data_airtime() + p().sifs +
         p().ctrl_airtime();
}

void SmacProtocol::try_send() {
  if (queue_.empty() || role_ != ExchangeRole::NONE || attempting_) return;
  if (!awake() || nav_active()) return;
  if (!in_data_period_for(queue_.head().dst)) return;
  attempting_ = true;
  backoff_ev_ = after(contention_delay(), [this]() { attempt_tx(); });
}

void SmacProtocol::attempt_tx() {
  attempting_ = false;
  if (queue_.empty() || role_ != ExchangeRole::NONE) {
    maybe_sleep();
    return;
  }
  if (!awake() || nav_active()) return;
  if (!in_data_period_for(queue_.head().dst)) {
    // The destination's data period has passed; wait for the next frame.
    maybe_sleep();
    return;
  }
  if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
    // Busy medium: re-contend.
    try_send();
    return;
  }
  QueueItem& item = queue_.head();
  item.attempts++;
  role_ = ExchangeRole::SENDER;
  stage_ = ExchangeStage::WAIT_CTS;
  peer_ = item.dst;
  Frame f = make_ctrl(FrameKind::RTS, peer_);
  f.duration_field = rts_duration();
  counters["rts_sent"]++;
  transmit(f);
}

void SmacProtocol::exchange_failed() {
  cancel(stage_timeout_);
  if (stage_ == ExchangeStage::WAIT_CTS) counters["cts_timeouts"]++;
  if (stage_ == ExchangeStage::WAIT_ACK) counters["ack_timeouts"]++;
  role_ = ExchangeRole::NONE;
  stage_ = ExchangeStage::IDLE;
  peer_ = 0;
  if (!queue_.empty() && queue_.head().attempts > p().retries) {
    QueueItem it = queue_.pop();
    payload_failed(it.payload_id);
    exchange_done();
    return;
  }
  // The target is often NAV-sleeping through someone else's exchange; sleep
  // one exchange length before re-contending instead of idling blind.
  if (state() == RadioState::LISTEN) sleep();
  after(rts_duration() + p().ctrl_airtime(), [this]() {
    if (role_ != ExchangeRole::NONE) return;
    if (any_active() && !nav_active()) {
      wake_for_schedule();
      try_send();
    }
  });
  maybe_sleep();
}

void SmacProtocol::exchange_done() {
  cancel(stage_timeout_);
  role_ = ExchangeRole::NONE;
  stage_ = ExchangeStage::IDLE;
  peer_ = 0;
  if (any_active() && !nav_active()) {
    try_send();
  }
  maybe_sleep();
}

void SmacProtocol::finish_sender_payload() {
  if (!queue_.empty()) queue_.pop();
  counters["unicast_delivered"]++;
  exchange_done();
}

void SmacProtocol::on_frame_start(const Frame& f, bool clean) {}

void SmacProtocol::on_frame_received(const Frame& f) {
  switch (f.kind) {
    case FrameKind::SYNC: {
      Tick anchor = now() + f.sampling_offset;
      neighbor_sched_[f.src] = anchor;
      if (searching_) {
        adopt_schedule(anchor);
        return;
      }
      // Same cluster? Re-anchor; new cluster? Become a border node.
      for (std::size_t i = 0; i < schedules_.size(); ++i) {
        Schedule& s = schedules_[i];
        Tick a = anchor % p().frame_len;
        Tick b = s.next_active_start % p().frame_len;
        Tick d = a > b ? a - b : b - a;
        d = std::min(d, p().frame_len - d);
        if (d <= kSyncMatchTol) {
          Tick next = anchor;
          while (next < now() + 1) next += p().frame_len;
          if (next != s.next_active_start && !s.in_active) {
            cancel(s.start_ev);
            s.next_active_start = next;
            schedule_frame_events(i);
          }
          return;
        }
      }
      // An unannounced, self-invented schedule yields to the neighbour's so
      // virtual clusters can merge; otherwise we become a border node.
      if (schedules_.size() == 1 && schedules_[0].self_made &&
          !schedules_[0].announced && role_ == ExchangeRole::NONE) {
        Schedule& s = schedules_[0];
        cancel(s.start_ev);
        cancel(s.end_ev);
        schedules_.clear();
        counters["schedule_replaced"]++;
        adopt_schedule(anchor);
        if (!any_active()) maybe_sleep();
        return;
      }
      if (schedules_.size() < 2) {
        adopt_schedule(anchor);  // border node: follow both schedules
        counters["border"] = 1;
      }
      return;
    }
    case FrameKind::RTS: {
      if (f.dst == id()) {
        counters["rts_for_me"]++;
        if (role_ != ExchangeRole::NONE || !awake()) {
          counters["rts_ignored_busy"]++;
          return;
        }
        if (handle_rts_full_buffer(f)) return;
        role_ = ExchangeRole::RECEIVER;
        stage_ = ExchangeStage::SEND_CTS;
        peer_ = f.src;
        after(p().sifs, [this]() {
          if (stage_ != ExchangeStage::SEND_CTS) return;
          Frame c = make_ctrl(FrameKind::CTS, peer_);
          c.duration_field = cts_duration();
          transmit(c);
        });
      } else {
        set_nav(f.duration_field);
        nav_sleep();
      }
      return;
    }
    case FrameKind::CTS: {
      if (f.dst == id()) {
        if (role_ == ExchangeRole::SENDER && stage_ == ExchangeStage::WAIT_CTS) {
          cancel(stage_timeout_);
          stage_ = ExchangeStage::WAIT_DATA_TX;
          after(data_delay_after_cts(), [this]() {
            if (stage_ != ExchangeStage::WAIT_DATA_TX || queue_.empty()) return;
            transmit(make_data(peer_, queue_.head().payload_id));
          });
        }
      } else {
        on_cts_overheard(f);
        set_nav(f.duration_field);
        nav_sleep();
      }
      return;
    }
    case FrameKind::FRTS: {
      if (f.dst == id()) {
        if (role_ == ExchangeRole::NONE) {
          // Reserve attention for right after the ongoing exchange.
          set_nav(f.duration_field);
          nav_sleep();
        }
      } else {
        set_nav(f.duration_field);
        nav_sleep();
      }
      return;
    }
    case FrameKind::DATA: {
      if (f.dst == kBroadcast) {
        deliver_to_app(f.src, f.payload_id);
        return;
      }
      if (f.dst != id()) return;
      if (role_ == ExchangeRole::RECEIVER &&
          stage_ == ExchangeStage::WAIT_DATA_RX && f.src == peer_) {
        cancel(stage_timeout_);
        stage_ = ExchangeStage::SEND_ACK;
        deliver_to_app(f.src, f.payload_id);
        after(p().sifs, [this]() {
          if (stage_ != ExchangeStage::SEND_ACK) return;
          transmit(make_ctrl(FrameKind::ACK, peer_));
        });
      }
      return;
    }
    case FrameKind::ACK: {
      if (f.dst == id() && role_ == ExchangeRole::SENDER &&
          stage_ == ExchangeStage::WAIT_ACK) {
        cancel(stage_timeout_);
        finish_sender_payload();
      }
      return;
    }
    default:
      return;
  }
}

void SmacProtocol::on_corruption(const Frame& f) {
  // Timeouts recover the exchange; corrupted SYNC is simply ignored.
}

void SmacProtocol::on_frame_sent(const Frame& f) {
  switch (f.kind) {
    case FrameKind::SYNC:
      sending_sync_ = false;
      maybe_sleep();
      return;
    case FrameKind::RTS:
      if (role_ == ExchangeRole::SENDER && stage_ == ExchangeStage::WAIT_CTS) {
        stage_timeout_ = after(p().sifs + p().ctrl_airtime() + p().sifs,
                               [this]() { exchange_failed(); });
      }
      return;
    case FrameKind::CTS:
      if (role_ == ExchangeRole::RECEIVER && stage_ == ExchangeStage::SEND_CTS) {
        stage_ = ExchangeStage::WAIT_DATA_RX;
        stage_timeout_ =
            after(data_delay_after_cts() + p().data_airtime() + p().sifs,
                  [this]() {
                    role_ = ExchangeRole::NONE;
                    stage_ = ExchangeStage::IDLE;
                    exchange_done();
                  });
      }
      return;
    case FrameKind::DATA:
      if (role_ == ExchangeRole::SENDER) {
        if (peer_ == kBroadcast || f.dst == kBroadcast) {
          if (!queue_.empty()) queue_.pop();
          exchange_done();
          return;
        }
        stage_ = ExchangeStage::WAIT_ACK;
        stage_timeout_ = after(p().sifs + p().ctrl_airtime() + p().sifs,
                               [this]() { exchange_failed(); });
      }
      return;
    case FrameKind::ACK:
      if (role_ == ExchangeRole::RECEIVER && stage_ == ExchangeStage::SEND_ACK) {
        exchange_done();
      }
      return;
    default:
      return;
  }
}

// ---------------------------------------------------------------- T-MAC ----

void TmacProtocol::on_active_start(std::size_t idx) {
  SmacProtocol::on_active_start(idx);
  if (idx == 0 || !ta_ev_.valid()) {
    ta_deadline_ = now() + p().sync_len + p().ta;
    cancel(ta_ev_);
    ta_ev_ = sched().schedule(ta_deadline_, [this]() { ta_expired(); });
  }
}

void TmacProtocol::on_active_end(std::size_t idx) {
  schedules_[idx].in_active = false;
  // TA, not the static active period, decides when a TMAC node sleeps.
}

void TmacProtocol::on_activity() {
  if (!awake() && state() != RadioState::TX) return;
  const Tick deadline = now() + p().ta;
  if (deadline > ta_deadline_) {
    ta_deadline_ = deadline;
    cancel(ta_ev_);
    ta_ev_ = sched().schedule(ta_deadline_, [this]() { ta_expired(); });
  }
}

void TmacProtocol::ta_expired() {
  ta_ev_ = EventHandle{};
  if (role_ != ExchangeRole::NONE || attempting_ || sending_sync_ ||
      state() == RadioState::TX || state() == RadioState::RX) {
    ta_deadline_ = now() + p().ta;
    ta_ev_ = sched().schedule(ta_deadline_, [this]() { ta_expired(); });
    return;
  }
  if (state() == RadioState::LISTEN) sleep();
}

void TmacProtocol::reset_ta_deadline() { on_activity(); }

void TmacProtocol::on_nav_wake() { on_activity(); }

void TmacProtocol::on_frame_start(const Frame& f, bool clean) {
  SmacProtocol::on_frame_start(f, clean);
  on_activity();
}

void TmacProtocol::on_frame_received(const Frame& f) {
  SmacProtocol::on_frame_received(f);
  on_activity();
}

void TmacProtocol::on_corruption(const Frame& f) {
  SmacProtocol::on_corruption(f);
  on_activity();
}

void TmacProtocol::on_frame_sent(const Frame& f) {
  SmacProtocol::on_frame_sent(f);
  on_activity();
}

void TmacProtocol::on_cts_overheard(const Frame& f) {
  // FRTS: we have data for the node that just sent a CTS.
  if (queue_.empty() || queue_.head().dst != f.src) return;
  if (role_ != ExchangeRole::NONE) return;
  counters["frts_sent"]++;
  const NodeId dst = f.src;
  const Tick duration = f.duration_field;
  after(p().sifs, [this, dst, duration]() {
    if (role_ != ExchangeRole::NONE || !awake() || state() == RadioState::RX)
      return;
    Frame frts = make_ctrl(FrameKind::FRTS, dst);
    frts.duration_field = duration > p().ctrl_airtime() + p().sifs
                              ? duration - p().ctrl_airtime() - p().sifs
                              : 0;
    transmit(frts);
  });
}

bool TmacProtocol::handle_rts_full_buffer(const Frame& f) {
  if (!p().full_buffer_priority || !queue_.full()) return false;
  if (queue_.head().dst == f.src) return false;  // would deadlock the pair
  counters["full_buffer_priority"]++;
  QueueItem& item = queue_.head();
  item.attempts++;
  role_ = ExchangeRole::SENDER;
  stage_ = ExchangeStage::WAIT_CTS;
  peer_ = item.dst;
  after(p().sifs, [this]() {
    if (stage_ != ExchangeStage::WAIT_CTS || role_ != ExchangeRole::SENDER)
      return;
    Frame r = make_ctrl(FrameKind::RTS, peer_);
    r.duration_field = rts_duration();
    transmit(r);
  });
  return true;
}

// ---------------------------------------------------------------- D-MAC ----

bool DmacProtocol::is_leaf() const {
  const auto& parent = ctx_.tree->parent;
  for (NodeId j = 0; j < parent.size(); ++j)
    if (j != id() && parent[j] == id()) return false;
  return true;
}

Tick DmacProtocol::cycle_len() const {
  const Tick ladder = (ctx_.tree->max_depth + 2) * p().mu + 4 * p().mu;
  return std::max(p().dmac_cycle, ladder);
}

void DmacProtocol::on_boot() {
  if (p().preassigned_levels) {
    depth_ = ctx_.tree->depth[id()];
    start_schedule(0);
    return;
  }
  // Level flood: everyone listens; the root seeds depth 0.
  flooding_ = true;
  listen();
  if (id() == ctx_.tree->root) {
    depth_ = 0;
    after(ms(10) + contention_delay(), [this]() {
      Frame f = make_ctrl(FrameKind::SYNC, kBroadcast);
      f.depth_level = 0;
      counters["flood_sync_sent"]++;
      transmit(f);
    });
  }
  after(p().flood_listen, [this]() { end_flood(); });
}

void DmacProtocol::flood_rebroadcast() {
  if (!flooding_ || announced_level_) return;
  const Tick jitter = rng("flood").draw(ms(50)) + contention_delay();
  after(jitter, [this]() {
    if (!flooding_ || announced_level_) return;
    if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
      flood_rebroadcast();
      return;
    }
    announced_level_ = true;
    Frame f = make_ctrl(FrameKind::SYNC, kBroadcast);
    f.depth_level = *depth_;
    counters["flood_sync_sent"]++;
    transmit(f);
  });
}

void DmacProtocol::end_flood() {
  flooding_ = false;
  if (!depth_) {
    // Never reached by the flood: stays asleep, delivers nothing.
    sleep();
    counters["unreached"] = 1;
    return;
  }
  start_schedule(now());
}

void DmacProtocol::start_schedule(Tick anchor) {
  anchor_ = anchor;
  cycle_index_ = 0;
  if (state() != RadioState::SLEEP) sleep();
  schedule_next_cycle();
}

void DmacProtocol::schedule_next_cycle() {
  const Tick cl = cycle_len();
  const std::uint32_t dmax = ctx_.tree->max_depth;
  Tick rx_at;
  do {
    rx_at = anchor_ + cycle_index_ * cl + (dmax - *depth_) * p().mu;
    cycle_index_++;
  } while (rx_at <= now());
  if (is_leaf()) {
    // No children below: nothing ever arrives in the receive slot.
    window_ev_ = sched().schedule(rx_at, [this]() { schedule_next_cycle(); });
  } else {
    window_ev_ = sched().schedule(rx_at, [this, rx_at]() {
      open_rx_window(rx_at);
      after(p().mu, [this]() { close_rx_window(); });
    });
  }
  if (id() != ctx_.tree->root) {
    const Tick tx_at = rx_at + p().mu;
    tx_ev_ = sched().schedule(tx_at, [this, tx_at]() { open_tx_window(tx_at); });
  }
}

void DmacProtocol::open_rx_window(Tick window_start) {
  in_rx_window_ = true;
  rx_window_start_ = window_start;
  received_in_window_ = false;
  if (state() == RadioState::SLEEP) listen();
}

void DmacProtocol::close_rx_window() {
  if (!in_rx_window_) return;
  in_rx_window_ = false;
  if (received_in_window_) {
    // Data prediction: wake again 3*mu after this window started.
    const Tick next = rx_window_start_ + 3 * p().mu;
    counters["predict_wakeups"]++;
    predict_ev_ = sched().schedule(std::max(next, now() + 1), [this, next]() {
      open_rx_window(std::max(next, now()));
      after(p().mu, [this]() { close_rx_window(); });
    });
  } else if (cycle_index_ > 0) {
    schedule_next_cycle();
  }
  maybe_sleep();
}

void DmacProtocol::maybe_sleep() {
  if (flooding_) return;
  if (!in_rx_window_ && !rx_busy_ && !in_tx_window_ && !tx_busy_ &&
      state() == RadioState::LISTEN)
    sleep();
}

void DmacProtocol::open_tx_window(Tick window_start) {
  if (queue_.empty()) return;
  in_tx_window_ = true;
  tx_window_start_ = window_start;
  tx_tries_this_window_ = 0;
  // Hard close: whatever happens, the window ends at start + mu. A frame
  // already on the air finishes through the ack path.
  const Tick end_at = window_start + p().mu;
  tx_end_ev_ = sched().schedule(end_at, [this, end_at]() {
    if (in_tx_window_ && !tx_busy_ && tx_window_start_ + p().mu <= end_at) {
      counters["tx_window_forced_close"]++;
      tx_give_up();
    }
  });
  if (state() == RadioState::SLEEP) listen();
  attempt_data();
}

void DmacProtocol::attempt_data() {
  if (queue_.empty()) {
    in_tx_window_ = false;
    maybe_sleep();
    return;
  }
  // Children of one parent are often hidden from each other; spread their
  // attempts across a good part of the window.
  const Tick delay = contention_delay(32, p().slot_len);
  backoff_ev_ = after(delay, [this]() {
    if (!in_tx_window_ || queue_.empty() || tx_busy_) return;
    if (state() == RadioState::TX) {  // ACK to a child still on the air
      attempt_data();
      return;
    }
    if (state() == RadioState::SLEEP) listen();
    if (now() >= tx_window_start_ + p().mu) {
      tx_give_up();
      return;
    }
    if (state() == RadioState::RX || cca() == CcaResult::BUSY) {
      if (++tx_tries_this_window_ > p().dmac_retries) {
        tx_give_up();
      } else {
        attempt_data();
      }
      return;
    }
    QueueItem& item = queue_.head();
    item.attempts++;
    tx_busy_ = true;
    Frame f = make_data(ctx_.tree->parent[id()], item.payload_id);
    f.mts_flag = queue_.size() > 1;
    transmit(f);
  });
}

void DmacProtocol::tx_give_up() {
  // A busy channel means siblings were sending to the same parent, so the
  // parent will wake again 3*mu after this slot; follow it. Otherwise the
  // queue waits for the next cycle.
  const bool channel_was_busy = tx_tries_this_window_ > 0;
  in_tx_window_ = false;
  tx_busy_ = false;
  if (!queue_.empty() && channel_was_busy) {
    const Tick next = tx_window_start_ + 3 * p().mu;
    if (next > now()) {
      counters["tx_chain_retry"]++;
      tx_ev_ = sched().schedule(next, [this, next]() { open_tx_window(next); });
    }
  }
  maybe_sleep();
}

void DmacProtocol::on_frame_start(const Frame& f, bool clean) {
  if (f.kind == FrameKind::DATA && f.dst == id()) rx_busy_ = true;
}

void DmacProtocol::on_frame_received(const Frame& f) {
  if (f.kind == FrameKind::SYNC) {
    if (flooding_ && !depth_) {
      depth_ = f.depth_level + 1;
      flood_rebroadcast();
    }
    return;
  }
  if (f.kind == FrameKind::DATA && f.dst == id()) {
    received_in_window_ = true;
    rx_busy_ = true;
    deliver_to_app(f.src, f.payload_id);
    const NodeId dst = f.src;
    after(p().sifs, [this, dst]() {
      if (state() == RadioState::TX) {
        rx_busy_ = false;
        return;  // our own transmit window won the race; child retries
      }
      if (state() == RadioState::SLEEP) listen();
      transmit(make_ctrl(FrameKind::ACK, dst));
    });
    return;
  }
  if (f.kind == FrameKind::ACK && f.dst == id() && tx_busy_) {
    cancel(ack_timeout_);
    tx_busy_ = false;
    if (!queue_.empty()) queue_.pop();
    counters["dmac_acked"]++;
    if (!queue_.empty()) {
      // Parent keeps waking every 3*mu while MTS is set; follow it.
      const Tick next = tx_window_start_ + 3 * p().mu;
      in_tx_window_ = false;
      tx_ev_ = sched().schedule(std::max(next, now() + 1),
                                [this, next]() { open_tx_window(std::max(next, now())); });
    } else {
      in_tx_window_ = false;
    }
    maybe_sleep();
    return;
  }
  // Overheard traffic we are not part of: release the radio.
  maybe_sleep();
}

void DmacProtocol::on_corruption(const Frame& f) {
  if (f.kind == FrameKind::DATA && f.dst == id()) rx_busy_ = false;
  maybe_sleep();
}

void DmacProtocol::on_frame_sent(const Frame& f) {
  if (f.kind == FrameKind::SYNC) {
    if (flooding_) listen();
    return;
  }
  if (f.kind == FrameKind::DATA) {
    ack_timeout_ = after(p().sifs + p().ctrl_airtime() + p().sifs, [this]() {
      tx_busy_ = false;
      if (!in_tx_window_ || now() >= tx_window_start_ + p().mu ||
          ++tx_tries_this_window_ > p().dmac_retries) {
        if (!queue_.empty() && queue_.head().attempts > p().retries * 4) {
          QueueItem it = queue_.pop();
          payload_failed(it.payload_id);
        }
        tx_give_up();
      } else {
        attempt_data();
      }
    });
    return;
  }
  if (f.kind == FrameKind::ACK) {
    rx_busy_ = false;
    maybe_sleep();
    return;
  }
}

}  // namespace macsim
