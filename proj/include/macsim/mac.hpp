#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "macsim/frame.hpp"
#include "macsim/radio.hpp"
#include "macsim/rng.hpp"
#include "macsim/topology.hpp"

namespace macsim {

enum class TrafficPattern : std::uint8_t { CONVERGECAST, LOCAL_GOSSIP };

// Every tunable the protocols share; these defaults are the shipped
// configuration.
struct MacParams {
  std::uint32_t bitrate_bps = 250000;
  std::uint32_t ctrl_bytes = 12;   // SYNC/RTS/CTS/ACK/FRTS/STROBE/STROBE_ACK
  std::uint32_t data_bytes = 64;
  std::uint32_t block_bytes = 16;  // BMAC+ preamble block
  std::uint32_t header_bytes = 12; // DATA header an overhearer decodes before bailing
  std::uint32_t queue_capacity = 64;
  std::uint32_t retries = 3;
  std::uint32_t cw = 16;           // contention window, slots
  Tick slot_len = us(320);
  Tick sifs = us(200);             // processing gap between frames of one exchange
  Tick turnaround = 0;

  // SMAC / TMAC
  Tick frame_len = sec(1);
  Tick active_len = ms(100);
  Tick sync_len = ms(30);
  std::uint32_t sync_period_frames = 10;
  Tick ta = ms(45);

  // DMAC
  Tick mu = ms(30);
  Tick dmac_cycle = sec(1);  // clamped up to (d_max + 2) * mu + slack
  bool preassigned_levels = false;
  Tick flood_listen = sec(25);
  std::uint32_t dmac_retries = 2;

  // LPL family
  Tick tw = ms(25);
  Tick sample_len = us(500);
  double theta_ppm = 30.0;

  bool full_buffer_priority = false;  // set by the harness for converge-cast

  Tick ctrl_airtime() const { return airtime(ctrl_bytes, bitrate_bps); }
  Tick data_airtime() const { return airtime(data_bytes, bitrate_bps); }
  Tick block_airtime() const { return airtime(block_bytes, bitrate_bps); }
  Tick header_airtime() const { return airtime(header_bytes, bitrate_bps); }
  Tick preamble_airtime() const { return tw + sample_len; }
  Tick gap_len() const { return ctrl_airtime() + 2 * sifs + 2 * turnaround; }
  Tick linger_len() const { return 2 * (gap_len() + ctrl_airtime()); }
};

// WiseMAC minimum preamble: min(4*theta*L, tw).
Tick wisemac_tp(double theta_ppm, Tick interval_l, Tick tw);

enum class EnqueueResult : std::uint8_t { QUEUED, DROPPED_FULL };

struct QueueItem {
  NodeId dst = 0;
  std::uint64_t payload_id = 0;
  Tick enqueued_at = 0;
  std::uint32_t attempts = 0;
};

class SendQueue {
 public:
  explicit SendQueue(std::uint32_t capacity = 8) : capacity_(capacity) {}
  EnqueueResult enqueue(NodeId dst, std::uint64_t payload_id, Tick now) {
    if (items_.size() >= capacity_) return EnqueueResult::DROPPED_FULL;
    items_.push_back(QueueItem{dst, payload_id, now, 0});
    return EnqueueResult::QUEUED;
  }
  bool empty() const { return items_.empty(); }
  bool full() const { return items_.size() >= capacity_; }
  std::size_t size() const { return items_.size(); }
  QueueItem& head() { return items_.front(); }
  const QueueItem& head() const { return items_.front(); }
  QueueItem pop() {
    QueueItem it = items_.front();
    items_.pop_front();
    return it;
  }

 private:
  std::uint32_t capacity_;
  std::deque<QueueItem> items_;
};

// Application-layer hooks (converge-cast forwarding, metrics).
class AppSink {
 public:
  virtual ~AppSink() = default;
  virtual void on_app_delivery(NodeId at, NodeId src, std::uint64_t payload_id) = 0;
  virtual void on_payload_failed(NodeId at, std::uint64_t payload_id) = 0;
};

struct MacContext {
  NodeId id = 0;
  Scheduler* sched = nullptr;
  Channel* channel = nullptr;
  RngSource* rng = nullptr;
  const MacParams* params = nullptr;
  AppSink* app = nullptr;
  const GatheringTree* tree = nullptr;  // set for converge-cast workloads
};

// Shared MAC scaffolding: queue, NAV, CSMA contention, radio shortcuts.
// Protocol behavior is a deterministic function of events + RNG streams.
class MacProtocol : public RadioSink {
 public:
  explicit MacProtocol(MacContext ctx)
      : ctx_(ctx), queue_(ctx.params->queue_capacity) {}
  ~MacProtocol() override = default;

  virtual void on_boot() = 0;
  virtual EnqueueResult on_send_request(NodeId dst, std::uint64_t payload_id) {
    EnqueueResult r = queue_.enqueue(dst, payload_id, now());
    if (r == EnqueueResult::QUEUED) queue_changed();
    return r;
  }

  NodeId id() const { return ctx_.id; }
  const SendQueue& send_queue() const { return queue_; }
  Tick nav_until() const { return nav_until_; }
  bool nav_active() const { return now() < nav_until_; }

  // Loose per-protocol counters, for tests and tuning.
  std::map<std::string, std::int64_t> counters;

 protected:
  virtual void queue_changed() {}

  Tick now() const { return ctx_.sched->now(); }
  const MacParams& p() const { return *ctx_.params; }
  Channel& ch() { return *ctx_.channel; }
  Scheduler& sched() { return *ctx_.sched; }
  RngStream& rng(const std::string& purpose) {
    return ctx_.rng->stream(ctx_.id, purpose);
  }

  RadioState state() { return ch().state(ctx_.id); }
  bool awake() { return state() == RadioState::LISTEN || state() == RadioState::RX; }
  void listen() { ch().set_state(ctx_.id, RadioState::LISTEN); }
  void sleep() { ch().set_state(ctx_.id, RadioState::SLEEP); }
  CcaResult cca() { return ch().cca(ctx_.id); }
  void transmit(Frame f) {
    f.src = ctx_.id;
    ch().start_transmission(ctx_.id, f);
  }

  EventHandle after(Tick delay, std::function<void()> fn) {
    return sched().schedule_in(delay, std::move(fn));
  }
  // Delay measured on this node's (drifted) local clock.
  EventHandle after_local(Tick local_delay, std::function<void()> fn) {
    return sched().schedule_in(ch().global_delay(ctx_.id, local_delay),
                               std::move(fn));
  }
  void cancel(EventHandle& h) {
    if (h.valid()) {
      sched().cancel(h);
      h = EventHandle{};
    }
  }

  // Overheard RTS/CTS/FRTS reservation; max rule.
  void set_nav(Tick duration) {
    if (duration == 0) return;
    nav_until_ = std::max(nav_until_, now() + duration);
  }

  // Random backoff delay; the caller re-CCAs after it elapses.
  Tick contention_delay(std::uint32_t cw, Tick slot) {
    if (cw == 0) throw std::logic_error("csma_contend: cw must be >= 1");
    return rng("backoff").draw(cw) * slot;
  }
  Tick contention_delay() { return contention_delay(p().cw, p().slot_len); }

  Frame make_ctrl(FrameKind kind, NodeId dst) const {
    Frame f;
    f.kind = kind;
    f.src = ctx_.id;
    f.dst = dst;
    f.airtime = p().ctrl_airtime();
    return f;
  }
  Frame make_data(NodeId dst, std::uint64_t payload_id) const {
    Frame f;
    f.kind = FrameKind::DATA;
    f.src = ctx_.id;
    f.dst = dst;
    f.airtime = p().data_airtime();
    f.payload_id = payload_id;
    return f;
  }

  void deliver_to_app(NodeId src, std::uint64_t payload_id) {
    if (ctx_.app) ctx_.app->on_app_delivery(ctx_.id, src, payload_id);
  }
  void payload_failed(std::uint64_t payload_id) {
    counters["send_failed"]++;
    if (ctx_.app) ctx_.app->on_payload_failed(ctx_.id, payload_id);
  }

  MacContext ctx_;
  SendQueue queue_;
  Tick nav_until_ = 0;
};

}  // namespace macsim
