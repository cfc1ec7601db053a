#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "macsim/time.hpp"

namespace macsim {

struct EventHandle {
  std::uint64_t id = 0;
  Tick fire_at = 0;
  bool valid() const { return id != 0; }
};

// Deterministic virtual-time event loop. Ties at equal timestamps fire in
// insertion order.
class Scheduler {
 public:
  Tick now() const { return now_; }

  EventHandle schedule(Tick at, std::function<void()> fn) {
    if (at < now_) throw std::logic_error("Scheduler::schedule: time in the past");
    const std::uint64_t id = next_id_++;
    heap_.push(Entry{at, next_seq_++, id});
    live_.emplace(id, std::move(fn));
    ++scheduled_;
    return EventHandle{id, at};
  }

  EventHandle schedule_in(Tick delay, std::function<void()> fn) {
    return schedule(now_ + delay, std::move(fn));
  }

  // True iff the event had not fired and now never will.
  bool cancel(const EventHandle& h) {
    auto it = live_.find(h.id);
    if (it == live_.end()) return false;
    live_.erase(it);
    ++canceled_;
    return true;
  }

  // Processes every event with fire_at <= t_end; leaves the clock at t_end.
  std::size_t run_until(Tick t_end) {
    if (t_end < now_) throw std::logic_error("Scheduler::run_until: time in the past");
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.top().at <= t_end) {
      Entry e = heap_.top();
      heap_.pop();
      auto it = live_.find(e.id);
      if (it == live_.end()) continue;  // canceled
      std::function<void()> fn = std::move(it->second);
      live_.erase(it);
      now_ = e.at;
      ++fired_;
      ++processed;
      fn();
    }
    now_ = t_end;
    return processed;
  }

  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t canceled_count() const { return canceled_; }
  std::uint64_t fired_count() const { return fired_; }
  std::size_t pending_count() const { return live_.size(); }

 private:
  struct Entry {
    Tick at;
    std::uint64_t seq;
    std::uint64_t id;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  Tick now_ = 0;
  std::uint64_t next_id_ = 1;
  std::uint64_t next_seq_ = 0;
  std::uint64_t scheduled_ = 0, canceled_ = 0, fired_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::unordered_map<std::uint64_t, std::function<void()>> live_;
};

}  // namespace macsim
