#include "doctest.h"

#include <string>
#include <vector>

#include "macsim/radio.hpp"

using namespace macsim;

namespace {

struct Event {
  std::string what;  // start / start_dirty / rx / corrupt / sent
  FrameKind kind;
  NodeId src;
};

struct RecordingSink : RadioSink {
  std::vector<Event> events;
  void on_frame_start(const Frame& f, bool clean) override {
    events.push_back({clean ? "start" : "start_dirty", f.kind, f.src});
  }
  void on_frame_received(const Frame& f) override {
    events.push_back({"rx", f.kind, f.src});
  }
  void on_corruption(const Frame& f) override {
    events.push_back({"corrupt", f.kind, f.src});
  }
  void on_frame_sent(const Frame& f) override {
    events.push_back({"sent", f.kind, f.src});
  }
  int count(const std::string& what) const {
    int n = 0;
    for (const auto& e : events)
      if (e.what == what) n++;
    return n;
  }
};

// Three nodes in a line; 0 and 2 are hidden from each other.
struct LineFixture {
  Scheduler sched;
  Topology topo{{{0, 0}, {10, 0}, {20, 0}}, 10.0};
  EnergyLedger ledger{3, PowerProfile{}};
  Channel ch{sched, topo, ledger};
  RecordingSink sink[3];
  LineFixture() {
    for (NodeId n = 0; n < 3; ++n) ch.set_sink(n, &sink[n]);
  }
  Frame data(NodeId dst, Tick airtime = us(1000)) {
    Frame f;
    f.kind = FrameKind::DATA;
    f.dst = dst;
    f.airtime = airtime;
    return f;
  }
};

}  // namespace

TEST_CASE("clean unicast: start, receive, sent callbacks in order") {
  LineFixture fx;
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  CHECK(fx.ch.state(0) == RadioState::TX);
  CHECK(fx.ch.state(1) == RadioState::RX);
  fx.sched.run_until(us(2000));
  REQUIRE(fx.sink[1].events.size() == 2);
  CHECK(fx.sink[1].events[0].what == "start");
  CHECK(fx.sink[1].events[1].what == "rx");
  CHECK(fx.sink[0].count("sent") == 1);
  // Transmitter hands back to LISTEN; the MAC decides what happens next.
  CHECK(fx.ch.state(0) == RadioState::LISTEN);
  CHECK(fx.ch.state(1) == RadioState::LISTEN);
}

TEST_CASE("sleeping nodes hear nothing") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(2000));
  CHECK(fx.sink[1].events.empty());
  CHECK(fx.sink[2].events.empty());
  CHECK(fx.sink[0].count("sent") == 1);  // the send itself still completes
}

TEST_CASE("hidden-terminal overlap corrupts both frames at the middle node") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.set_state(2, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(400));
  fx.ch.start_transmission(2, fx.data(1));  // overlaps the tail of 0's frame
  fx.sched.run_until(us(3000));
  // Node 1 locked onto both; both end corrupted, neither is received.
  CHECK(fx.sink[1].count("rx") == 0);
  CHECK(fx.sink[1].count("corrupt") == 2);
  CHECK(fx.sink[1].events[0].what == "start");        // first frame was clean so far
  CHECK(fx.sink[1].events[1].what == "start_dirty");  // second arrives into overlap
}

TEST_CASE("collision outcome is symmetric in transmit order") {
  // Same instant, both orders: node 1 never decodes either frame.
  for (int first = 0; first <= 1; ++first) {
    LineFixture fx;
    fx.ch.set_state(0, RadioState::LISTEN);
    fx.ch.set_state(1, RadioState::LISTEN);
    fx.ch.set_state(2, RadioState::LISTEN);
    const NodeId a = first == 0 ? 0 : 2;
    const NodeId b = first == 0 ? 2 : 0;
    fx.ch.start_transmission(a, fx.data(1));
    fx.ch.start_transmission(b, fx.data(1));
    fx.sched.run_until(us(2000));
    CHECK(fx.sink[1].count("rx") == 0);
    CHECK(fx.sink[1].count("corrupt") == 2);
  }
}

TEST_CASE("non-overlapping frames from hidden terminals both deliver") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.set_state(2, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(1500));
  fx.ch.start_transmission(2, fx.data(1));
  fx.sched.run_until(us(4000));
  CHECK(fx.sink[1].count("rx") == 2);
  CHECK(fx.sink[1].count("corrupt") == 0);
}

TEST_CASE("cca reflects any audible transmission, engaged or not") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  CHECK(fx.ch.cca(0) == CcaResult::CLEAR);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(100));
  // Node 1 wakes mid-frame: it cannot decode, but carrier sense is busy.
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.set_state(2, RadioState::LISTEN);
  CHECK(fx.ch.cca(1) == CcaResult::BUSY);
  CHECK(fx.ch.cca(2) == CcaResult::CLEAR);  // hidden from node 0
  fx.sched.run_until(us(2000));
  CHECK(fx.ch.cca(1) == CcaResult::CLEAR);
  CHECK(fx.sink[1].count("rx") == 0);  // woke too late to decode
}

TEST_CASE("cca from SLEEP is a protocol bug") {
  LineFixture fx;
  CHECK_THROWS_AS(fx.ch.cca(0), std::logic_error);
}

TEST_CASE("aborting a transmission corrupts it at engaged listeners") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(300));
  fx.ch.set_state(0, RadioState::SLEEP);  // abort mid-frame
  CHECK(fx.sink[1].count("corrupt") == 1);
  CHECK(fx.ch.state(1) == RadioState::LISTEN);  // released immediately
  fx.sched.run_until(us(2000));
  CHECK(fx.sink[1].count("rx") == 0);
  CHECK(fx.sink[0].count("sent") == 0);  // an aborted frame was never sent
  CHECK(fx.ch.cca(1) == CcaResult::CLEAR);
}

TEST_CASE("a receiver that sleeps mid-frame just misses it") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.set_state(1, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  fx.sched.run_until(us(500));
  fx.ch.set_state(1, RadioState::SLEEP);
  fx.sched.run_until(us(2000));
  CHECK(fx.sink[1].count("rx") == 0);
  CHECK(fx.sink[1].count("corrupt") == 0);
  CHECK(fx.sink[0].count("sent") == 1);  // sender is unaffected
}

TEST_CASE("transmit while already transmitting or with no airtime throws") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.start_transmission(0, fx.data(1));
  CHECK_THROWS_AS(fx.ch.start_transmission(0, fx.data(1)), std::logic_error);
  Frame empty = fx.data(1, 0);
  CHECK_THROWS_AS(fx.ch.start_transmission(2, empty), std::logic_error);
}

TEST_CASE("drift scales local time and global delays inversely") {
  LineFixture fx;
  fx.ch.set_drift(0, 100e-6);  // fast clock: +100 ppm
  fx.ch.set_drift(1, -100e-6);
  CHECK(fx.ch.local_time(0, sec(100)) == sec(100) + us(10000));
  CHECK(fx.ch.local_time(1, sec(100)) == sec(100) - us(10000));
  // A local second on a fast clock is slightly less global time.
  CHECK(fx.ch.global_delay(0, sec(1)) < sec(1));
  CHECK(fx.ch.global_delay(1, sec(1)) > sec(1));
  CHECK(fx.ch.global_delay(0, 1) >= 1);  // delays never collapse to zero
  CHECK(fx.ch.drift(0) == doctest::Approx(100e-6));
}

TEST_CASE("frame src is stamped with the transmitting node") {
  LineFixture fx;
  fx.ch.set_state(0, RadioState::LISTEN);
  fx.ch.set_state(1, RadioState::LISTEN);
  Frame f = fx.data(1);
  f.src = 99;  // caller's value is overwritten
  fx.ch.start_transmission(0, f);
  fx.sched.run_until(us(2000));
  REQUIRE(fx.sink[1].count("rx") == 1);
  CHECK(fx.sink[1].events.back().src == 0);
}
