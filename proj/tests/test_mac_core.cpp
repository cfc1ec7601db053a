#include "doctest.h"

#include "macsim/mac.hpp"

using namespace macsim;

namespace {

// Minimal concrete MAC exposing the shared scaffolding for direct testing.
struct ProbeMac : MacProtocol {
  explicit ProbeMac(MacContext ctx) : MacProtocol(ctx) {}
  void on_boot() override {}
  using MacProtocol::cca;
  using MacProtocol::contention_delay;
  using MacProtocol::listen;
  using MacProtocol::make_ctrl;
  using MacProtocol::make_data;
  using MacProtocol::rng;
  using MacProtocol::set_nav;
  using MacProtocol::sleep;
  using MacProtocol::transmit;
  SendQueue& queue() { return queue_; }
};

struct CoreFixture {
  Scheduler sched;
  Topology topo{{{0, 0}, {10, 0}}, 10.0};
  EnergyLedger ledger{2, PowerProfile{}};
  Channel ch{sched, topo, ledger};
  RngSource rng{1};
  MacParams params;
  GatheringTree tree;
  ProbeMac mac;
  CoreFixture() : tree(build_gathering_tree(topo, 0)), mac(make_ctx()) {}
  MacContext make_ctx() {
    MacContext c;
    c.id = 0;
    c.sched = &sched;
    c.channel = &ch;
    c.rng = &rng;
    c.params = &params;
    c.tree = &tree;
    return c;
  }
};

}  // namespace

TEST_CASE("send queue drops past capacity and keeps FIFO order") {
  SendQueue q(2);
  CHECK(q.enqueue(1, 100, us(0)) == EnqueueResult::QUEUED);
  CHECK(q.enqueue(1, 101, us(1)) == EnqueueResult::QUEUED);
  CHECK(q.full());
  CHECK(q.enqueue(1, 102, us(2)) == EnqueueResult::DROPPED_FULL);
  CHECK(q.size() == 2);
  CHECK(q.head().payload_id == 100);
  QueueItem it = q.pop();
  CHECK(it.payload_id == 100);
  CHECK(it.enqueued_at == us(0));
  CHECK(q.pop().payload_id == 101);
  CHECK(q.empty());
}

TEST_CASE("default enqueue path counts into the protocol queue") {
  CoreFixture fx;
  CHECK(fx.mac.on_send_request(1, 7) == EnqueueResult::QUEUED);
  CHECK(fx.mac.send_queue().size() == 1);
  for (std::uint64_t i = 0; i < fx.params.queue_capacity - 1; ++i)
    CHECK(fx.mac.on_send_request(1, 10 + i) == EnqueueResult::QUEUED);
  CHECK(fx.mac.on_send_request(1, 999) == EnqueueResult::DROPPED_FULL);
}

TEST_CASE("NAV takes the maximum of overlapping reservations") {
  CoreFixture fx;
  CHECK_FALSE(fx.mac.nav_active());
  fx.mac.set_nav(us(500));
  CHECK(fx.mac.nav_active());
  CHECK(fx.mac.nav_until() == us(500));
  fx.mac.set_nav(us(200));  // shorter reservation must not shrink it
  CHECK(fx.mac.nav_until() == us(500));
  fx.mac.set_nav(us(900));
  CHECK(fx.mac.nav_until() == us(900));
  fx.mac.set_nav(0);  // zero-duration is a no-op
  CHECK(fx.mac.nav_until() == us(900));
  fx.sched.run_until(us(900));
  CHECK_FALSE(fx.mac.nav_active());
}

TEST_CASE("contention delay is a whole number of slots inside the window") {
  CoreFixture fx;
  for (int i = 0; i < 500; ++i) {
    const Tick d = fx.mac.contention_delay(16, us(320));
    CHECK(d % us(320) == 0);
    CHECK(d < 16 * us(320));
  }
  CHECK(fx.mac.contention_delay(1, us(320)) == 0);
  CHECK_THROWS_AS(fx.mac.contention_delay(0, us(320)), std::logic_error);
}

TEST_CASE("airtime rounds up to whole microseconds") {
  CHECK(airtime(64, 250000) == us(2048));
  CHECK(airtime(12, 250000) == us(384));
  CHECK(airtime(1, 250000) == us(32));
  CHECK(airtime(1, 1000000) == us(8));
  CHECK(airtime(1, 3000000) == us(3));  // 2.67 us rounds up
}

TEST_CASE("derived frame timings follow the parameter set") {
  MacParams p;
  CHECK(p.ctrl_airtime() == airtime(p.ctrl_bytes, p.bitrate_bps));
  CHECK(p.data_airtime() == airtime(p.data_bytes, p.bitrate_bps));
  CHECK(p.preamble_airtime() == p.tw + p.sample_len);
  CHECK(p.gap_len() == p.ctrl_airtime() + 2 * p.sifs + 2 * p.turnaround);
  CHECK(p.linger_len() == 2 * (p.gap_len() + p.ctrl_airtime()));
}

TEST_CASE("frame factories fill kind, addressing and airtime") {
  CoreFixture fx;
  Frame rts = fx.mac.make_ctrl(FrameKind::RTS, 1);
  CHECK(rts.kind == FrameKind::RTS);
  CHECK(rts.src == 0);
  CHECK(rts.dst == 1);
  CHECK(rts.airtime == fx.params.ctrl_airtime());
  Frame d = fx.mac.make_data(1, 42);
  CHECK(d.kind == FrameKind::DATA);
  CHECK(d.payload_id == 42);
  CHECK(d.airtime == fx.params.data_airtime());
}

TEST_CASE("radio shortcuts reach the channel") {
  CoreFixture fx;
  fx.mac.listen();
  CHECK(fx.ch.state(0) == RadioState::LISTEN);
  CHECK(fx.mac.cca() == CcaResult::CLEAR);
  fx.mac.sleep();
  CHECK(fx.ch.state(0) == RadioState::SLEEP);
}

TEST_CASE("per-purpose rng streams match the shared source") {
  CoreFixture fx;
  RngStream fresh(1, 0, "backoff");
  CHECK(fx.mac.rng("backoff").draw(1000000) == fresh.draw(1000000));
}

TEST_CASE("wisemac minimum preamble formula") {
  // 4 * theta * L with theta in ppm, clamped to [1, tw].
  CHECK(wisemac_tp(30.0, sec(1), ms(250)) == us(120));
  CHECK(wisemac_tp(30.0, us(1), ms(250)) == us(1));      // floor at one tick
  CHECK(wisemac_tp(30.0, sec(10000), ms(250)) == ms(250));  // ceiling at tw
  CHECK(wisemac_tp(100.0, ms(500), ms(250)) == us(200));
}
