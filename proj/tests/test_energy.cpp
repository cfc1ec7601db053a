#include "doctest.h"

#include "macsim/energy.hpp"

using namespace macsim;

TEST_CASE("energy accumulates as exact integer picojoules") {
  EnergyLedger led(1, PowerProfile{});
  // uW * us = pJ, so a 1 us LISTEN interval at 45000 uW is 45000 pJ.
  led.note_transition(0, RadioState::LISTEN, us(10));
  led.note_transition(0, RadioState::SLEEP, us(11));
  led.flush(us(11));
  CHECK(led.state_energy_pj(0, RadioState::LISTEN) == 45000);
  CHECK(led.state_energy_pj(0, RadioState::SLEEP) == 10 * 90);
  CHECK(led.state_time(0, RadioState::LISTEN) == us(1));
  CHECK(led.state_time(0, RadioState::SLEEP) == us(10));
}

TEST_CASE("nodes start asleep and flush closes the open interval") {
  EnergyLedger led(2, PowerProfile{});
  CHECK(led.current_state(0) == RadioState::SLEEP);
  led.flush(sec(1));
  CHECK(led.state_time(0, RadioState::SLEEP) == sec(1));
  CHECK(led.state_energy_pj(0, RadioState::SLEEP) == 90ull * 1000000);
  // Flush does not change state; time keeps accruing afterwards.
  led.flush(sec(2));
  CHECK(led.state_time(1, RadioState::SLEEP) == sec(2));
}

TEST_CASE("state times partition the whole timeline") {
  EnergyLedger led(1, PowerProfile{});
  led.note_transition(0, RadioState::LISTEN, us(100));
  led.note_transition(0, RadioState::TX, us(250));
  led.note_transition(0, RadioState::RX, us(400));
  led.note_transition(0, RadioState::SLEEP, us(900));
  led.flush(us(1000));
  Tick sum = 0;
  for (int s = 0; s < kRadioStateCount; ++s)
    sum += led.state_time(0, static_cast<RadioState>(s));
  CHECK(sum == us(1000));
  CHECK(led.state_time(0, RadioState::TX) == us(150));
  CHECK(led.state_time(0, RadioState::RX) == us(500));
}

TEST_CASE("ten-minute always-listen run costs 27 joules") {
  EnergyLedger led(1, PowerProfile{});
  led.note_transition(0, RadioState::LISTEN, 0);
  led.flush(sec(600));
  CHECK(led.total_energy_mj(0) == doctest::Approx(27000.0));
}

TEST_CASE("time regression is a hard error") {
  EnergyLedger led(1, PowerProfile{});
  led.note_transition(0, RadioState::LISTEN, us(100));
  CHECK_THROWS_AS(led.note_transition(0, RadioState::SLEEP, us(99)),
                  std::logic_error);
}

TEST_CASE("fleet aggregates are the mean and sum over nodes") {
  EnergyLedger led(2, PowerProfile{});
  led.note_transition(0, RadioState::LISTEN, 0);  // node 1 stays asleep
  led.flush(sec(1));
  const double a = led.total_energy_mj(0);
  const double b = led.total_energy_mj(1);
  CHECK(a == doctest::Approx(45.0));
  CHECK(b == doctest::Approx(0.09));
  CHECK(led.fleet_average_mj() == doctest::Approx((a + b) / 2));
  CHECK(led.fleet_total_mj() == doctest::Approx(a + b));
}

TEST_CASE("custom power profile is respected per state") {
  PowerProfile p;
  p.sleep_uw = 1;
  p.listen_uw = 2;
  p.rx_uw = 3;
  p.tx_uw = 4;
  CHECK(p.power_uw(RadioState::SLEEP) == 1);
  CHECK(p.power_uw(RadioState::LISTEN) == 2);
  CHECK(p.power_uw(RadioState::RX) == 3);
  CHECK(p.power_uw(RadioState::TX) == 4);
  EnergyLedger led(1, p);
  led.note_transition(0, RadioState::TX, us(5));
  led.flush(us(7));
  CHECK(led.state_energy_pj(0, RadioState::SLEEP) == 5);
  CHECK(led.state_energy_pj(0, RadioState::TX) == 8);
}

TEST_CASE("a transition to the current state only closes the interval") {
  EnergyLedger led(1, PowerProfile{});
  led.note_transition(0, RadioState::LISTEN, us(10));
  led.note_transition(0, RadioState::LISTEN, us(20));
  led.flush(us(30));
  CHECK(led.state_time(0, RadioState::LISTEN) == us(20));
  CHECK(led.state_time(0, RadioState::SLEEP) == us(10));
}
