#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sclarsim/env.hpp"

using namespace sclarsim;
using env::Action;
using env::SlotClass;
using env::UdStatus;

namespace {

NetworkConfig scripted_two_ud(int m_jammers) {
  NetworkConfig cfg;
  cfg.n_uds = 2;
  cfg.m_jammers = m_jammers;
  cfg.k_antennas = 4;
  cfg.slots_per_frame = 5;
  cfg.jam_period = 5;
  cfg.jam_quiet = 3;
  cfg.fixed_fud_bits = {{1, 0, 0, 1, 0}};
  cfg.frames = 4;
  return cfg;
}

}  // namespace

TEST_CASE("decision table carries the exact grades and weights") {
  const auto& table = env::reward_table();
  CHECK(table.size() == 6);

  auto row = [](SlotClass c, Action a) { return env::reward_lookup(c, a); };
  CHECK(row(SlotClass::Jammed, Action::Hold).grade == 'G');
  CHECK(row(SlotClass::Jammed, Action::Hold).nu_ud == 4.0);
  CHECK(row(SlotClass::Jammed, Action::Hold).nu_net == 5.0);
  CHECK(row(SlotClass::Jammed, Action::Dispatch).grade == 'W');
  CHECK(row(SlotClass::Jammed, Action::Dispatch).nu_ud == 1.0);
  CHECK(row(SlotClass::Jammed, Action::Dispatch).nu_net == -10.0);
  CHECK(row(SlotClass::Occupied, Action::Hold).grade == 'G');
  CHECK(row(SlotClass::Occupied, Action::Hold).nu_ud == 4.0);
  CHECK(row(SlotClass::Occupied, Action::Hold).nu_net == 5.0);
  CHECK(row(SlotClass::Occupied, Action::Dispatch).grade == 'B');
  CHECK(row(SlotClass::Occupied, Action::Dispatch).nu_ud == 3.0);
  CHECK(row(SlotClass::Occupied, Action::Dispatch).nu_net == -5.0);
  CHECK(row(SlotClass::Free, Action::Hold).grade == 'W');
  CHECK(row(SlotClass::Free, Action::Hold).nu_ud == 1.0);
  CHECK(row(SlotClass::Free, Action::Hold).nu_net == -10.0);
  CHECK(row(SlotClass::Free, Action::Dispatch).grade == 'E');
  CHECK(row(SlotClass::Free, Action::Dispatch).nu_ud == 5.0);
  CHECK(row(SlotClass::Free, Action::Dispatch).nu_net == 10.0);
}

TEST_CASE("utility and reward arithmetic") {
  CHECK(env::utility(2.0, 5.0) == 10.0);
  CHECK(env::utility(0.0, 4.0) == 0.0);
  CHECK_THROWS_AS(env::utility(-1.0, 4.0), std::invalid_argument);

  const std::vector<double> fud_u{2.0, 3.0};
  CHECK(env::reward(10.0, fud_u, 2.0) == 30.0);
  CHECK(env::reward(0.0, std::vector<double>{}, -10.0) == 0.0);
}

TEST_CASE("fUD schedules are Bernoulli with the configured frequency") {
  NetworkConfig cfg;
  cfg.n_uds = 2;
  cfg.slots_per_frame = 100000;
  cfg.omega = 0.3;
  std::mt19937_64 rng(1234);
  const env::FudSchedule sched = env::gen_fud_schedule(cfg, rng);
  REQUIRE(sched.bits.size() == 100000);
  double mean = 0.0;
  for (std::uint8_t b : sched.bits) mean += b;
  mean /= static_cast<double>(sched.bits.size());
  CHECK(std::abs(mean - 0.3) <= 0.01);
}

TEST_CASE("degenerate Bernoulli parameters give constant schedules") {
  NetworkConfig cfg;
  cfg.n_uds = 3;
  cfg.slots_per_frame = 64;
  std::mt19937_64 rng(5);
  cfg.omega = 0.0;
  for (std::uint8_t b : env::gen_fud_schedule(cfg, rng).bits) CHECK(b == 0);
  cfg.omega = 1.0;
  for (std::uint8_t b : env::gen_fud_schedule(cfg, rng).bits) CHECK(b == 1);
}

TEST_CASE("scripted schedules are copied verbatim") {
  const NetworkConfig cfg = scripted_two_ud(1);
  std::mt19937_64 rng(9);
  const env::FudSchedule sched = env::gen_fud_schedule(cfg, rng);
  const std::vector<std::uint8_t> want{1, 0, 0, 1, 0};
  CHECK(sched.bits == want);
}

TEST_CASE("jammer pattern: quiet prefix then active, exactly periodic") {
  NetworkConfig cfg;
  cfg.jam_period = 5;
  cfg.jam_quiet = 2;
  const std::vector<int> want{0, 0, 1, 1, 1, 0, 0, 1, 1, 1};
  for (int t = 0; t < 10; ++t) CHECK(env::jammer_active(t, cfg) == want[t]);
  for (long long t = 0; t < 500; ++t)
    CHECK(env::jammer_active(t, cfg) == env::jammer_active(t + cfg.jam_period, cfg));

  cfg.jam_quiet = 0;  // always on
  for (int t = 0; t < 20; ++t) CHECK(env::jammer_active(t, cfg) == 1);

  cfg.jam_quiet = 2;
  cfg.invert_jam_pattern = true;  // active-first variant
  const std::vector<int> inv{1, 1, 0, 0, 0};
  for (int t = 0; t < 5; ++t) CHECK(env::jammer_active(t, cfg) == inv[t]);

  cfg.invert_jam_pattern = false;
  cfg.m_jammers = 0;
  for (int t = 0; t < 20; ++t) CHECK(env::jammer_active(t, cfg) == 0);
}

TEST_CASE("slot classification covers the three occupancy cases") {
  const std::uint8_t none[] = {0, 0};
  const std::uint8_t one[] = {1, 0};

  // free slot, learner dispatches alone -> success
  env::SlotOutcome out = env::classify_slot({none, 2}, Action::Dispatch, 0);
  CHECK(out.slot_class == SlotClass::Free);
  CHECK(out.status[2] == UdStatus::Success);
  CHECK(out.status[0] == UdStatus::Idle);

  // occupied slot, learner dispatches -> both collide
  out = env::classify_slot({one, 2}, Action::Dispatch, 0);
  CHECK(out.slot_class == SlotClass::Occupied);
  CHECK(out.status[0] == UdStatus::Collision);
  CHECK(out.status[2] == UdStatus::Collision);

  // occupied slot, learner holds -> the fUD succeeds alone
  out = env::classify_slot({one, 2}, Action::Hold, 0);
  CHECK(out.status[0] == UdStatus::Success);
  CHECK(out.status[2] == UdStatus::Idle);

  // jammed slot destroys every transmission
  out = env::classify_slot({one, 2}, Action::Dispatch, 1);
  CHECK(out.slot_class == SlotClass::Jammed);
  CHECK(out.status[0] == UdStatus::Jammed);
  CHECK(out.status[2] == UdStatus::Jammed);
  CHECK(out.status[1] == UdStatus::Idle);
}

TEST_CASE("at most one UD succeeds per slot and jam blocks all successes") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int it = 0; it < 500; ++it) {
    std::vector<std::uint8_t> bits(3);
    for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
    const Action a = coin(rng) ? Action::Dispatch : Action::Hold;
    const std::uint8_t jam = static_cast<std::uint8_t>(coin(rng));
    const env::SlotOutcome out = env::classify_slot(bits, a, jam);
    int successes = 0;
    for (UdStatus s : out.status) successes += (s == UdStatus::Success) ? 1 : 0;
    CHECK(successes <= 1);
    if (jam) CHECK(successes == 0);

    // the fUD statuses never depend on what the learner chose while holding
    const env::SlotOutcome held = env::classify_slot(bits, Action::Hold, jam);
    int fud_tx = 0;
    for (std::uint8_t b : bits) fud_tx += b;
    for (std::size_t f = 0; f < bits.size(); ++f) {
      if (!bits[f]) {
        CHECK(held.status[f] == UdStatus::Idle);
      } else if (jam) {
        CHECK(held.status[f] == UdStatus::Jammed);
      } else if (fud_tx >= 2) {
        CHECK(held.status[f] == UdStatus::Collision);
      } else {
        CHECK(held.status[f] == UdStatus::Success);
      }
    }
  }
}

TEST_CASE("scripted scenario without jam: class sequence under always-hold") {
  NetworkConfig cfg = scripted_two_ud(0);
  env::Environment e(cfg);
  e.reset();
  const std::vector<SlotClass> want{SlotClass::Occupied, SlotClass::Free, SlotClass::Free,
                                    SlotClass::Occupied, SlotClass::Free};
  for (int f = 0; f < 2; ++f)
    for (int s = 0; s < 5; ++s) CHECK(e.step(Action::Hold).outcome.slot_class == want[s]);
}

TEST_CASE("scripted scenario with jam: last two slots of each frame are jammed") {
  NetworkConfig cfg = scripted_two_ud(1);
  env::Environment e(cfg);
  e.reset();
  const std::vector<SlotClass> want{SlotClass::Occupied, SlotClass::Free, SlotClass::Free,
                                    SlotClass::Jammed, SlotClass::Jammed};
  for (int f = 0; f < 3; ++f)
    for (int s = 0; s < 5; ++s) CHECK(e.step(Action::Hold).outcome.slot_class == want[s]);
}

TEST_CASE("reward sign pattern over the four class/action pairs") {
  // lone learner, no jammer: every slot is free
  NetworkConfig cfg;
  cfg.n_uds = 1;
  cfg.m_jammers = 0;
  cfg.slots_per_frame = 5;
  cfg.frames = 2;
  env::Environment free_env(cfg);
  free_env.reset();
  auto sr = free_env.step(Action::Dispatch);
  CHECK(sr.iud_ack == UdStatus::Success);
  CHECK(sr.reward > 0.0);  // successful dispatch in a free slot pays
  sr = free_env.step(Action::Hold);
  CHECK(sr.iud_ack == UdStatus::Idle);
  CHECK(sr.reward == 0.0);  // wasted free slot: zero utility either way

  // always-on jammer: dispatching is destroyed, reward stays zero
  cfg.m_jammers = 1;
  cfg.jam_period = 5;
  cfg.jam_quiet = 0;
  env::Environment jam_env(cfg);
  jam_env.reset();
  sr = jam_env.step(Action::Dispatch);
  CHECK(sr.iud_ack == UdStatus::Jammed);
  CHECK(sr.reward == 0.0);
  CHECK(sr.outcome.rate.back() == 0.0);  // destroyed packet carries no rate

  // occupied slot: holding lets the fUD through (positive), colliding zeroes it
  NetworkConfig occ = scripted_two_ud(0);
  env::Environment occ_env(occ);
  occ_env.reset();
  sr = occ_env.step(Action::Hold);  // slot 0 is the fUD's slot
  CHECK(sr.outcome.status[0] == UdStatus::Success);
  CHECK(sr.reward > 0.0);
  occ_env.reset();
  sr = occ_env.step(Action::Dispatch);
  CHECK(sr.outcome.status[0] == UdStatus::Collision);
  CHECK(sr.iud_ack == UdStatus::Collision);
  CHECK(sr.reward == 0.0);
}

TEST_CASE("observation layout: window length, all-idle reset, broadcast outcomes") {
  NetworkConfig cfg = scripted_two_ud(0);
  env::Environment e(cfg);
  const std::vector<double> s0 = e.reset();
  REQUIRE(static_cast<int>(s0.size()) == e.state_size());
  CHECK(e.state_size() == 5 * 2 * 6);
  for (int w = 0; w < 5; ++w) {
    for (int n = 0; n < 2; ++n) {
      const int base = (w * 2 + n) * 6;
      CHECK(s0[base + 0] == 0.0);  // action bit
      CHECK(s0[base + 1] == 1.0);  // idle one-hot
      CHECK(s0[base + 2] == 0.0);
      CHECK(s0[base + 3] == 0.0);
      CHECK(s0[base + 4] == 0.0);
      CHECK(s0[base + 5] == 0.0);  // rate
    }
  }

  // slot 0: the fUD transmits alone and succeeds; newest record is last
  const auto sr = e.step(Action::Hold);
  REQUIRE(static_cast<int>(sr.state.size()) == e.state_size());
  const int newest_fud = (4 * 2 + 0) * 6;
  CHECK(sr.state[newest_fud + 0] == 1.0);  // fUD transmitted
  CHECK(sr.state[newest_fud + 2] == 1.0);  // success one-hot
  CHECK(sr.state[newest_fud + 5] > 0.0);   // its realized rate is visible
  const int newest_iud = (4 * 2 + 1) * 6;
  CHECK(sr.state[newest_iud + 0] == 0.0);
  CHECK(sr.state[newest_iud + 1] == 1.0);  // learner idle
}

TEST_CASE("environment lifecycle errors") {
  NetworkConfig cfg = scripted_two_ud(0);
  env::Environment e(cfg);
  CHECK_THROWS_AS(e.step(Action::Hold), std::logic_error);
  e.reset(1);
  for (int s = 0; s < 5; ++s) e.step(Action::Hold);
  CHECK(e.done());
  CHECK_THROWS_AS(e.step(Action::Hold), std::logic_error);
}

TEST_CASE("extend continues an episode instead of restarting it") {
  NetworkConfig cfg = scripted_two_ud(1);
  cfg.seed = 99;
  env::Environment e(cfg);
  CHECK_FALSE(e.live());
  CHECK_THROWS_AS(e.extend(1), std::logic_error);
  CHECK_THROWS_AS(e.observation(), std::logic_error);

  std::vector<double> state = e.reset(2);
  CHECK(e.live());
  CHECK(e.observation() == state);  // same view, no stepping
  for (int s = 0; s < 10; ++s) state = e.step(Action::Hold).state;
  CHECK(e.done());
  CHECK(e.live());

  e.extend(1);
  CHECK_FALSE(e.done());
  CHECK(e.slot() == 10);          // counter keeps running
  CHECK(e.observation() == state);  // history survives the extension
  for (int s = 0; s < 5; ++s) e.step(Action::Hold);
  CHECK(e.done());
  CHECK(e.slot() == 15);
  CHECK_THROWS_AS(e.extend(0), std::invalid_argument);

  // The extended episode sees the same world a single long episode would:
  // jammer phase, schedule, and channel stream all line up.
  env::Environment whole(cfg);
  whole.reset(3);
  env::Environment pieces(cfg);
  pieces.reset(2);
  std::vector<double> sw, sp;
  for (int s = 0; s < 10; ++s) {
    sw = whole.step(Action::Hold).state;
    sp = pieces.step(Action::Hold).state;
  }
  pieces.extend(1);
  for (int s = 0; s < 5; ++s) {
    sw = whole.step(Action::Hold).state;
    sp = pieces.step(Action::Hold).state;
    CHECK(sw == sp);
  }
}

TEST_CASE("same seed, same initial draw; schedules stay frozen across frames") {
  NetworkConfig cfg;
  cfg.n_uds = 4;
  cfg.seed = 31337;
  cfg.frames = 6;
  env::Environment a(cfg), b(cfg);
  CHECK(a.reset() == b.reset());
  CHECK(a.schedule().bits == b.schedule().bits);

  a.reset();
  const std::vector<std::uint8_t> sched0 = a.schedule().bits;
  for (int t = 0; t < 30; ++t) a.step(Action::Hold);
  CHECK(a.schedule().bits == sched0);  // quasi-static: never redrawn mid-run
  a.reset();
  CHECK(a.schedule().bits == sched0);  // and reused across resets

  NetworkConfig redraw = cfg;
  redraw.redraw_fud_per_frame = true;
  redraw.omega = 0.5;
  env::Environment c(redraw);
  c.reset();
  const std::vector<std::uint8_t> first = c.schedule().bits;
  bool changed = false;
  for (int f = 0; f < 20 && !changed; ++f) {
    for (int s = 0; s < cfg.slots_per_frame; ++s) c.step(Action::Hold);
    changed = c.schedule().bits != first;
    if (c.done()) c.reset();
  }
  CHECK(changed);
}

TEST_CASE("config validation rejects out-of-range fields") {
  NetworkConfig cfg;
  cfg.n_uds = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.jam_quiet = 5;
  cfg.jam_period = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.omega = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.fixed_fud_bits = {{1, 0}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // wrong row length
  cfg = NetworkConfig{};
  cfg.jam_quiet = 0;  // explicitly allowed: always-active jammer
  CHECK_NOTHROW(cfg.validate());
}
