#include "sclarsim/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sclarsim::env {

const char* to_string(UdStatus s) {
  switch (s) {
    case UdStatus::Idle: return "idle";
    case UdStatus::Success: return "success";
    case UdStatus::Collision: return "collision";
    case UdStatus::Jammed: return "jammed";
  }
  return "?";
}

const char* to_string(SlotClass c) {
  switch (c) {
    case SlotClass::Free: return "free";
    case SlotClass::Occupied: return "occupied";
    case SlotClass::Jammed: return "jammed";
  }
  return "?";
}

const std::array<RewardRow, 6>& reward_table() {
  static const std::array<RewardRow, 6> kTable = {{
      {SlotClass::Jammed, Action::Hold, 'G', 4.0, 5.0},
      {SlotClass::Jammed, Action::Dispatch, 'W', 1.0, -10.0},
      {SlotClass::Occupied, Action::Hold, 'G', 4.0, 5.0},
      {SlotClass::Occupied, Action::Dispatch, 'B', 3.0, -5.0},
      {SlotClass::Free, Action::Hold, 'W', 1.0, -10.0},
      {SlotClass::Free, Action::Dispatch, 'E', 5.0, 10.0},
  }};
  return kTable;
}

const RewardRow& reward_lookup(SlotClass c, Action a) {
  for (const RewardRow& row : reward_table())
    if (row.slot_class == c && row.action == a) return row;
  throw std::logic_error("reward_lookup: unmapped (slot_class, action)");
}

double utility(double ud_rate, double nu_ud) {
  if (ud_rate < 0.0) throw std::invalid_argument("utility: negative rate");
  return nu_ud * ud_rate;
}

double reward(double iud_utility, std::span<const double> fud_utilities, double nu_net) {
  double acc = iud_utility;
  for (double u : fud_utilities) acc += u;
  return nu_net * acc;
}

FudSchedule gen_fud_schedule(const NetworkConfig& cfg, std::mt19937_64& rng) {
  FudSchedule sched;
  sched.n_fuds = cfg.n_fuds();
  sched.s = cfg.slots_per_frame;
  sched.bits.resize(static_cast<std::size_t>(sched.n_fuds) * sched.s);
  if (!cfg.fixed_fud_bits.empty()) {
    for (int f = 0; f < sched.n_fuds; ++f)
      for (int s = 0; s < sched.s; ++s)
        sched.bits[static_cast<std::size_t>(f) * sched.s + s] = cfg.fixed_fud_bits[f][s];
    return sched;
  }
  std::bernoulli_distribution coin(cfg.omega);
  for (std::uint8_t& b : sched.bits) b = coin(rng) ? 1 : 0;
  return sched;
}

std::uint8_t jammer_active(long long t, const NetworkConfig& cfg) {
  if (cfg.m_jammers <= 0) return 0;
  if (t < 0) throw std::invalid_argument("jammer_active: negative slot index");
  const long long phase = t % cfg.jam_period;
  const bool quiet_phase = phase < cfg.jam_quiet;
  return (cfg.invert_jam_pattern ? quiet_phase : !quiet_phase) ? 1 : 0;
}

SlotOutcome classify_slot(std::span<const std::uint8_t> fud_bits, Action iud, std::uint8_t jam) {
  SlotOutcome out;
  const int n = static_cast<int>(fud_bits.size()) + 1;
  bool any_fud = false;
  for (std::uint8_t b : fud_bits) any_fud |= (b != 0);
  out.slot_class = jam ? SlotClass::Jammed : (any_fud ? SlotClass::Occupied : SlotClass::Free);
  out.jammed = jam ? 1 : 0;

  out.tx.assign(n, 0);
  for (int i = 0; i + 1 < n; ++i) out.tx[i] = fud_bits[i] ? 1 : 0;
  out.tx[n - 1] = (iud == Action::Dispatch) ? 1 : 0;

  int transmitters = 0;
  for (std::uint8_t b : out.tx) transmitters += b;

  out.status.assign(n, UdStatus::Idle);
  out.rate.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!out.tx[i]) continue;
    if (jam)
      out.status[i] = UdStatus::Jammed;
    else if (transmitters >= 2)
      out.status[i] = UdStatus::Collision;
    else
      out.status[i] = UdStatus::Success;
  }
  return out;
}

Environment::Environment(NetworkConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
}

std::vector<double> Environment::reset(int frames) {
  t_ = 0;
  total_slots_ = static_cast<long long>(frames > 0 ? frames : cfg_.frames) * cfg_.slots_per_frame;
  if (!sched_drawn_ || cfg_.redraw_fud_per_frame) {
    sched_ = gen_fud_schedule(cfg_, rng_);
    sched_drawn_ = true;
  }
  hist_.clear();
  for (int w = 0; w < cfg_.window(); ++w) {
    SlotRecord rec;
    rec.action.assign(cfg_.n_uds, 0);
    rec.status.assign(cfg_.n_uds, UdStatus::Idle);
    rec.rate.assign(cfg_.n_uds, 0.0);
    hist_.push_back(std::move(rec));
  }
  live_ = true;
  return flatten_history();
}

void Environment::extend(int frames) {
  if (!live_) throw std::logic_error("extend: reset() must run first");
  if (frames <= 0) throw std::invalid_argument("extend: frames must be positive");
  total_slots_ += static_cast<long long>(frames) * cfg_.slots_per_frame;
}

std::vector<double> Environment::observation() const {
  if (!live_) throw std::logic_error("observation: reset() must run first");
  return flatten_history();
}

Environment::StepResult Environment::step(Action a) {
  if (!live_) throw std::logic_error("step: reset() must run first");
  if (done()) throw std::logic_error("step: episode exhausted");

  const int s = static_cast<int>(t_ % cfg_.slots_per_frame);
  if (cfg_.redraw_fud_per_frame && s == 0 && t_ > 0) sched_ = gen_fud_schedule(cfg_, rng_);
  if (!cfg_.redraw_channels_per_frame || s == 0) {
    ch_ = phy::sample_channels(cfg_, rng_);
    pw_ = phy::sample_powers(cfg_, rng_);
  }

  std::vector<std::uint8_t> fud_bits(cfg_.n_fuds());
  for (int f = 0; f < cfg_.n_fuds(); ++f) fud_bits[f] = sched_.bit(f, s);
  const std::uint8_t jam_on = jammer_active(t_, cfg_);
  std::vector<std::uint8_t> jam(cfg_.m_jammers, jam_on);

  SlotOutcome out = classify_slot(fud_bits, a, jam_on);
  for (int n = 0; n < cfg_.n_uds; ++n) {
    if (out.status[n] != UdStatus::Success) continue;
    const double sinr = phy::compute_sinr_mf(ch_, pw_, out.tx, jam, n, cfg_.ideal_sic);
    out.rate[n] = phy::rate_per_slot(sinr);
  }

  const RewardRow& row = reward_lookup(out.slot_class, a);
  std::vector<double> fud_u(cfg_.n_fuds());
  for (int f = 0; f < cfg_.n_fuds(); ++f) fud_u[f] = utility(out.rate[f], row.nu_ud);
  const double iud_u = utility(out.rate[cfg_.n_uds - 1], row.nu_ud);
  const double r = reward(iud_u, fud_u, row.nu_net);

  SlotRecord rec;
  rec.action.assign(out.tx.begin(), out.tx.end());
  rec.status = out.status;
  rec.rate = out.rate;
  hist_.pop_front();
  hist_.push_back(std::move(rec));
  ++t_;

  StepResult res;
  res.state = flatten_history();
  res.reward = r;
  res.iud_ack = out.status[cfg_.n_uds - 1];
  res.outcome = std::move(out);
  return res;
}

int Environment::state_size() const { return cfg_.window() * cfg_.n_uds * kStateEntriesPerUd; }

std::vector<double> Environment::flatten_history() const {
  std::vector<double> state;
  state.reserve(state_size());
  for (const SlotRecord& rec : hist_) {
    for (int n = 0; n < cfg_.n_uds; ++n) {
      state.push_back(static_cast<double>(rec.action[n]));
      for (int k = 0; k < 4; ++k)
        state.push_back(static_cast<int>(rec.status[n]) == k ? 1.0 : 0.0);
      state.push_back(rec.rate[n]);
    }
  }
  return state;
}

}  // namespace sclarsim::env
