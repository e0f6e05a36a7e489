#include "sclarsim/metrics.hpp"

#include <sstream>
#include <stdexcept>

#include "sclarsim/io.hpp"

namespace sclarsim::metrics {

double xi_empirical(std::span<const env::UdStatus> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("xi_empirical: empty outcome sequence");
  int succ = 0;
  for (env::UdStatus s : outcomes) succ += (s == env::UdStatus::Success) ? 1 : 0;
  return static_cast<double>(succ) / static_cast<double>(outcomes.size());
}

double clar_slot(double xi, double rate) {
  if (xi < 0.0 || xi > 1.0) throw std::invalid_argument("clar_slot: xi out of [0, 1]");
  if (rate < 0.0) throw std::invalid_argument("clar_slot: negative rate");
  return xi * rate;
}

double sclar(const std::vector<std::vector<double>>& clar,
             const std::vector<std::vector<std::uint8_t>>& actions) {
  if (clar.size() != actions.size()) throw std::invalid_argument("sclar: per-UD row counts differ");
  double acc = 0.0;
  for (std::size_t n = 0; n < clar.size(); ++n) {
    if (clar[n].size() != actions[n].size()) throw std::invalid_argument("sclar: row length mismatch");
    for (std::size_t s = 0; s < clar[n].size(); ++s)
      if (actions[n][s]) acc += clar[n][s];
  }
  return acc;
}

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    const std::size_t span = std::min<std::size_t>(i + 1, window);
    out[i] = acc / static_cast<double>(span);
  }
  return out;
}

FrameAccumulator::FrameAccumulator(int n_uds) : n_uds_(n_uds) {
  if (n_uds < 1) throw std::invalid_argument("frame accumulator: n_uds must be >= 1");
  successes_.assign(n_uds_, 0);
  cur_.xi.assign(n_uds_, 0.0);
  cur_.clar.assign(n_uds_, 0.0);
}

void FrameAccumulator::add_slot(const env::SlotOutcome& outcome, env::Action iud_action) {
  if (static_cast<int>(outcome.status.size()) != n_uds_)
    throw std::invalid_argument("frame accumulator: UD count mismatch");
  ++slots_;
  for (int n = 0; n < n_uds_; ++n) {
    if (outcome.status[n] == env::UdStatus::Success) ++successes_[n];
    const double xi_run = static_cast<double>(successes_[n]) / static_cast<double>(slots_);
    const double r = clar_slot(xi_run, outcome.rate[n]);
    if (outcome.tx[n]) {
      cur_.clar[n] += r;
      cur_.sclar += r;
    }
  }
  switch (outcome.slot_class) {
    case env::SlotClass::Free: ++cur_.free_slots; break;
    case env::SlotClass::Occupied: ++cur_.occupied_slots; break;
    case env::SlotClass::Jammed: ++cur_.jammed_slots; break;
  }
  const env::UdStatus iud = outcome.status[n_uds_ - 1];
  if (iud == env::UdStatus::Collision) ++cur_.iud_collisions;
  if (iud == env::UdStatus::Jammed) ++cur_.iud_jammed_tx;
  if (outcome.slot_class == env::SlotClass::Free && iud_action == env::Action::Dispatch)
    ++cur_.free_dispatches;
}

FrameMetrics FrameAccumulator::finish() {
  if (slots_ == 0) throw std::logic_error("frame accumulator: finish() on an empty frame");
  for (int n = 0; n < n_uds_; ++n)
    cur_.xi[n] = static_cast<double>(successes_[n]) / static_cast<double>(slots_);
  cur_.utilization = cur_.free_slots > 0
                         ? static_cast<double>(cur_.free_dispatches) / cur_.free_slots
                         : 0.0;
  FrameMetrics done = std::move(cur_);
  cur_ = FrameMetrics{};
  cur_.xi.assign(n_uds_, 0.0);
  cur_.clar.assign(n_uds_, 0.0);
  successes_.assign(n_uds_, 0);
  slots_ = 0;
  return done;
}

void write_learning_curve_csv(const std::string& path, const TrainingSeries& series, int ma_window) {
  const std::vector<double> ma = moving_average(series.reward, ma_window);
  std::ostringstream os;
  os << "slot,reward,reward_ma,epsilon,action,slot_class\n";
  for (std::size_t i = 0; i < series.reward.size(); ++i) {
    os << i << ',' << io::fmt_double(series.reward[i]) << ',' << io::fmt_double(ma[i]) << ','
       << io::fmt_double(series.epsilon[i]) << ',' << series.action[i] << ','
       << env::to_string(series.slot_class[i]) << '\n';
  }
  io::atomic_write_file(path, os.str());
}

void write_loss_curve_csv(const std::string& path, const TrainingSeries& series) {
  std::ostringstream os;
  os << "train_step,batch_loss\n";
  for (std::size_t i = 0; i < series.loss.size(); ++i)
    os << i << ',' << io::fmt_double(series.loss[i]) << '\n';
  io::atomic_write_file(path, os.str());
}

void write_sclar_csv(const std::string& path, const std::vector<FrameMetrics>& frames) {
  std::ostringstream os;
  os << "frame,sclar,utilization,collisions,jammed_tx\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    os << f << ',' << io::fmt_double(frames[f].sclar) << ','
       << io::fmt_double(frames[f].utilization) << ',' << frames[f].iud_collisions << ','
       << frames[f].iud_jammed_tx << '\n';
  }
  io::atomic_write_file(path, os.str());
}

}  // namespace sclarsim::metrics
