#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sclarsim/env.hpp"

// Throughput accounting: per-UD success fractions, collision-aware rates, the
// scheduled sum-rate objective, and the CSV emitters for run outputs.
namespace sclarsim::metrics {

// Fraction of Success entries in a status sequence.
double xi_empirical(std::span<const env::UdStatus> outcomes);

// Collision-aware link rate for one slot: success fraction times realized rate.
double clar_slot(double xi, double rate);

// Sum over UDs of <per-slot collision-aware rates, transmit indicators>.
double sclar(const std::vector<std::vector<double>>& clar,
             const std::vector<std::vector<std::uint8_t>>& actions);

// Trailing mean over `window` points; shorter prefixes average what exists.
std::vector<double> moving_average(std::span<const double> series, int window);

struct FrameMetrics {
  std::vector<double> xi;    // per-UD success fraction over the frame
  std::vector<double> clar;  // per-UD accumulated collision-aware rate
  double sclar = 0.0;
  int free_slots = 0;
  int occupied_slots = 0;
  int jammed_slots = 0;
  int iud_collisions = 0;
  int iud_jammed_tx = 0;
  int free_dispatches = 0;   // learner transmissions landing in free slots
  double utilization = 0.0;  // free_dispatches / free_slots, 0 when no free slots
};

// Streams slots and closes into FrameMetrics at each frame boundary.
class FrameAccumulator {
 public:
  explicit FrameAccumulator(int n_uds);

  void add_slot(const env::SlotOutcome& outcome, env::Action iud_action);
  FrameMetrics finish();
  int slots() const { return slots_; }

 private:
  int n_uds_ = 0;
  int slots_ = 0;
  std::vector<int> successes_;
  FrameMetrics cur_;
};

// Everything a training run records, in slot order.
struct TrainingSeries {
  std::vector<double> reward;
  std::vector<double> epsilon;
  std::vector<int> action;
  std::vector<env::SlotClass> slot_class;
  std::vector<double> loss;  // one entry per optimizer step
  std::vector<FrameMetrics> frames;
};

// Column layouts are fixed; all three write atomically.
void write_learning_curve_csv(const std::string& path, const TrainingSeries& series, int ma_window);
void write_loss_curve_csv(const std::string& path, const TrainingSeries& series);
void write_sclar_csv(const std::string& path, const std::vector<FrameMetrics>& frames);

}  // namespace sclarsim::metrics
