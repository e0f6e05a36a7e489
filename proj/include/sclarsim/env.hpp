#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "sclarsim/config.hpp"
#include "sclarsim/phy.hpp"

// MAC-layer environment: slotted frames, scheduled fUDs, a periodic jammer,
// and one learning UD whose per-slot decision is Hold or Dispatch.
namespace sclarsim::env {

enum class Action : int { Hold = 0, Dispatch = 1 };

// Per-UD slot result, as acknowledged on the control channel.
enum class UdStatus : int { Idle = 0, Success = 1, Collision = 2, Jammed = 3 };

// Slot occupancy from the learner's point of view: computed from the fUDs and
// the jammer only, never from the learner's own action.
enum class SlotClass : int { Free = 0, Occupied = 1, Jammed = 2 };

const char* to_string(UdStatus s);
const char* to_string(SlotClass c);

// One row of the decision/payoff table.
struct RewardRow {
  SlotClass slot_class;
  Action action;
  char grade;      // E best, G good, W weak, B bad
  double nu_ud;    // per-UD utility weight
  double nu_net;   // network-level reward weight
};

const std::array<RewardRow, 6>& reward_table();
const RewardRow& reward_lookup(SlotClass c, Action a);

// U = nu_ud * realized rate. Rate must be non-negative.
double utility(double ud_rate, double nu_ud);

// r = nu_net * (iUD utility + sum of fUD utilities).
double reward(double iud_utility, std::span<const double> fud_utilities, double nu_net);

// Frozen per-frame transmit schedule of the fixed UDs: n_fuds rows of S bits.
struct FudSchedule {
  int n_fuds = 0;
  int s = 0;
  std::vector<std::uint8_t> bits;  // row-major
  std::uint8_t bit(int fud, int slot) const { return bits[static_cast<std::size_t>(fud) * s + slot]; }
};

// Bernoulli(omega) per bit, or the scripted bits when the config fixes them.
FudSchedule gen_fud_schedule(const NetworkConfig& cfg, std::mt19937_64& rng);

// Periodic jammer indicator at absolute slot t: each period starts with
// jam_quiet silent slots, then transmits for the rest (inverted by flag).
std::uint8_t jammer_active(long long t, const NetworkConfig& cfg);

// Everything observable about one elapsed slot. Status/rate vectors are
// indexed by UD with the learner last.
struct SlotOutcome {
  SlotClass slot_class = SlotClass::Free;
  std::uint8_t jammed = 0;               // any jammer on this slot
  std::vector<std::uint8_t> tx;          // who transmitted
  std::vector<UdStatus> status;
  std::vector<double> rate;              // realized rate; 0 unless Success
};

// Statuses from transmit indicators alone (rates left at zero).
SlotOutcome classify_slot(std::span<const std::uint8_t> fud_bits, Action iud, std::uint8_t jam);

class Environment {
 public:
  explicit Environment(NetworkConfig cfg);

  // Starts a fresh episode of `frames` frames (config default when <= 0) and
  // returns the initial observation (all-idle history).
  std::vector<double> reset(int frames = 0);

  struct StepResult {
    std::vector<double> state;
    double reward = 0.0;
    UdStatus iud_ack = UdStatus::Idle;
    SlotOutcome outcome;
  };
  StepResult step(Action a);

  // Lengthens the current episode by `frames` more frames without resetting:
  // slot counter, history, schedule, and RNG stream all continue. Only valid
  // between reset() and exhaustion-plus-extension; throws if never reset.
  void extend(int frames);

  // Current observation (the flattened slot history), without stepping.
  std::vector<double> observation() const;

  bool live() const { return live_; }
  bool done() const { return t_ >= total_slots_; }
  long long slot() const { return t_; }
  int frame() const { return static_cast<int>(t_ / cfg_.slots_per_frame); }
  int state_size() const;
  const NetworkConfig& config() const { return cfg_; }
  const FudSchedule& schedule() const { return sched_; }

 private:
  struct SlotRecord {
    std::vector<std::uint8_t> action;
    std::vector<UdStatus> status;
    std::vector<double> rate;
  };

  std::vector<double> flatten_history() const;

  NetworkConfig cfg_;
  std::mt19937_64 rng_;
  FudSchedule sched_;
  bool sched_drawn_ = false;
  std::deque<SlotRecord> hist_;
  phy::ChannelRealization ch_;
  phy::PowerProfile pw_;
  long long t_ = 0;
  long long total_slots_ = 0;
  bool live_ = false;
};

// Entries per UD per slot in the flattened observation: action bit, one-hot
// status, realized rate.
inline constexpr int kStateEntriesPerUd = 6;

}  // namespace sclarsim::env
