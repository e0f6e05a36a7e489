#pragma once

#include <cstdint>
#include <vector>

namespace sclarsim {

// Learning-side hyperparameters. Everything here can be overridden from a
// config file (drl.* keys) or the CLI.
struct DrlConfig {
  double alpha = 1e-3;         // DQN step size
  double tabular_alpha = 0.5;  // tabular Q-learning step size
  double gamma = 0.9;
  double eps0 = 1.0;
  double eps_min = 0.02;
  double eps_decay = 0.999;  // multiplicative, per slot
  std::size_t replay_capacity = 10000;
  int batch_size = 32;
  int sync_period = 100;  // slots between target-network syncs
  double tau_soft = 0.1;
  int hidden_width = 64;
  int res_blocks = 2;
  bool use_adam = true;      // adaptive moments by default; false = plain SGD.
                             // Ignored (plain SGD) when faithful_dqn is set.
  bool faithful_dqn = false; // bootstrap with the prediction net instead of the target net
};

// Carrier/pathloss constants kept at 1 (normalized units). Configurable but
// inert: they scale nothing in the normalized model.
struct UnitConstants {
  double wavelength = 1.0;
  double pathloss_exponent = 1.0;
  double antenna_gain = 1.0;
};

// One scenario: network geometry, schedules, jammer, and episode shape.
struct NetworkConfig {
  int n_uds = 4;       // legitimate UDs including the intelligent one
  int m_jammers = 1;
  int k_antennas = 4;  // AP antennas
  int slots_per_frame = 5;  // S
  int frames = 1500;        // training frames per episode
  double omega = 0.5;       // Bernoulli(p) of each fUD schedule bit
  int jam_period = 5;
  int jam_quiet = 3;  // leading quiet slots of each jam period
  double ud_power_dbm_min = 20.0;
  double ud_power_dbm_max = 25.0;
  double noise_dbm_min = 2.0;
  double noise_dbm_max = 5.0;
  int history_window = 0;  // W; 0 means one frame (= slots_per_frame)
  bool redraw_fud_per_frame = false;  // default: quasi-static schedules
  bool redraw_channels_per_frame = false;  // default: fresh fading every slot
  bool ideal_sic = false;             // drop co-UD interference
  bool invert_jam_pattern = false;    // active-first jam periods
  // Unit basis-vector channels (UD n -> e_{n mod K}, jammer m -> e_{(N+m) mod K})
  // instead of fresh fading draws; with degenerate power/noise ranges this
  // makes every reward a constant, which the deterministic drill relies on.
  bool fixed_unit_channels = false;
  // Scripted fUD schedules (one row of S bits per fUD). Empty -> Bernoulli.
  std::vector<std::vector<std::uint8_t>> fixed_fud_bits;
  std::uint64_t seed = 1;
  UnitConstants units;
  DrlConfig drl;

  int window() const { return history_window > 0 ? history_window : slots_per_frame; }
  int n_fuds() const { return n_uds - 1; }
  // Throws std::invalid_argument on any out-of-range field.
  void validate() const;
};

}  // namespace sclarsim
