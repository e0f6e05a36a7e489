#include "sclarsim/config.hpp"

#include <stdexcept>
#include <string>

namespace sclarsim {

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (n_uds < 1) fail("n_uds must be >= 1");
  if (m_jammers < 0) fail("m_jammers must be >= 0");
  if (k_antennas < 1) fail("k_antennas must be >= 1");
  if (slots_per_frame < 1) fail("slots_per_frame must be >= 1");
  if (frames < 1) fail("frames must be >= 1");
  if (omega < 0.0 || omega > 1.0) fail("omega must be in [0, 1]");
  if (jam_period < 1) fail("jam_period must be >= 1");
  if (jam_quiet < 0 || jam_quiet >= jam_period) fail("jam_quiet must satisfy 0 <= jam_quiet < jam_period");
  if (ud_power_dbm_min > ud_power_dbm_max) fail("ud power range inverted");
  if (noise_dbm_min > noise_dbm_max) fail("noise range inverted");
  if (history_window < 0) fail("history_window must be >= 0");
  if (!fixed_fud_bits.empty()) {
    if (static_cast<int>(fixed_fud_bits.size()) != n_fuds()) fail("fixed_fud_bits needs one row per fUD");
    for (const auto& row : fixed_fud_bits)
      if (static_cast<int>(row.size()) != slots_per_frame) fail("fixed_fud_bits rows must have slots_per_frame bits");
  }
  if (drl.alpha <= 0.0 || drl.tabular_alpha <= 0.0) fail("step sizes must be positive");
  if (drl.gamma < 0.0 || drl.gamma >= 1.0) fail("gamma must be in [0, 1)");
  if (drl.eps0 < 0.0 || drl.eps0 > 1.0 || drl.eps_min < 0.0 || drl.eps_min > drl.eps0) fail("epsilon schedule out of range");
  if (drl.eps_decay <= 0.0 || drl.eps_decay > 1.0) fail("eps_decay must be in (0, 1]");
  if (drl.replay_capacity == 0) fail("replay_capacity must be positive");
  if (drl.batch_size < 1 || static_cast<std::size_t>(drl.batch_size) > drl.replay_capacity) fail("batch_size must be in [1, replay_capacity]");
  if (drl.sync_period < 1) fail("sync_period must be >= 1");
  if (drl.tau_soft <= 0.0 || drl.tau_soft > 1.0) fail("tau_soft must be in (0, 1]");
  if (drl.hidden_width < 1 || drl.res_blocks < 0) fail("network shape out of range");
}

}  // namespace sclarsim
