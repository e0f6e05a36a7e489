#pragma once

#include <complex>
#include <random>
#include <span>
#include <vector>

#include "sclarsim/config.hpp"

// Physical layer: per-slot Rayleigh channel draws, dBm conversions, and the
// matched-filter SINR at a multi-antenna AP.
namespace sclarsim::phy {

using Complex = std::complex<double>;

// One slot's channel state. Column-major K x N (and K x M) so each device's
// vector sits contiguously.
struct ChannelRealization {
  int k = 0;  // AP antennas
  int n = 0;  // legitimate UDs
  int m = 0;  // jammers
  std::vector<Complex> h;  // UD channels, size k*n
  std::vector<Complex> g;  // jammer channels, size k*m
  double noise_var = 1.0;  // sigma^2, linear power

  std::span<const Complex> ud(int i) const { return {h.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)}; }
  std::span<const Complex> jammer(int i) const { return {g.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)}; }
};

// Per-slot transmit powers, linear scale.
struct PowerProfile {
  std::vector<double> p_ud;
  std::vector<double> p_jam;
};

double dbm_to_linear(double dbm);

// i.i.d. CN(0,1) entries: real and imaginary parts N(0, 1/2) each. With
// cfg.fixed_unit_channels, deterministic unit basis vectors instead.
ChannelRealization sample_channels(const NetworkConfig& cfg, std::mt19937_64& rng);

// Uniform per-slot powers in the configured dBm ranges, converted to linear.
PowerProfile sample_powers(const NetworkConfig& cfg, std::mt19937_64& rng);

// Post-matched-filter SINR of UD `ud` given transmit indicator vectors for the
// UDs and jammers. Returns 0 when the UD is silent. `ideal_sic` removes the
// co-UD interference sum.
double compute_sinr_mf(const ChannelRealization& ch, const PowerProfile& pw,
                       std::span<const std::uint8_t> tx,
                       std::span<const std::uint8_t> jam, int ud,
                       bool ideal_sic = false);

// Shannon rate for one slot, bits/s/Hz.
double rate_per_slot(double sinr);

// One UD's frame rate: sum of its per-slot rates.
double frame_rate(std::span<const double> slot_rates);

}  // namespace sclarsim::phy
