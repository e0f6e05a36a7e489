#include "sclarsim/phy.hpp"

#include <cmath>
#include <stdexcept>

namespace sclarsim::phy {

namespace {

// Hermitian inner product <a, b> = sum conj(a_k) * b_k.
Complex cdot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const Complex> a) {
  double acc = 0.0;
  for (const Complex& c : a) acc += std::norm(c);
  return acc;
}

}  // namespace

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

ChannelRealization sample_channels(const NetworkConfig& cfg, std::mt19937_64& rng) {
  ChannelRealization ch;
  ch.k = cfg.k_antennas;
  ch.n = cfg.n_uds;
  ch.m = cfg.m_jammers;
  ch.h.assign(static_cast<std::size_t>(ch.k) * ch.n, Complex{0.0, 0.0});
  ch.g.assign(static_cast<std::size_t>(ch.k) * ch.m, Complex{0.0, 0.0});
  if (cfg.fixed_unit_channels) {
    for (int n = 0; n < ch.n; ++n) ch.h[static_cast<std::size_t>(n) * ch.k + n % ch.k] = {1.0, 0.0};
    for (int m = 0; m < ch.m; ++m)
      ch.g[static_cast<std::size_t>(m) * ch.k + (ch.n + m) % ch.k] = {1.0, 0.0};
  } else {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    for (Complex& c : ch.h) {
      double re = nd(rng);
      double im = nd(rng);
      c = {re, im};
    }
    for (Complex& c : ch.g) {
      double re = nd(rng);
      double im = nd(rng);
      c = {re, im};
    }
  }
  std::uniform_real_distribution<double> noise_dbm(cfg.noise_dbm_min, cfg.noise_dbm_max);
  ch.noise_var = dbm_to_linear(noise_dbm(rng));
  return ch;
}

PowerProfile sample_powers(const NetworkConfig& cfg, std::mt19937_64& rng) {
  PowerProfile pw;
  std::uniform_real_distribution<double> dbm(cfg.ud_power_dbm_min, cfg.ud_power_dbm_max);
  pw.p_ud.resize(cfg.n_uds);
  for (double& p : pw.p_ud) p = dbm_to_linear(dbm(rng));
  pw.p_jam.resize(cfg.m_jammers);
  for (double& p : pw.p_jam) p = dbm_to_linear(dbm(rng));
  return pw;
}

double compute_sinr_mf(const ChannelRealization& ch, const PowerProfile& pw,
                       std::span<const std::uint8_t> tx,
                       std::span<const std::uint8_t> jam, int ud,
                       bool ideal_sic) {
  if (ud < 0 || ud >= ch.n) throw std::out_of_range("compute_sinr_mf: ud index out of range");
  if (tx.size() != static_cast<std::size_t>(ch.n)) throw std::invalid_argument("compute_sinr_mf: tx indicator size != n");
  if (jam.size() != static_cast<std::size_t>(ch.m)) throw std::invalid_argument("compute_sinr_mf: jam indicator size != m");
  if (pw.p_ud.size() != static_cast<std::size_t>(ch.n) || pw.p_jam.size() != static_cast<std::size_t>(ch.m))
    throw std::invalid_argument("compute_sinr_mf: power profile does not match realization");
  if (!tx[ud]) return 0.0;

  const std::span<const Complex> hn = ch.ud(ud);
  const double hn2 = norm2(hn);
  const double num = pw.p_ud[ud] * hn2 * hn2;

  double den = ch.noise_var * hn2;
  if (!ideal_sic) {
    for (int j = 0; j < ch.n; ++j) {
      if (j == ud || !tx[j]) continue;
      den += pw.p_ud[j] * std::norm(cdot(hn, ch.ud(j)));
    }
  }
  for (int j = 0; j < ch.m; ++j) {
    if (!jam[j]) continue;
    den += pw.p_jam[j] * std::norm(cdot(hn, ch.jammer(j)));
  }
  return num / den;
}

double rate_per_slot(double sinr) {
  if (sinr < 0.0) throw std::invalid_argument("rate_per_slot: negative SINR");
  return std::log2(1.0 + sinr);
}

double frame_rate(std::span<const double> slot_rates) {
  double acc = 0.0;
  for (double r : slot_rates) acc += r;
  return acc;
}

}  // namespace sclarsim::phy
