#pragma once

// Random single-subchannel instances shared by the unit and acceptance tests.

#include <cran/channel.hpp>
#include <cran/model.hpp>

#include <cmath>
#include <random>

namespace cran::testing {

struct ScInstance {
  SystemParams params;
  ChannelGains gains;
  DualPoint dual;
};

/// One subchannel of a 64-subchannel, 20 MHz system. Gains follow the
/// path-loss, shadowing and Rayleigh model at distances 20-500 m; per-RRH bits,
/// fronthaul capacities and per-user budgets and weights vary; multipliers are
/// log-uniform around their natural scales.
inline ScInstance random_sc_instance(std::mt19937_64& rng, std::size_t rrhs, std::size_t users) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> rayleigh_power(1.0);
  std::uniform_int_distribution<int> bits(1, 15);

  const double bandwidth = 20e6;
  const double scb = bandwidth / 64.0;
  ScInstance in;
  SystemParams& p = in.params;
  p.num_rrhs = rrhs;
  p.num_users = users;
  p.num_subchannels = 1;
  p.bandwidth = scb;
  for (std::size_t m = 0; m < rrhs; ++m) {
    p.sq_bits.push_back(bits(rng));
    p.fronthaul_capacity.push_back(std::pow(10.0, 7.0 + 2.0 * unit(rng)));
    p.noise_power.push_back(subchannel_noise_power(bandwidth, 64));
  }
  for (std::size_t k = 0; k < users; ++k) {
    p.power_budget.push_back(dbm_to_watts(10.0 + 20.0 * unit(rng)));
    p.weight.push_back(0.5 + 1.5 * unit(rng));
  }
  in.gains = ChannelGains(rrhs, users, 1);
  for (std::size_t m = 0; m < rrhs; ++m)
    for (std::size_t k = 0; k < users; ++k) {
      const double d = 20.0 + 480.0 * unit(rng);
      const double loss_db = 38.0 + 30.0 * std::log10(d) + 6.0 * normal(rng);
      in.gains(m, k, 0) = std::pow(10.0, -loss_db / 10.0) * rayleigh_power(rng);
    }
  for (std::size_t m = 0; m < rrhs; ++m)
    in.dual.lambda.push_back(p.fronthaul_capacity[m] * std::pow(10.0, -2.0 + 3.0 * unit(rng)));
  for (std::size_t k = 0; k < users; ++k)
    in.dual.mu.push_back(scb * static_cast<double>(users) / (p.power_budget[k] * ln2) *
                         std::pow(10.0, -2.0 + 3.0 * unit(rng)));
  return in;
}

}  // namespace cran::testing
