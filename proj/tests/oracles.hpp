#pragma once

// Reference implementations used only by the tests: grid searches and
// brute-force enumeration built from the elementary rate formulas.

#include <cran/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace cran::testing {

struct GridMax {
  double arg = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  double slack = 0.0;  // largest change between neighbouring points of the finest grid
};

/// Maximizes f on [lo, hi] with a grid whose final spacing is at most
/// resolution * (hi - lo). The grid is refined around the best point level by
/// level, which is exact for unimodal f.
inline GridMax grid_maximize(const std::function<double(double)>& f, double lo, double hi,
                             double resolution = 1e-6, int points = 1001) {
  GridMax best;
  const double target = resolution * (hi - lo);
  double a = lo, b = hi;
  while (true) {
    const double step = (b - a) / (points - 1);
    int best_i = 0;
    double prev = 0.0;
    best.value = -std::numeric_limits<double>::infinity();
    best.slack = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = a + step * i;
      const double v = f(x);
      if (i > 0) best.slack = std::max(best.slack, std::abs(v - prev));
      prev = v;
      if (v > best.value) {
        best.value = v;
        best.arg = x;
        best_i = i;
      }
    }
    if (step <= target) return best;
    a = std::max(lo, a + step * (best_i - 1));
    b = std::min(hi, a + step * 2.0);
    if (best_i == 0) b = std::min(hi, a + step);
  }
}

struct BruteScResult {
  double value = 0.0;  // 0 is the idle configuration
  std::optional<std::size_t> user;
  Mode mode = Mode::decode_and_forward;
  std::vector<bool> alpha;
  double power = 0.0;
  double slack = 0.0;  // grid slack of the winning candidate
};

/// Per-subchannel Lagrangian maximized over every (user, mode, RRH set) with a
/// grid-searched power in [0, Pbar_k].
inline BruteScResult brute_force_sc(std::size_t n, const DualPoint& dual, const ChannelGains& gains,
                                    const SystemParams& params, double resolution = 1e-6) {
  BruteScResult best;
  best.alpha.assign(params.num_rrhs, false);
  const double scb = params.subchannel_bandwidth();
  for (std::size_t k = 0; k < params.num_users; ++k) {
    const double w = params.weight[k];
    const double mu = std::max(dual.mu[k], 1e-12);
    const double cap = params.power_budget[k];
    auto consider = [&](Mode mode, const std::vector<bool>& alpha, const std::function<double(double)>& f) {
      const GridMax g = grid_maximize(f, 0.0, cap, resolution);
      if (g.value > best.value) {
        best.value = g.value;
        best.user = k;
        best.mode = mode;
        best.alpha = alpha;
        best.power = g.arg;
        best.slack = g.slack;
      }
    };
    for (std::size_t m = 0; m < params.num_rrhs; ++m) {
      std::vector<bool> alpha(params.num_rrhs, false);
      alpha[m] = true;
      const double g = gains(m, k, n);
      const double sigma2 = params.noise_power[m];
      const double price = dual.lambda[m] / params.fronthaul_capacity[m];
      consider(Mode::decode_and_forward, alpha, [&](double p) {
        const double r = scb * std::log2(1.0 + g * p / sigma2);
        return (w - price) * r - mu * p;
      });
    }
    for (std::uint64_t code = 1; code < (std::uint64_t{1} << params.num_rrhs); ++code) {
      std::vector<bool> alpha(params.num_rrhs, false);
      double cost = 0.0;
      for (std::size_t m = 0; m < params.num_rrhs; ++m)
        if ((code >> m) & 1u) {
          alpha[m] = true;
          cost += 2.0 * scb * params.sq_bits[m] * dual.lambda[m] / params.fronthaul_capacity[m];
        }
      consider(Mode::forward_and_decode, alpha, [&](double p) {
        double snr = 0.0;
        for (std::size_t m = 0; m < params.num_rrhs; ++m) {
          if (!alpha[m]) continue;
          const double s = gains(m, k, n) * p;
          const double sigma2 = params.noise_power[m];
          const double q = 3.0 * (s + sigma2) * std::pow(2.0, -2.0 * params.sq_bits[m]);
          snr += s / (sigma2 + q);
        }
        return w * scb * std::log2(1.0 + snr) - cost - mu * p;
      });
    }
  }
  if (best.value <= 0.0) {
    BruteScResult idle;
    idle.alpha.assign(params.num_rrhs, false);
    idle.slack = best.slack;
    return idle;
  }
  return best;
}

}  // namespace cran::testing
