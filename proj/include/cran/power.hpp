#pragma once

// Optimal transmit power for one (user, subchannel) pair once the processing
// mode and the serving RRH set are fixed. These are the building blocks of the
// per-subchannel dual subproblem.

#include <cran/line_search.hpp>
#include <cran/model.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace cran {

/// One quantizing RRH as seen by a fixed (user, subchannel) pair.
struct QuantizedLink {
  double gain = 0.0;
  double noise = 0.0;
  double inv_theta = 0.0;  // 3 * 2^(-2 beta)

  static QuantizedLink make(double gain, double noise, int bits) {
    return {gain, noise, 3.0 * std::ldexp(1.0, -2 * bits)};
  }

  double snr(double p) const {
    const double s = gain * p;
    return s / (noise + (s + noise) * inv_theta);
  }
  /// d snr / dp
  double snr_slope(double p) const {
    const double base = noise * (1.0 + inv_theta);
    const double den = base + gain * inv_theta * p;
    return gain * base / (den * den);
  }
};

/// Weighted FaD rate minus power price, omega * r^Q(p) - mu * p, for a fixed
/// set of quantizing RRHs. The fronthaul price of the set is not included.
struct FadPowerObjective {
  std::span<const QuantizedLink> links;
  double sc_bandwidth;
  double weight;
  double price;

  double snr(double p) const {
    double s = 0.0;
    for (const auto& l : links) s += l.snr(p);
    return s;
  }
  double operator()(double p) const { return weight * sc_bandwidth * std::log2(1.0 + snr(p)) - price * p; }
  double slope(double p) const {
    double s = 0.0, ds = 0.0;
    for (const auto& l : links) {
      s += l.snr(p);
      ds += l.snr_slope(p);
    }
    return weight * sc_bandwidth / ln2 * ds / (1.0 + s) - price;
  }
};

/// Gain-to-noise threshold below which single-RRH FaD allocates no power.
inline double fad_single_rrh_threshold(int bits, double weight, double price, double sc_bandwidth) {
  const double theta = std::ldexp(1.0, 2 * bits) / 3.0;
  return price * ln2 / (weight * sc_bandwidth) * (1.0 + 1.0 / theta);
}

/// Closed-form optimal power for FaD through a single RRH. The result is zero
/// exactly when gain/noise <= fad_single_rrh_threshold(...).
inline double fad_power_single_rrh(double gain, double noise, int bits, double weight, double price,
                                   double sc_bandwidth) {
  if (!(price > 0.0)) throw std::domain_error("fad_power_single_rrh: zero power price leaves the subproblem unbounded");
  if (weight <= 0.0 || gain <= 0.0) return 0.0;
  const double a = gain / noise;
  if (a <= fad_single_rrh_threshold(bits, weight, price, sc_bandwidth)) return 0.0;
  const double theta = std::ldexp(1.0, 2 * bits) / 3.0;
  const double drive = weight * sc_bandwidth * a * theta / (price * ln2);
  const double excess = drive - (theta + 1.0);
  if (!(excess > 0.0)) return 0.0;
  const double t2 = theta + 2.0;
  const double x = 4.0 * excess / (t2 * t2);
  // sqrt(1 + x) - 1 written to avoid cancellation when theta is large
  return t2 / (2.0 * a) * (x / (std::sqrt(1.0 + x) + 1.0));
}

/// Maximizer of omega * r^Q(p) - mu * p over [0, cap] for an arbitrary
/// nonempty set of quantizing RRHs (concave objective, golden-section search).
inline double fad_power_line_search(std::span<const QuantizedLink> links, double sc_bandwidth, double weight,
                                    double price, double cap) {
  if (links.empty()) throw std::logic_error("fad_power_line_search: empty RRH set");
  if (!(cap > 0.0)) throw std::logic_error("fad_power_line_search: power cap must be positive");
  const FadPowerObjective f{links, sc_bandwidth, weight, price};
  if (f.slope(0.0) <= 0.0) return 0.0;
  if (f.slope(cap) >= 0.0) return cap;
  GoldenSectionOptions opts;
  opts.abs_tol = 1e-8 * cap;
  return golden_section_maximize(f, 0.0, cap, opts);
}

/// Water-filling power for DaF by one RRH:
/// [ sc_bandwidth / (mu ln2) * (omega - lambda/Rbar) - noise/gain ]^+.
inline double daf_power(double gain, double noise, double weight, double lambda, double capacity, double price,
                        double sc_bandwidth) {
  if (gain <= 0.0) return 0.0;
  const double level_weight = weight - lambda / capacity;
  if (level_weight <= 0.0) return 0.0;
  if (!(price > 0.0)) throw std::domain_error("daf_power: zero power price leaves the subproblem unbounded");
  return std::max(0.0, sc_bandwidth / (price * ln2) * level_weight - noise / gain);
}

}  // namespace cran
