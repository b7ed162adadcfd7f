#pragma once

// System model for uplink OFDMA cloud-RAN with hybrid decoding: network
// parameters, channel power gains, per-subchannel decisions and the rate and
// fronthaul formulas every solver builds on.
//
// Units: powers in watts, rates in bits/s, bandwidth in Hz. Decibel values
// only appear at the configuration boundary (see dbm_to_watts).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cran {

inline constexpr double ln2 = std::numbers::ln2;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Static description of one cluster: dimensions, quantizer resolutions,
/// fronthaul capacities, power budgets, rate weights and noise powers.
struct SystemParams {
  std::size_t num_rrhs = 0;
  std::size_t num_users = 0;
  std::size_t num_subchannels = 0;
  double bandwidth = 0.0;                 // Hz, shared by all subchannels
  std::vector<int> sq_bits;               // per RRH, bits per I/Q component
  std::vector<double> fronthaul_capacity; // per RRH, bits/s
  std::vector<double> power_budget;       // per user, watts
  std::vector<double> weight;             // per user
  std::vector<double> noise_power;        // per RRH, watts per subchannel

  double subchannel_bandwidth() const { return bandwidth / static_cast<double>(num_subchannels); }

  /// Saturation level 2^(2*beta)/3 of one RRH's quantized SNR contribution.
  double theta(std::size_t m) const { return std::ldexp(1.0, 2 * sq_bits[m]) / 3.0; }

  /// Fronthaul rate needed to forward one quantized subchannel from RRH m.
  double quantized_sc_rate(std::size_t m) const {
    return 2.0 * subchannel_bandwidth() * static_cast<double>(sq_bits[m]);
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("SystemParams: " + what); };
    if (num_rrhs == 0 || num_users == 0 || num_subchannels == 0) fail("dimensions must be positive");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) fail("bandwidth must be positive");
    if (sq_bits.size() != num_rrhs || fronthaul_capacity.size() != num_rrhs || noise_power.size() != num_rrhs)
      fail("per-RRH vectors must have num_rrhs entries");
    if (power_budget.size() != num_users || weight.size() != num_users)
      fail("per-user vectors must have num_users entries");
    for (std::size_t m = 0; m < num_rrhs; ++m) {
      if (sq_bits[m] < 1 || sq_bits[m] > 500) fail("quantizer bits must be in [1, 500]");
      if (!(fronthaul_capacity[m] > 0.0)) fail("fronthaul capacity must be positive");
      if (!(noise_power[m] > 0.0) || !std::isfinite(noise_power[m])) fail("noise power must be positive");
    }
    for (std::size_t k = 0; k < num_users; ++k) {
      if (!(power_budget[k] > 0.0) || !std::isfinite(power_budget[k])) fail("power budget must be positive");
      if (!(weight[k] >= 0.0) || !std::isfinite(weight[k])) fail("weights must be nonnegative");
    }
  }

  /// Homogeneous network: every RRH and user share the same scalars.
  static SystemParams uniform(std::size_t rrhs, std::size_t users, std::size_t subchannels, double bandwidth_hz,
                              int bits, double fronthaul_bps, double budget_w, double noise_w, double w = 1.0) {
    SystemParams p;
    p.num_rrhs = rrhs;
    p.num_users = users;
    p.num_subchannels = subchannels;
    p.bandwidth = bandwidth_hz;
    p.sq_bits.assign(rrhs, bits);
    p.fronthaul_capacity.assign(rrhs, fronthaul_bps);
    p.power_budget.assign(users, budget_w);
    p.weight.assign(users, w);
    p.noise_power.assign(rrhs, noise_w);
    return p;
  }
};

/// Dense |h|^2 array indexed (rrh, user, subchannel), row-major.
class ChannelGains {
 public:
  ChannelGains() = default;
  ChannelGains(std::size_t rrhs, std::size_t users, std::size_t subchannels, double fill = 0.0)
      : rrhs_(rrhs), users_(users), subchannels_(subchannels), data_(rrhs * users * subchannels, fill) {}

  double operator()(std::size_t m, std::size_t k, std::size_t n) const { return data_[index(m, k, n)]; }
  double& operator()(std::size_t m, std::size_t k, std::size_t n) { return data_[index(m, k, n)]; }

  std::size_t num_rrhs() const { return rrhs_; }
  std::size_t num_users() const { return users_; }
  std::size_t num_subchannels() const { return subchannels_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void validate(const SystemParams& params) const {
    if (rrhs_ != params.num_rrhs || users_ != params.num_users || subchannels_ != params.num_subchannels)
      throw std::invalid_argument("ChannelGains: dimensions do not match SystemParams");
    for (double g : data_)
      if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("ChannelGains: gains must be finite and >= 0");
  }

 private:
  std::size_t index(std::size_t m, std::size_t k, std::size_t n) const { return (m * users_ + k) * subchannels_ + n; }

  std::size_t rrhs_ = 0;
  std::size_t users_ = 0;
  std::size_t subchannels_ = 0;
  std::vector<double> data_;
};

/// Multipliers of the fronthaul (lambda, per RRH) and power (mu, per user)
/// constraints.
struct DualPoint {
  std::vector<double> lambda;
  std::vector<double> mu;

  static DualPoint zeros(std::size_t rrhs, std::size_t users) {
    return {std::vector<double>(rrhs, 0.0), std::vector<double>(users, 0.0)};
  }
};

enum class Mode : std::uint8_t {
  forward_and_decode = 0,  // RRHs quantize, the CP combines and decodes
  decode_and_forward = 1,  // one RRH decodes locally and forwards the bits
};

/// What happens on one subchannel.
struct ScDecision {
  Mode mode = Mode::decode_and_forward;
  std::vector<bool> alpha;  // RRH participation, one flag per RRH
  std::optional<std::size_t> user;
  double power = 0.0;

  static ScDecision empty(std::size_t rrhs) { return {Mode::decode_and_forward, std::vector<bool>(rrhs, false), {}, 0.0}; }

  std::size_t selected_count() const {
    std::size_t c = 0;
    for (bool a : alpha) c += a ? 1 : 0;
    return c;
  }
  bool is_empty() const { return !user.has_value(); }
};

struct Allocation {
  std::vector<ScDecision> decisions;
  double weighted_sum_rate = 0.0;
  std::vector<double> fronthaul_usage;
  std::vector<double> power_usage;
};

// ---------------------------------------------------------------------------
// Rate formulas

/// Variance of the scalar quantization error at an RRH.
inline double quant_noise_variance(double gain, double power, double noise, int bits) {
  return 3.0 * (gain * power + noise) * std::ldexp(1.0, -2 * bits);
}

/// SNR contribution of one quantizing RRH at the CP.
inline double fad_partial_snr(double gain, double power, double noise, int bits) {
  const double signal = gain * power;
  return signal / (noise + quant_noise_variance(gain, power, noise, bits));
}

inline double daf_rate(double gain, double power, double noise, double sc_bandwidth) {
  return sc_bandwidth * std::log2(1.0 + gain * power / noise);
}

/// Combined SNR of the quantized signals forwarded by the RRHs flagged in
/// alpha, for user k on subchannel n.
inline double fad_snr(const std::vector<bool>& alpha, std::size_t k, std::size_t n, double power,
                      const ChannelGains& gains, const SystemParams& params) {
  double snr = 0.0;
  for (std::size_t m = 0; m < alpha.size(); ++m)
    if (alpha[m]) snr += fad_partial_snr(gains(m, k, n), power, params.noise_power[m], params.sq_bits[m]);
  return snr;
}

inline double fad_rate(const std::vector<bool>& alpha, std::size_t k, std::size_t n, double power,
                       const ChannelGains& gains, const SystemParams& params) {
  return params.subchannel_bandwidth() * std::log2(1.0 + fad_snr(alpha, k, n, power, gains, params));
}

/// Throws std::logic_error when the decision breaks its structural invariants.
inline void check_decision(const ScDecision& d, const SystemParams& params) {
  if (d.alpha.size() != params.num_rrhs) throw std::logic_error("ScDecision: alpha has wrong length");
  if (!(d.power >= 0.0) || !std::isfinite(d.power)) throw std::logic_error("ScDecision: power must be finite and >= 0");
  if (d.mode == Mode::decode_and_forward && d.selected_count() > 1)
    throw std::logic_error("ScDecision: decode-and-forward allows at most one RRH");
  if (!d.user) {
    if (d.power != 0.0 || d.selected_count() != 0) throw std::logic_error("ScDecision: unassigned subchannel must be idle");
  } else if (*d.user >= params.num_users) {
    throw std::logic_error("ScDecision: user index out of range");
  }
  if (d.power == 0.0 && d.selected_count() != 0) throw std::logic_error("ScDecision: zero power requires no RRH");
}

/// Achievable rate on subchannel n under a hybrid decision.
inline double hybrid_rate(std::size_t n, const ScDecision& d, const ChannelGains& gains, const SystemParams& params) {
  check_decision(d, params);
  if (!d.user) return 0.0;
  const std::size_t k = *d.user;
  if (d.mode == Mode::decode_and_forward) {
    for (std::size_t m = 0; m < params.num_rrhs; ++m)
      if (d.alpha[m]) return daf_rate(gains(m, k, n), d.power, params.noise_power[m], params.subchannel_bandwidth());
    return 0.0;
  }
  return fad_rate(d.alpha, k, n, d.power, gains, params);
}

/// Fronthaul rate RRH m spends on subchannel n.
inline double sc_fronthaul_load(std::size_t m, std::size_t n, const ScDecision& d, const ChannelGains& gains,
                                const SystemParams& params) {
  if (!d.user || !d.alpha[m]) return 0.0;
  if (d.mode == Mode::decode_and_forward)
    return daf_rate(gains(m, *d.user, n), d.power, params.noise_power[m], params.subchannel_bandwidth());
  return params.quantized_sc_rate(m);
}

inline double fronthaul_usage(const Allocation& a, std::size_t m, const ChannelGains& gains, const SystemParams& params) {
  double total = 0.0;
  for (std::size_t n = 0; n < a.decisions.size(); ++n) total += sc_fronthaul_load(m, n, a.decisions[n], gains, params);
  return total;
}

// ---------------------------------------------------------------------------
// Objective and feasibility

struct Violation {
  enum class Kind { fronthaul, power } kind;
  std::size_t index;  // RRH for fronthaul, user for power
  double slack;       // capacity minus usage; negative when violated
};

struct AllocationReport {
  double weighted_sum_rate = 0.0;
  double sum_rate = 0.0;
  std::vector<double> fronthaul_usage;
  std::vector<double> power_usage;
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
};

inline constexpr double feasibility_rel_tol = 1e-9;

/// Recomputes every metric of an allocation from its decisions and lists the
/// violated coupling constraints.
inline AllocationReport evaluate_allocation(const Allocation& a, const ChannelGains& gains, const SystemParams& params) {
  if (a.decisions.size() != params.num_subchannels)
    throw std::logic_error("Allocation: expected one decision per subchannel");
  AllocationReport r;
  r.fronthaul_usage.assign(params.num_rrhs, 0.0);
  r.power_usage.assign(params.num_users, 0.0);
  for (std::size_t n = 0; n < params.num_subchannels; ++n) {
    const ScDecision& d = a.decisions[n];
    const double rate = hybrid_rate(n, d, gains, params);
    if (!d.user) continue;
    r.sum_rate += rate;
    r.weighted_sum_rate += params.weight[*d.user] * rate;
    r.power_usage[*d.user] += d.power;
    for (std::size_t m = 0; m < params.num_rrhs; ++m) r.fronthaul_usage[m] += sc_fronthaul_load(m, n, d, gains, params);
  }
  for (std::size_t m = 0; m < params.num_rrhs; ++m) {
    const double cap = params.fronthaul_capacity[m];
    if (r.fronthaul_usage[m] > cap * (1.0 + feasibility_rel_tol))
      r.violations.push_back({Violation::Kind::fronthaul, m, cap - r.fronthaul_usage[m]});
  }
  for (std::size_t k = 0; k < params.num_users; ++k) {
    const double cap = params.power_budget[k];
    if (r.power_usage[k] > cap * (1.0 + feasibility_rel_tol))
      r.violations.push_back({Violation::Kind::power, k, cap - r.power_usage[k]});
  }
  return r;
}

/// Fills the derived metric fields of an allocation in place.
inline AllocationReport refresh_metrics(Allocation& a, const ChannelGains& gains, const SystemParams& params) {
  AllocationReport r = evaluate_allocation(a, gains, params);
  a.weighted_sum_rate = r.weighted_sum_rate;
  a.fronthaul_usage = r.fronthaul_usage;
  a.power_usage = r.power_usage;
  return r;
}

inline Allocation empty_allocation(const SystemParams& params) {
  Allocation a;
  a.decisions.assign(params.num_subchannels, ScDecision::empty(params.num_rrhs));
  a.fronthaul_usage.assign(params.num_rrhs, 0.0);
  a.power_usage.assign(params.num_users, 0.0);
  return a;
}

}  // namespace cran
