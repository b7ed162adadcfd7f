#pragma once

#include <cran/model.hpp>
#include <cran/power.hpp>

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace cran {

/// Power prices below this are raised to it before any per-subchannel solve;
/// the power caps keep the subproblems bounded either way.
inline constexpr double min_power_price = 1e-12;

/// Work counters for the complexity checks.
struct SolveStats {
  std::uint64_t fad_subset_evaluations = 0;      // (user, RRH set) pairs, empty set included
  std::uint64_t greedy_candidate_evaluations = 0;
  std::uint64_t daf_pair_evaluations = 0;
};

/// FaD objective f(A) = omega r^Q(A, p*(A)) - (2B/N) sum_{m in A} beta_m lambda_m / Rbar_m - mu p*(A)
/// for one (subchannel, user), with p*(A) optimal on [0, Pbar_k].
class FadSubsetEvaluator {
 public:
  struct Result {
    double value = 0.0;
    double power = 0.0;
  };

  FadSubsetEvaluator(std::size_t n, std::size_t k, const DualPoint& dual, const ChannelGains& gains,
                     const SystemParams& params)
      : sc_bandwidth_(params.subchannel_bandwidth()),
        weight_(params.weight[k]),
        price_(std::max(dual.mu[k], min_power_price)),
        cap_(params.power_budget[k]) {
    links_.reserve(params.num_rrhs);
    cost_.reserve(params.num_rrhs);
    for (std::size_t m = 0; m < params.num_rrhs; ++m) {
      links_.push_back(QuantizedLink::make(gains(m, k, n), params.noise_power[m], params.sq_bits[m]));
      cost_.push_back(params.quantized_sc_rate(m) * dual.lambda[m] / params.fronthaul_capacity[m]);
      bits_.push_back(params.sq_bits[m]);
    }
    buffer_.reserve(params.num_rrhs);
  }

  std::size_t num_rrhs() const { return links_.size(); }
  double fronthaul_cost(std::size_t m) const { return cost_[m]; }

  /// Value and optimal power for a nonempty RRH set.
  Result evaluate(std::span<const std::size_t> members) const {
    buffer_.clear();
    double cost = 0.0;
    for (std::size_t m : members) {
      buffer_.push_back(links_[m]);
      cost += cost_[m];
    }
    const FadPowerObjective f{buffer_, sc_bandwidth_, weight_, price_};
    double p = 0.0;
    if (members.size() == 1) {
      const auto& l = links_[members[0]];
      p = std::min(fad_power_single_rrh(l.gain, l.noise, bits_[members[0]], weight_, price_, sc_bandwidth_), cap_);
    } else {
      p = fad_power_line_search(buffer_, sc_bandwidth_, weight_, price_, cap_);
    }
    return {f(p) - cost, p};
  }

 private:
  double sc_bandwidth_;
  double weight_;
  double price_;
  double cap_;
  std::vector<QuantizedLink> links_;
  std::vector<double> cost_;
  std::vector<int> bits_;
  mutable std::vector<QuantizedLink> buffer_;
};

}  // namespace cran
