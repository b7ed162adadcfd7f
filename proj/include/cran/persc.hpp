#pragma once

// Exact solution of the per-subchannel dual subproblem: best FaD configuration
// (user, quantizing RRH set, power), best DaF configuration (user, decoding
// RRH, power), then the mode with the larger Lagrangian contribution.

#include <cran/fad_subset.hpp>
#include <cran/greedy.hpp>
#include <cran/model.hpp>
#include <cran/power.hpp>

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cran {

enum class FadSearch { exhaustive, greedy };

/// Modes a subchannel may use; the benchmarks pin every subchannel to one.
enum class ModePolicy { hybrid, fad_only, daf_only };

/// Exhaustive RRH-set enumeration is refused above this many RRHs.
inline constexpr std::size_t max_exhaustive_rrhs = 20;

struct FadChoice {
  std::optional<std::size_t> user;
  std::vector<bool> subset;
  double power = 0.0;
  double value = 0.0;
};

struct DafChoice {
  std::optional<std::size_t> user;
  std::size_t rrh = 0;
  double power = 0.0;
  double value = 0.0;
};

struct ScSubproblemResult {
  ScDecision decision;
  double lagrangian_value = 0.0;  // max(fad_value, daf_value, 0)
  double fad_value = 0.0;
  double daf_value = 0.0;
};

/// Best (RRH set, power) for a fixed user by enumerating all 2^M sets in
/// lexicographic order of the participation vector; ties keep the earlier set.
inline FadChoice exhaustive_fad_for_user(const FadSubsetEvaluator& eval, SolveStats* stats = nullptr) {
  const std::size_t rrhs = eval.num_rrhs();
  if (rrhs > max_exhaustive_rrhs) throw std::invalid_argument("exhaustive FaD search: too many RRHs, use greedy");
  FadChoice best;
  best.subset.assign(rrhs, false);
  std::uint64_t best_code = 0;
  std::vector<std::size_t> members;
  members.reserve(rrhs);
  const std::uint64_t count = std::uint64_t{1} << rrhs;
  if (stats) stats->fad_subset_evaluations += 1;  // the empty set, value 0
  for (std::uint64_t code = 1; code < count; ++code) {
    // RRH 0 is the most significant bit, so increasing codes are increasing
    // participation vectors in lexicographic order.
    members.clear();
    for (std::size_t m = 0; m < rrhs; ++m)
      if ((code >> (rrhs - 1 - m)) & 1u) members.push_back(m);
    const auto r = eval.evaluate(members);
    if (stats) stats->fad_subset_evaluations += 1;
    if (r.value > best.value) {
      best.value = r.value;
      best.power = r.power;
      best_code = code;
    }
  }
  for (std::size_t m = 0; m < rrhs; ++m) best.subset[m] = ((best_code >> (rrhs - 1 - m)) & 1u) != 0;
  return best;
}

/// Best FaD configuration on subchannel n over all users and RRH sets.
inline FadChoice solve_fad_subproblem(std::size_t n, const DualPoint& dual, const ChannelGains& gains,
                                      const SystemParams& params, FadSearch search = FadSearch::exhaustive,
                                      SolveStats* stats = nullptr) {
  FadChoice best;
  best.subset.assign(params.num_rrhs, false);
  for (std::size_t k = 0; k < params.num_users; ++k) {
    const FadSubsetEvaluator eval(n, k, dual, gains, params);
    FadChoice c;
    if (search == FadSearch::exhaustive) {
      c = exhaustive_fad_for_user(eval, stats);
    } else {
      GreedyResult g = greedy_fad_selection(eval);
      if (stats) stats->greedy_candidate_evaluations += g.candidate_evaluations;
      c.subset = std::move(g.subset);
      c.power = g.power;
      c.value = g.value;
    }
    if (c.value > best.value) {
      best = std::move(c);
      best.user = k;
    }
  }
  return best;
}

/// Best DaF configuration on subchannel n over all (user, RRH) pairs with
/// water-filling power capped at the user's budget.
inline DafChoice solve_daf_subproblem(std::size_t n, const DualPoint& dual, const ChannelGains& gains,
                                      const SystemParams& params, SolveStats* stats = nullptr) {
  DafChoice best;
  const double scb = params.subchannel_bandwidth();
  for (std::size_t k = 0; k < params.num_users; ++k) {
    const double price = std::max(dual.mu[k], min_power_price);
    for (std::size_t m = 0; m < params.num_rrhs; ++m) {
      if (stats) stats->daf_pair_evaluations += 1;
      const double g = gains(m, k, n);
      const double noise = params.noise_power[m];
      const double cap = params.fronthaul_capacity[m];
      const double p = std::min(daf_power(g, noise, params.weight[k], dual.lambda[m], cap, price, scb),
                                params.power_budget[k]);
      if (p <= 0.0) continue;
      const double value = (params.weight[k] - dual.lambda[m] / cap) * daf_rate(g, p, noise, scb) - price * p;
      if (value > best.value) {
        best.user = k;
        best.rrh = m;
        best.power = p;
        best.value = value;
      }
    }
  }
  return best;
}

/// Mode selection rule: FaD only when strictly better, so ties go to DaF.
inline Mode preferred_mode(double fad_value, double daf_value) {
  return fad_value > daf_value ? Mode::forward_and_decode : Mode::decode_and_forward;
}

/// Solves the dual subproblem of subchannel n. A tie between the two modes
/// selects DaF; when neither mode is profitable the subchannel stays idle.
inline ScSubproblemResult solve_sc(std::size_t n, const DualPoint& dual, const ChannelGains& gains,
                                   const SystemParams& params, FadSearch search = FadSearch::exhaustive,
                                   ModePolicy policy = ModePolicy::hybrid, SolveStats* stats = nullptr) {
  ScSubproblemResult out;
  out.decision = ScDecision::empty(params.num_rrhs);

  FadChoice fad;
  DafChoice daf;
  if (policy != ModePolicy::daf_only) {
    fad = solve_fad_subproblem(n, dual, gains, params, search, stats);
    out.fad_value = fad.value;
  }
  if (policy != ModePolicy::fad_only) {
    daf = solve_daf_subproblem(n, dual, gains, params, stats);
    out.daf_value = daf.value;
  }

  if (out.fad_value <= 0.0 && out.daf_value <= 0.0) return out;

  if (preferred_mode(out.fad_value, out.daf_value) == Mode::forward_and_decode) {
    out.decision.mode = Mode::forward_and_decode;
    out.decision.alpha = std::move(fad.subset);
    out.decision.user = fad.user;
    out.decision.power = fad.power;
    out.lagrangian_value = fad.value;
  } else {
    out.decision.mode = Mode::decode_and_forward;
    out.decision.alpha[daf.rrh] = true;
    out.decision.user = daf.user;
    out.decision.power = daf.power;
    out.lagrangian_value = daf.value;
  }
  return out;
}

/// Per-user best decisions of each allowed mode on subchannel n: for every
/// user its best FaD set and its best DaF RRH, whatever their sign. Used as the
/// move set of the primal polish.
inline std::vector<ScDecision> sc_candidates(std::size_t n, const DualPoint& dual, const ChannelGains& gains,
                                             const SystemParams& params, FadSearch search = FadSearch::exhaustive,
                                             ModePolicy policy = ModePolicy::hybrid) {
  std::vector<ScDecision> out;
  const double scb = params.subchannel_bandwidth();
  for (std::size_t k = 0; k < params.num_users; ++k) {
    if (policy != ModePolicy::daf_only) {
      const FadSubsetEvaluator eval(n, k, dual, gains, params);
      std::vector<bool> subset;
      double power = 0.0;
      if (search == FadSearch::exhaustive) {
        FadChoice c = exhaustive_fad_for_user(eval);
        subset = std::move(c.subset);
        power = c.power;
      } else {
        GreedyResult g = greedy_fad_selection(eval);
        subset = std::move(g.subset);
        power = g.power;
      }
      ScDecision d{Mode::forward_and_decode, std::move(subset), k, power};
      if (power > 0.0 && d.selected_count() > 0) out.push_back(std::move(d));
    }
    if (policy != ModePolicy::fad_only) {
      const double price = std::max(dual.mu[k], min_power_price);
      std::optional<std::size_t> best_rrh;
      double best_value = -std::numeric_limits<double>::infinity();
      double best_power = 0.0;
      for (std::size_t m = 0; m < params.num_rrhs; ++m) {
        const double g = gains(m, k, n);
        const double noise = params.noise_power[m];
        const double cap = params.fronthaul_capacity[m];
        const double p = std::min(daf_power(g, noise, params.weight[k], dual.lambda[m], cap, price, scb),
                                  params.power_budget[k]);
        if (p <= 0.0) continue;
        const double value = (params.weight[k] - dual.lambda[m] / cap) * daf_rate(g, p, noise, scb) - price * p;
        if (value > best_value) {
          best_value = value;
          best_rrh = m;
          best_power = p;
        }
      }
      if (best_rrh) {
        ScDecision d{Mode::decode_and_forward, std::vector<bool>(params.num_rrhs, false), k, best_power};
        d.alpha[*best_rrh] = true;
        out.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace cran
