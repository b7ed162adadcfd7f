#pragma once

// Greedy construction of the quantizing RRH set for one (subchannel, user):
// starting from the empty set, repeatedly add the unselected RRH that yields
// the largest objective, as long as the objective strictly improves.
// At most M(M+1)/2 candidate sets are evaluated.

#include <cran/fad_subset.hpp>

#include <algorithm>
#include <vector>

namespace cran {

struct GreedyStep {
  std::size_t candidate;  // best unselected RRH of this round
  double value;           // objective with that RRH added
  bool accepted;
};

struct GreedyTrace {
  std::vector<GreedyStep> iterations;
  std::vector<std::size_t> final_subset;  // in order of selection
  double final_power = 0.0;
};

struct GreedyResult {
  std::vector<bool> subset;
  double power = 0.0;
  double value = 0.0;
  std::size_t candidate_evaluations = 0;
  GreedyTrace trace;
};

inline GreedyResult greedy_fad_selection(const FadSubsetEvaluator& eval) {
  const std::size_t rrhs = eval.num_rrhs();
  GreedyResult out;
  out.subset.assign(rrhs, false);

  std::vector<std::size_t> selected;
  std::vector<std::size_t> order;  // selection order
  std::vector<std::size_t> trial;
  selected.reserve(rrhs);
  double best_value = 0.0;
  double best_power = 0.0;

  for (std::size_t round = 0; round < rrhs; ++round) {
    bool found = false;
    std::size_t pick = 0;
    FadSubsetEvaluator::Result pick_result;
    for (std::size_t m = 0; m < rrhs; ++m) {
      if (out.subset[m]) continue;
      // Evaluate sets in index order so equal sets give bit-identical values
      // to the exhaustive search.
      trial = selected;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), m), m);
      const auto r = eval.evaluate(trial);
      ++out.candidate_evaluations;
      if (!found || r.value > pick_result.value) {
        found = true;
        pick = m;
        pick_result = r;
      }
    }
    const bool accept = pick_result.value > best_value;
    out.trace.iterations.push_back({pick, pick_result.value, accept});
    if (!accept) break;
    selected.insert(std::upper_bound(selected.begin(), selected.end(), pick), pick);
    order.push_back(pick);
    out.subset[pick] = true;
    best_value = pick_result.value;
    best_power = pick_result.power;
  }

  out.power = best_power;
  out.value = best_value;
  out.trace.final_subset = order;
  out.trace.final_power = best_power;
  return out;
}

inline GreedyResult greedy_fad_selection(std::size_t n, std::size_t k, const DualPoint& dual, const ChannelGains& gains,
                                         const SystemParams& params, SolveStats* stats = nullptr) {
  const FadSubsetEvaluator eval(n, k, dual, gains, params);
  GreedyResult r = greedy_fad_selection(eval);
  if (stats) stats->greedy_candidate_evaluations += r.candidate_evaluations;
  return r;
}

}  // namespace cran
