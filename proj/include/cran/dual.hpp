#pragma once

// Outer loop of the dual decomposition: evaluation of the dual function,
// central-cut ellipsoid minimization over (lambda, mu) >= 0, and recovery of a
// feasible primal allocation.

#include <cran/model.hpp>
#include <cran/persc.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cran {

struct DualEvaluation {
  double value = 0.0;  // g(lambda, mu)
  std::vector<ScSubproblemResult> per_sc;
  std::vector<double> subgrad_lambda;  // 1 - usage_m / Rbar_m
  std::vector<double> subgrad_mu;      // Pbar_k - sum_n p_kn
};

struct DualSolverOptions {
  FadSearch search = FadSearch::exhaustive;
  ModePolicy policy = ModePolicy::hybrid;
};

inline void check_dual(const DualPoint& dual, const SystemParams& params) {
  if (dual.lambda.size() != params.num_rrhs || dual.mu.size() != params.num_users)
    throw std::invalid_argument("DualPoint: dimensions do not match SystemParams");
  for (double v : dual.lambda)
    if (!(v >= 0.0)) throw std::invalid_argument("DualPoint: multipliers must be nonnegative");
  for (double v : dual.mu)
    if (!(v >= 0.0)) throw std::invalid_argument("DualPoint: multipliers must be nonnegative");
}

/// Dual function and a subgradient at one multiplier point. Each subchannel is
/// solved independently.
inline DualEvaluation evaluate_dual(const DualPoint& dual, const ChannelGains& gains, const SystemParams& params,
                                    const DualSolverOptions& opts = {}, SolveStats* stats = nullptr) {
  check_dual(dual, params);
  DualEvaluation ev;
  ev.per_sc.reserve(params.num_subchannels);
  std::vector<double> usage(params.num_rrhs, 0.0);
  std::vector<double> power(params.num_users, 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < params.num_subchannels; ++n) {
    ScSubproblemResult r = solve_sc(n, dual, gains, params, opts.search, opts.policy, stats);
    total += r.lagrangian_value;
    const ScDecision& d = r.decision;
    if (d.user) {
      power[*d.user] += d.power;
      for (std::size_t m = 0; m < params.num_rrhs; ++m) usage[m] += sc_fronthaul_load(m, n, d, gains, params);
    }
    ev.per_sc.push_back(std::move(r));
  }
  for (std::size_t m = 0; m < params.num_rrhs; ++m) total += dual.lambda[m];
  for (std::size_t k = 0; k < params.num_users; ++k) total += dual.mu[k] * params.power_budget[k];
  ev.value = total;
  ev.subgrad_lambda.resize(params.num_rrhs);
  ev.subgrad_mu.resize(params.num_users);
  for (std::size_t m = 0; m < params.num_rrhs; ++m)
    ev.subgrad_lambda[m] = 1.0 - usage[m] / params.fronthaul_capacity[m];
  for (std::size_t k = 0; k < params.num_users; ++k) ev.subgrad_mu[k] = params.power_budget[k] - power[k];
  return ev;
}

// ---------------------------------------------------------------------------
// Primal repair

/// Called after the power scaling pass and after every fronthaul repair step
/// with the current per-RRH fronthaul usage and per-user power usage.
using RepairObserver = std::function<void(const std::vector<double>& fronthaul, const std::vector<double>& power)>;

struct RepairSummary {
  std::size_t scaled_users = 0;
  std::size_t fronthaul_steps = 0;
};

/// Makes an allocation feasible. Users over budget have their powers scaled
/// down proportionally. Then, for each RRH over its fronthaul capacity (largest
/// relative violation first), its subchannels are visited from the lowest
/// achieved rate upwards: a DaF subchannel is switched off, a FaD subchannel
/// loses the over-capacity RRH with the smallest SNR contribution. Rates and
/// usages are recomputed after every step.
inline RepairSummary repair_allocation(Allocation& a, const ChannelGains& gains, const SystemParams& params,
                                       const RepairObserver& observer = {}) {
  RepairSummary summary;
  const std::size_t rrhs = params.num_rrhs;
  const std::size_t sc_count = params.num_subchannels;

  std::vector<double> power(params.num_users, 0.0);
  for (const auto& d : a.decisions)
    if (d.user) power[*d.user] += d.power;
  for (std::size_t k = 0; k < params.num_users; ++k) {
    if (power[k] <= params.power_budget[k] * (1.0 + feasibility_rel_tol)) continue;
    const double factor = params.power_budget[k] / power[k];
    for (auto& d : a.decisions)
      if (d.user == k) d.power *= factor;
    ++summary.scaled_users;
  }

  auto usage_of = [&](std::size_t m) {
    double u = 0.0;
    for (std::size_t n = 0; n < sc_count; ++n) u += sc_fronthaul_load(m, n, a.decisions[n], gains, params);
    return u;
  };
  auto power_usage = [&] {
    std::vector<double> p(params.num_users, 0.0);
    for (const auto& d : a.decisions)
      if (d.user) p[*d.user] += d.power;
    return p;
  };

  std::vector<double> usage(rrhs);
  for (std::size_t m = 0; m < rrhs; ++m) usage[m] = usage_of(m);
  if (observer) observer(usage, power_usage());

  auto over = [&](std::size_t m) { return usage[m] > params.fronthaul_capacity[m] * (1.0 + feasibility_rel_tol); };
  std::vector<std::size_t> order;
  for (std::size_t m = 0; m < rrhs; ++m)
    if (over(m)) order.push_back(m);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return usage[i] / params.fronthaul_capacity[i] > usage[j] / params.fronthaul_capacity[j];
  });

  for (std::size_t m : order) {
    while (over(m)) {
      std::size_t target = sc_count;
      double lowest = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < sc_count; ++n) {
        const ScDecision& d = a.decisions[n];
        if (!d.user || !d.alpha[m]) continue;
        const double rate = hybrid_rate(n, d, gains, params);
        if (rate < lowest) {
          lowest = rate;
          target = n;
        }
      }
      if (target == sc_count) break;  // usage is rounding noise on an idle RRH

      ScDecision& d = a.decisions[target];
      if (d.mode == Mode::decode_and_forward) {
        d = ScDecision::empty(rrhs);
      } else {
        std::size_t drop = rrhs;
        double weakest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rrhs; ++j) {
          if (!d.alpha[j] || !over(j)) continue;
          const double contrib = fad_partial_snr(gains(j, *d.user, target), d.power, params.noise_power[j],
                                                 params.sq_bits[j]);
          if (contrib < weakest) {
            weakest = contrib;
            drop = j;
          }
        }
        d.alpha[drop] = false;
        if (d.selected_count() == 0) d = ScDecision::empty(rrhs);
      }
      for (std::size_t j = 0; j < rrhs; ++j) usage[j] = usage_of(j);
      ++summary.fronthaul_steps;
      if (observer) observer(usage, power_usage());
    }
  }
  refresh_metrics(a, gains, params);
  return summary;
}

/// Allocation made of the subproblem maximizers of one dual evaluation, before
/// any repair.
inline Allocation assemble_allocation(const DualEvaluation& ev, const ChannelGains& gains, const SystemParams& params) {
  Allocation a;
  a.decisions.reserve(ev.per_sc.size());
  for (const auto& r : ev.per_sc) a.decisions.push_back(r.decision);
  refresh_metrics(a, gains, params);
  return a;
}

inline Allocation recover_primal(const DualPoint& dual, const ChannelGains& gains, const SystemParams& params,
                                 const DualSolverOptions& opts = {}) {
  const DualEvaluation ev = evaluate_dual(dual, gains, params, opts);
  Allocation a = assemble_allocation(ev, gains, params);
  repair_allocation(a, gains, params);
  return a;
}

// ---------------------------------------------------------------------------
// Ellipsoid method

enum class CutKind { objective, feasibility };

struct EllipsoidLogEntry {
  std::size_t iteration;
  CutKind cut;
  double value;  // dual value at the center; NaN for feasibility cuts
};

struct EllipsoidOptions {
  double initial_radius = 1e3;  // in scaled multiplier coordinates
  double tolerance = 1e-4;      // relative
  std::size_t max_iterations = 0;  // 0 selects ceil(8 d^2 ln(1/tolerance))
  DualSolverOptions solver;
  // Repair the subproblem maximizers at every evaluated center and keep the
  // best feasible allocation seen.
  bool track_primal = true;
  // Coordinate-ascent polish of the recovered allocation (pipeline only).
  bool polish_primal = true;
  std::size_t maximizer_pool_size = 4;
  std::function<void(const EllipsoidLogEntry&)> log;
};

/// Multipliers are searched in scaled coordinates x: lambda_m = Rbar_m x_m and
/// mu_k = s_k x_{M+k} with s_k = (B/N) K / (Pbar_k ln 2).
struct DualScaling {
  std::vector<double> lambda_scale;
  std::vector<double> mu_scale;

  explicit DualScaling(const SystemParams& params) {
    lambda_scale = params.fronthaul_capacity;
    mu_scale.resize(params.num_users);
    for (std::size_t k = 0; k < params.num_users; ++k)
      mu_scale[k] = params.subchannel_bandwidth() * static_cast<double>(params.num_users) /
                    (params.power_budget[k] * ln2);
  }

  std::size_t dim() const { return lambda_scale.size() + mu_scale.size(); }

  DualPoint to_dual(const Eigen::VectorXd& x) const {
    DualPoint d;
    const std::size_t rrhs = lambda_scale.size();
    d.lambda.resize(rrhs);
    d.mu.resize(mu_scale.size());
    for (std::size_t m = 0; m < rrhs; ++m) d.lambda[m] = lambda_scale[m] * x[static_cast<Eigen::Index>(m)];
    for (std::size_t k = 0; k < mu_scale.size(); ++k) d.mu[k] = mu_scale[k] * x[static_cast<Eigen::Index>(rrhs + k)];
    return d;
  }

  Eigen::VectorXd gradient(const DualEvaluation& ev) const {
    const std::size_t rrhs = lambda_scale.size();
    Eigen::VectorXd g(static_cast<Eigen::Index>(dim()));
    for (std::size_t m = 0; m < rrhs; ++m) g[static_cast<Eigen::Index>(m)] = lambda_scale[m] * ev.subgrad_lambda[m];
    for (std::size_t k = 0; k < mu_scale.size(); ++k)
      g[static_cast<Eigen::Index>(rrhs + k)] = mu_scale[k] * ev.subgrad_mu[k];
    return g;
  }
};

struct EllipsoidState {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;
  std::size_t iteration = 0;
  double best_value = std::numeric_limits<double>::infinity();
};

struct EllipsoidResult {
  DualPoint dual;                 // best evaluated point
  DualEvaluation evaluation;      // at that point
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  bool hit_iteration_limit = false;
  std::optional<Allocation> best_primal;  // when track_primal is set
  // Subproblem maximizers (before repair) of the centers whose repaired rates
  // were highest, one per distinct (user, mode, selection) pattern, best first.
  std::vector<std::vector<ScDecision>> maximizer_pool;
  EllipsoidState state;
};

namespace detail {

inline bool same_pattern(const std::vector<ScDecision>& a, const std::vector<ScDecision>& b) {
  for (std::size_t n = 0; n < a.size(); ++n)
    if (a[n].user != b[n].user || a[n].mode != b[n].mode || a[n].alpha != b[n].alpha) return false;
  return true;
}

struct MaximizerPool {
  struct Entry {
    std::vector<ScDecision> decisions;
    double repaired_rate;
  };
  std::size_t capacity;
  std::vector<Entry> entries;

  void offer(std::vector<ScDecision> decisions, double repaired_rate) {
    if (capacity == 0) return;
    for (Entry& e : entries)
      if (same_pattern(e.decisions, decisions)) {
        if (repaired_rate > e.repaired_rate) e = {std::move(decisions), repaired_rate};
        sort();
        return;
      }
    if (entries.size() == capacity && repaired_rate <= entries.back().repaired_rate) return;
    entries.push_back({std::move(decisions), repaired_rate});
    sort();
    if (entries.size() > capacity) entries.pop_back();
  }

 private:
  void sort() {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& x, const Entry& y) { return x.repaired_rate > y.repaired_rate; });
  }
};

}  // namespace detail

inline std::size_t default_ellipsoid_iterations(std::size_t dim, double tolerance) {
  const double d = static_cast<double>(dim);
  return static_cast<std::size_t>(std::ceil(8.0 * d * d * std::log(1.0 / tolerance)));
}

/// Minimizes the dual function over the nonnegative orthant with the
/// central-cut ellipsoid method. Infeasible centers get a cut on the most
/// negative coordinate; feasible centers are evaluated and cut with the
/// subgradient. Stops once sqrt(h' P h) <= tolerance * max(1, |g|).
inline EllipsoidResult ellipsoid_solve(const ChannelGains& gains, const SystemParams& params,
                                       const EllipsoidOptions& opts = {}) {
  params.validate();
  gains.validate(params);
  const DualScaling scaling(params);
  const auto dim = static_cast<Eigen::Index>(scaling.dim());
  const double d = static_cast<double>(dim);
  const std::size_t max_it =
      opts.max_iterations ? opts.max_iterations : default_ellipsoid_iterations(scaling.dim(), opts.tolerance);

  EllipsoidResult out;
  EllipsoidState& st = out.state;
  st.center = Eigen::VectorXd::Ones(dim);
  st.shape = Eigen::MatrixXd::Identity(dim, dim) * (opts.initial_radius * opts.initial_radius);
  double best_primal_rate = -1.0;
  detail::MaximizerPool pool{opts.maximizer_pool_size, {}};

  for (st.iteration = 0; st.iteration < max_it; ++st.iteration) {
    Eigen::VectorXd h;
    Eigen::Index worst;
    const double min_coord = st.center.minCoeff(&worst);
    if (min_coord < 0.0) {
      h = Eigen::VectorXd::Zero(dim);
      h[worst] = -1.0;
      if (opts.log) opts.log({st.iteration, CutKind::feasibility, std::numeric_limits<double>::quiet_NaN()});
    } else {
      const DualPoint dual = scaling.to_dual(st.center);
      DualEvaluation ev = evaluate_dual(dual, gains, params, opts.solver);
      ++out.evaluations;
      if (opts.log) opts.log({st.iteration, CutKind::objective, ev.value});
      h = scaling.gradient(ev);
      const double spread = std::sqrt(std::max(0.0, h.dot(st.shape * h)));
      const double value = ev.value;

      if (opts.track_primal) {
        Allocation a = assemble_allocation(ev, gains, params);
        std::vector<ScDecision> raw = a.decisions;
        repair_allocation(a, gains, params);
        pool.offer(std::move(raw), a.weighted_sum_rate);
        if (a.weighted_sum_rate > best_primal_rate) {
          best_primal_rate = a.weighted_sum_rate;
          out.best_primal = std::move(a);
        }
      }
      if (value < st.best_value) {
        st.best_value = value;
        out.dual = dual;
        out.evaluation = std::move(ev);
      }
      if (spread <= opts.tolerance * std::max(1.0, std::abs(value))) {
        out.converged = true;
        break;
      }
    }

    const Eigen::VectorXd ph = st.shape * h;
    const double hph = h.dot(ph);
    if (!(hph > 0.0)) {
      out.converged = true;  // zero subgradient: the center is optimal
      break;
    }
    const Eigen::VectorXd step = ph / std::sqrt(hph);
    st.center -= step / (d + 1.0);
    st.shape = (d * d / (d * d - 1.0)) * (st.shape - (2.0 / (d + 1.0)) * step * step.transpose());
    st.shape = 0.5 * (st.shape + st.shape.transpose());
    if (Eigen::LLT<Eigen::MatrixXd>(st.shape).info() != Eigen::Success) break;
  }
  out.iterations = st.iteration;
  out.hit_iteration_limit = !out.converged && st.iteration >= max_it;
  for (auto& entry : pool.entries) out.maximizer_pool.push_back(std::move(entry.decisions));
  return out;
}

/// Coordinate ascent on the subchannel decisions before repair: each
/// subchannel in turn tries every candidate decision, switching off, and a few
/// rescalings of its current power; a change is kept when the repaired
/// allocation's rate strictly improves.
/// Returns the repaired allocation of the final decisions.
/// DaF decision on SC n with its power set so the SC rate fills the fronthaul
/// left on its RRH by the other SCs, capped by the user's remaining budget.
inline std::optional<ScDecision> fit_daf_power(std::size_t n, const ScDecision& d, const std::vector<ScDecision>& raw,
                                               const ChannelGains& gains, const SystemParams& params) {
  if (!d.user || d.mode != Mode::decode_and_forward) return std::nullopt;
  const std::size_t k = *d.user;
  const auto it = std::find(d.alpha.begin(), d.alpha.end(), true);
  if (it == d.alpha.end()) return std::nullopt;
  const auto m = static_cast<std::size_t>(it - d.alpha.begin());
  double load = 0.0, spent = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (j == n) continue;
    load += sc_fronthaul_load(m, j, raw[j], gains, params);
    if (raw[j].user == k) spent += raw[j].power;
  }
  const double left = params.fronthaul_capacity[m] - load;
  const double room = params.power_budget[k] - spent;
  if (!(left > 0.0) || !(room > 0.0)) return std::nullopt;
  const double g = gains(m, k, n);
  const double snr = std::expm1(left / params.subchannel_bandwidth() * std::numbers::ln2);
  ScDecision fitted = d;
  fitted.power = std::min(snr * params.noise_power[m] / g, room);
  if (fitted.power == d.power) return std::nullopt;
  return fitted;
}

inline Allocation polish_allocation(std::vector<ScDecision> raw, const std::vector<std::vector<ScDecision>>& candidates,
                                    const ChannelGains& gains, const SystemParams& params,
                                    std::size_t max_passes = 16) {
  const std::size_t rrhs = params.num_rrhs;
  auto repaired = [&](const std::vector<ScDecision>& decisions) {
    Allocation a;
    a.decisions = decisions;
    repair_allocation(a, gains, params);
    return a;
  };
  Allocation best = repaired(raw);
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (std::size_t n = 0; n < raw.size(); ++n) {
      const ScDecision current = raw[n];
      std::vector<ScDecision> moves = candidates[n];
      moves.push_back(ScDecision::empty(rrhs));
      if (current.user)
        for (double factor : {2.0, 0.5, 1.25, 0.8}) {
          ScDecision scaled = current;
          scaled.power *= factor;
          moves.push_back(std::move(scaled));
        }
      const std::size_t base_moves = moves.size();
      for (std::size_t i = 0; i < base_moves; ++i)
        if (auto fitted = fit_daf_power(n, moves[i], raw, gains, params)) moves.push_back(std::move(*fitted));
      for (const ScDecision& move : moves) {
        raw[n] = move;
        Allocation a = repaired(raw);
        if (a.weighted_sum_rate > best.weighted_sum_rate * (1.0 + 1e-12)) {
          best = std::move(a);
          improved = true;
          break;
        }
        raw[n] = current;
      }
    }
    if (!improved) break;
  }
  return best;
}

/// Full dual pipeline: ellipsoid search, maximizers at the best multipliers,
/// repair. Returns the better of that allocation and the best repaired
/// allocation tracked during the search, optionally improved by
/// polish_allocation.
struct DualPipelineResult {
  Allocation allocation;
  EllipsoidResult ellipsoid;
};

inline DualPipelineResult solve_dual_pipeline(const ChannelGains& gains, const SystemParams& params,
                                              const EllipsoidOptions& opts = {}) {
  DualPipelineResult out;
  out.ellipsoid = ellipsoid_solve(gains, params, opts);
  if (out.ellipsoid.evaluations == 0) {
    out.allocation = empty_allocation(params);
    return out;
  }
  const Allocation maximizers = assemble_allocation(out.ellipsoid.evaluation, gains, params);
  out.allocation = maximizers;
  repair_allocation(out.allocation, gains, params);
  if (out.ellipsoid.best_primal && out.ellipsoid.best_primal->weighted_sum_rate > out.allocation.weighted_sum_rate)
    out.allocation = *out.ellipsoid.best_primal;
  if (!opts.polish_primal) return out;

  // Maximizers with the fronthaul priced at zero give polish a starting point
  // on SCs that the final fronthaul prices switch off entirely.
  DualPoint unpriced = out.ellipsoid.dual;
  std::fill(unpriced.lambda.begin(), unpriced.lambda.end(), 0.0);
  std::vector<std::vector<ScDecision>> candidates(params.num_subchannels);
  for (std::size_t n = 0; n < params.num_subchannels; ++n) {
    candidates[n] = sc_candidates(n, out.ellipsoid.dual, gains, params, opts.solver.search, opts.solver.policy);
    for (ScDecision& d : sc_candidates(n, unpriced, gains, params, opts.solver.search, opts.solver.policy))
      if (!d.is_empty()) candidates[n].push_back(std::move(d));
    if (out.ellipsoid.best_primal && !out.ellipsoid.best_primal->decisions[n].is_empty())
      candidates[n].push_back(out.ellipsoid.best_primal->decisions[n]);
  }
  std::vector<std::vector<ScDecision>> starts{maximizers.decisions, out.allocation.decisions};
  for (const auto& pooled : out.ellipsoid.maximizer_pool) starts.push_back(pooled);
  for (const auto& start : starts) {
    Allocation a = polish_allocation(start, candidates, gains, params);
    if (a.weighted_sum_rate > out.allocation.weighted_sum_rate) out.allocation = std::move(a);
  }
  return out;
}

}  // namespace cran
