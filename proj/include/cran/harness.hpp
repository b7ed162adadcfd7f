#pragma once

// Experiment orchestration: resource-allocation schemes, clustered solving of
// large networks, parameter sweeps with paired random draws, and a brute-force
// oracle for tiny instances.

#include <cran/channel.hpp>
#include <cran/dual.hpp>
#include <cran/model.hpp>
#include <cran/persc.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cran {

enum class Scheme { hybrid_optimal, hybrid_greedy, all_fad, all_daf, dual_bound };
enum class SweepVariable { beta, pbar_dbm, rbar_mbps };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::hybrid_optimal: return "hybrid_optimal";
    case Scheme::hybrid_greedy: return "hybrid_greedy";
    case Scheme::all_fad: return "all_fad";
    case Scheme::all_daf: return "all_daf";
    case Scheme::dual_bound: return "dual_bound";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  for (Scheme v : {Scheme::hybrid_optimal, Scheme::hybrid_greedy, Scheme::all_fad, Scheme::all_daf, Scheme::dual_bound})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::beta: return "beta";
    case SweepVariable::pbar_dbm: return "pbar_dbm";
    case SweepVariable::rbar_mbps: return "rbar_mbps";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& s) {
  for (SweepVariable v : {SweepVariable::beta, SweepVariable::pbar_dbm, SweepVariable::rbar_mbps})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown sweep variable '" + s + "'");
}

inline const char* to_string(Preset p) {
  switch (p) {
    case Preset::small: return "small";
    case Preset::large: return "large";
    case Preset::custom: return "custom";
  }
  return "?";
}

inline Preset parse_preset(const std::string& s) {
  for (Preset p : {Preset::small, Preset::large, Preset::custom})
    if (s == to_string(p)) return p;
  throw std::invalid_argument("unknown preset '" + s + "'");
}

// ---------------------------------------------------------------------------
// Logging: CRAN_LOG=quiet|info|debug (default info)

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  const char* v = std::getenv("CRAN_LOG");
  if (!v) return LogLevel::info;
  const std::string s(v);
  if (s == "quiet") return LogLevel::quiet;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::info;
}

inline void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) std::fprintf(stderr, "[cran] %s\n", msg.c_str());
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  Preset preset = Preset::small;
  std::size_t num_users = 0;        // 0 selects the preset default (3 small, 120 large)
  std::size_t active_clusters = 0;  // large preset only; 0 keeps all clusters
  std::vector<Point> custom_rrhs;
  double user_square_side = 750.0;

  SweepVariable sweep = SweepVariable::beta;
  std::vector<double> values{10.0};
  std::vector<Scheme> schemes{Scheme::hybrid_optimal, Scheme::hybrid_greedy, Scheme::all_fad, Scheme::all_daf,
                              Scheme::dual_bound};
  std::size_t draws = 1;
  std::uint64_t seed = 1;

  double bandwidth_hz = 20e6;
  std::size_t subchannels = 64;
  int sq_bits = 10;
  double rbar_mbps = 250.0;
  double pbar_dbm = 23.0;
  double weight = 1.0;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 6.0;

  double tolerance = 1e-4;
  double initial_radius = 1e3;
  std::size_t max_iterations = 0;

  std::string output;           // path prefix; empty writes nothing
  std::string format = "all";   // csv | json | all

  std::size_t users() const {
    if (num_users) return num_users;
    return preset == Preset::large ? 120 : 3;
  }

  TopologyConfig topology() const {
    TopologyConfig t;
    t.preset = preset;
    t.num_users = users();
    t.active_clusters = active_clusters;
    t.custom_rrhs = custom_rrhs;
    t.user_square_side = user_square_side;
    return t;
  }

  EllipsoidOptions ellipsoid() const {
    EllipsoidOptions o;
    o.tolerance = tolerance;
    o.initial_radius = initial_radius;
    o.max_iterations = max_iterations;
    return o;
  }

  void validate() const {
    if (values.empty()) throw std::invalid_argument("config: sweep value list is empty");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw std::invalid_argument("config: sweep values must be strictly increasing");
    if (schemes.empty()) throw std::invalid_argument("config: no schemes selected");
    if (draws < 1) throw std::invalid_argument("config: draws must be >= 1");
    if (sweep == SweepVariable::beta)
      for (double v : values)
        if (v < 1.0 || v != std::floor(v)) throw std::invalid_argument("config: beta values must be positive integers");
    if (sweep == SweepVariable::rbar_mbps)
      for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("config: fronthaul capacities must be positive");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("config: bandwidth must be positive");
    if (subchannels == 0 || subchannels % 4 != 0)
      throw std::invalid_argument("config: subchannels must be a positive multiple of 4");
    if (!(tolerance > 0.0) || !(initial_radius > 0.0)) throw std::invalid_argument("config: invalid ellipsoid options");
    if (format != "csv" && format != "json" && format != "all")
      throw std::invalid_argument("config: format must be csv, json or all");
    topology().validate();
  }
};

/// Network parameters for one sweep point.
inline SystemParams make_params(const ExperimentConfig& cfg, double sweep_value, std::size_t rrhs, std::size_t users) {
  int bits = cfg.sq_bits;
  double rbar = cfg.rbar_mbps;
  double pbar = cfg.pbar_dbm;
  switch (cfg.sweep) {
    case SweepVariable::beta: bits = static_cast<int>(sweep_value); break;
    case SweepVariable::rbar_mbps: rbar = sweep_value; break;
    case SweepVariable::pbar_dbm: pbar = sweep_value; break;
  }
  return SystemParams::uniform(
      rrhs, users, cfg.subchannels, cfg.bandwidth_hz, bits, rbar * 1e6, dbm_to_watts(pbar),
      subchannel_noise_power(cfg.bandwidth_hz, cfg.subchannels, cfg.noise_psd_dbm_hz, cfg.noise_figure_db), cfg.weight);
}

// ---------------------------------------------------------------------------
// Schemes

/// Exhaustive RRH-set search is only offered up to this cluster size.
inline constexpr std::size_t max_direct_exhaustive_rrhs = 12;

struct SchemeOutcome {
  Scheme scheme = Scheme::hybrid_optimal;
  double rate = 0.0;  // weighted sum-rate, or the dual value for dual_bound
  std::optional<Allocation> allocation;
  std::optional<double> dual_value;  // exhaustive dual bound, when computed
  double seconds = 0.0;
  bool converged = true;
};

inline bool uses_exhaustive_search(Scheme s) { return s != Scheme::hybrid_greedy; }

inline SchemeOutcome run_scheme(Scheme scheme, const ChannelGains& gains, const SystemParams& params,
                                EllipsoidOptions opts = {}) {
  params.validate();
  gains.validate(params);
  if (uses_exhaustive_search(scheme) && scheme != Scheme::all_daf && params.num_rrhs > max_direct_exhaustive_rrhs)
    throw std::invalid_argument(std::string("scheme ") + to_string(scheme) + " needs exhaustive RRH-set search over " +
                                std::to_string(params.num_rrhs) + " RRHs; solve per cluster instead");
  switch (scheme) {
    case Scheme::hybrid_optimal:
    case Scheme::dual_bound:
      opts.solver = {FadSearch::exhaustive, ModePolicy::hybrid};
      break;
    case Scheme::hybrid_greedy: opts.solver = {FadSearch::greedy, ModePolicy::hybrid}; break;
    case Scheme::all_fad: opts.solver = {FadSearch::exhaustive, ModePolicy::fad_only}; break;
    case Scheme::all_daf: opts.solver = {FadSearch::exhaustive, ModePolicy::daf_only}; break;
  }
  if (scheme == Scheme::dual_bound) opts.track_primal = false;

  const auto start = std::chrono::steady_clock::now();
  SchemeOutcome out;
  out.scheme = scheme;
  DualPipelineResult res = solve_dual_pipeline(gains, params, opts);
  // The hybrid feasible set contains both single-mode ones, so the hybrid
  // schemes also keep the better single-mode allocation when it wins.
  if (scheme == Scheme::hybrid_optimal || scheme == Scheme::hybrid_greedy) {
    for (ModePolicy forced : {ModePolicy::daf_only, ModePolicy::fad_only}) {
      EllipsoidOptions single = opts;
      single.solver.policy = forced;
      single.log = {};
      DualPipelineResult alt = solve_dual_pipeline(gains, params, single);
      if (alt.allocation.weighted_sum_rate > res.allocation.weighted_sum_rate)
        res.allocation = std::move(alt.allocation);
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.converged = res.ellipsoid.converged;
  if (scheme == Scheme::hybrid_optimal || scheme == Scheme::dual_bound)
    out.dual_value = res.ellipsoid.evaluations ? res.ellipsoid.state.best_value : 0.0;
  if (scheme == Scheme::dual_bound) {
    out.rate = *out.dual_value;
  } else {
    out.rate = res.allocation.weighted_sum_rate;
    out.allocation = std::move(res.allocation);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clusters

struct ClusterSolution {
  std::size_t cluster = 0;
  std::vector<std::size_t> rrhs;   // global RRH indices
  std::vector<std::size_t> users;  // global user indices
  SchemeOutcome outcome;
};

struct ClusteredSolution {
  std::vector<ClusterSolution> clusters;
  double rate = 0.0;
  std::optional<double> dual_value;
  double seconds = 0.0;
  bool converged = true;
};

/// Restricts parameters and gains to a subset of RRHs and users.
inline std::pair<SystemParams, ChannelGains> restrict_instance(const SystemParams& params, const ChannelGains& gains,
                                                               const std::vector<std::size_t>& rrhs,
                                                               const std::vector<std::size_t>& users) {
  SystemParams p = params;
  p.num_rrhs = rrhs.size();
  p.num_users = users.size();
  p.sq_bits.clear();
  p.fronthaul_capacity.clear();
  p.noise_power.clear();
  p.power_budget.clear();
  p.weight.clear();
  for (std::size_t m : rrhs) {
    p.sq_bits.push_back(params.sq_bits[m]);
    p.fronthaul_capacity.push_back(params.fronthaul_capacity[m]);
    p.noise_power.push_back(params.noise_power[m]);
  }
  for (std::size_t k : users) {
    p.power_budget.push_back(params.power_budget[k]);
    p.weight.push_back(params.weight[k]);
  }
  ChannelGains g(rrhs.size(), users.size(), params.num_subchannels);
  for (std::size_t i = 0; i < rrhs.size(); ++i)
    for (std::size_t j = 0; j < users.size(); ++j)
      for (std::size_t n = 0; n < params.num_subchannels; ++n) g(i, j, n) = gains(rrhs[i], users[j], n);
  return {std::move(p), std::move(g)};
}

/// Solves every cluster independently (each reuses all subchannels) and sums
/// the cluster metrics. Clusters without users or RRHs contribute nothing.
inline ClusteredSolution cluster_and_solve(const Topology& topo, const ChannelGains& gains, const SystemParams& params,
                                           Scheme scheme, const EllipsoidOptions& opts = {}) {
  ClusteredSolution out;
  out.dual_value = 0.0;
  bool have_dual = true;
  for (std::size_t c = 0; c < topo.num_clusters(); ++c) {
    ClusterSolution cs;
    cs.cluster = c;
    for (std::size_t m = 0; m < topo.cluster_of_rrh.size(); ++m)
      if (topo.cluster_of_rrh[m] == c) cs.rrhs.push_back(m);
    for (std::size_t k = 0; k < topo.cluster_of_user.size(); ++k)
      if (topo.cluster_of_user[k] == c) cs.users.push_back(k);
    if (cs.rrhs.empty() || cs.users.empty()) continue;
    auto [p, g] = restrict_instance(params, gains, cs.rrhs, cs.users);
    cs.outcome = run_scheme(scheme, g, p, opts);
    out.rate += cs.outcome.rate;
    out.seconds += cs.outcome.seconds;
    out.converged = out.converged && cs.outcome.converged;
    if (cs.outcome.dual_value)
      *out.dual_value += *cs.outcome.dual_value;
    else
      have_dual = false;
    out.clusters.push_back(std::move(cs));
  }
  if (!have_dual) out.dual_value.reset();
  return out;
}

/// Runs a scheme on one network: per cluster when the topology has several
/// clusters, directly otherwise.
inline ClusteredSolution solve_network(Scheme scheme, const Topology& topo, const ChannelGains& gains,
                                       const SystemParams& params, const EllipsoidOptions& opts = {}) {
  if (topo.num_clusters() > 1) return cluster_and_solve(topo, gains, params, scheme, opts);
  ClusteredSolution out;
  ClusterSolution cs;
  for (std::size_t m = 0; m < params.num_rrhs; ++m) cs.rrhs.push_back(m);
  for (std::size_t k = 0; k < params.num_users; ++k) cs.users.push_back(k);
  cs.outcome = run_scheme(scheme, gains, params, opts);
  out.rate = cs.outcome.rate;
  out.dual_value = cs.outcome.dual_value;
  out.seconds = cs.outcome.seconds;
  out.converged = cs.outcome.converged;
  out.clusters.push_back(std::move(cs));
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct ResultRow {
  Scheme scheme = Scheme::hybrid_optimal;
  SweepVariable sweep_var = SweepVariable::beta;
  double sweep_value = 0.0;
  double mean_rate = 0.0;  // bits/s
  double stderr_rate = 0.0;
  double mean_gap = std::numeric_limits<double>::quiet_NaN();  // relative to the dual bound
  double mean_time = 0.0;  // seconds
  std::size_t draws = 0;
};

struct DrawRecord {
  double sweep_value = 0.0;
  std::size_t draw = 0;
  Scheme scheme = Scheme::hybrid_optimal;
  double rate = 0.0;
  std::optional<double> dual_bound;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<DrawRecord> records;
  std::size_t failed_draws = 0;
  std::vector<std::string> failures;  // violated aggregate assertions
  std::vector<std::string> warnings;  // per-draw anomalies
};

inline constexpr double dominance_rel_tol = 1e-6;

/// Aggregate assertions: hybrid rows dominate the single-mode benchmarks and
/// no feasible scheme exceeds the dual bound.
inline std::vector<std::string> check_rows(const std::vector<ResultRow>& rows) {
  std::vector<std::string> failures;
  auto find = [&](Scheme s, double v) -> const ResultRow* {
    for (const auto& r : rows)
      if (r.scheme == s && r.sweep_value == v) return &r;
    return nullptr;
  };
  for (const auto& r : rows) {
    if (r.scheme != Scheme::hybrid_optimal && r.scheme != Scheme::hybrid_greedy) continue;
    for (Scheme b : {Scheme::all_fad, Scheme::all_daf}) {
      const ResultRow* other = find(b, r.sweep_value);
      if (other && r.mean_rate < other->mean_rate - dominance_rel_tol * other->mean_rate) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s below %s at %s=%g (%.6e < %.6e)", to_string(r.scheme), to_string(b),
                      to_string(r.sweep_var), r.sweep_value, r.mean_rate, other->mean_rate);
        failures.emplace_back(buf);
      }
    }
  }
  return failures;
}

using SweepProgress = std::function<void(double value, std::size_t draw, Scheme scheme, double rate)>;

inline SweepResult run_sweep(const ExperimentConfig& cfg, const SweepProgress& progress = {}) {
  cfg.validate();
  SweepResult out;
  const TopologyConfig tcfg = cfg.topology();
  const EllipsoidOptions eopts = cfg.ellipsoid();
  const bool want_bound = std::find(cfg.schemes.begin(), cfg.schemes.end(), Scheme::dual_bound) != cfg.schemes.end();

  for (double value : cfg.values) {
    std::vector<std::vector<double>> rates(cfg.schemes.size());
    std::vector<std::vector<double>> gaps(cfg.schemes.size());
    std::vector<std::vector<double>> times(cfg.schemes.size());
    for (std::size_t d = 0; d < cfg.draws; ++d) {
      // The same draw index yields the same network at every sweep point and
      // for every scheme.
      const Topology topo = generate_topology(tcfg, derive_seed(cfg.seed, 0, d));
      const ChannelDraw draw = generate_channel(topo, cfg.subchannels, derive_seed(cfg.seed, 1, d));
      const SystemParams params = make_params(cfg, value, topo.rrh_pos.size(), topo.user_pos.size());

      std::vector<ClusteredSolution> sols(cfg.schemes.size());
      std::optional<double> bound;
      try {
        std::optional<ClusteredSolution> exhaustive_hybrid;
        for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
          const Scheme s = cfg.schemes[i];
          if ((s == Scheme::hybrid_optimal || s == Scheme::dual_bound) && exhaustive_hybrid) {
            sols[i] = *exhaustive_hybrid;
            sols[i].seconds = exhaustive_hybrid->seconds;
          } else {
            const Scheme run = (s == Scheme::dual_bound) ? Scheme::hybrid_optimal : s;
            sols[i] = solve_network(run, topo, draw.gains, params, eopts);
            if (run == Scheme::hybrid_optimal) exhaustive_hybrid = sols[i];
          }
          if (s == Scheme::dual_bound) sols[i].rate = sols[i].dual_value.value_or(0.0);
          if (!sols[i].converged)
            out.warnings.push_back(std::string(to_string(s)) + ": ellipsoid hit its iteration limit at " +
                                   to_string(cfg.sweep) + "=" + std::to_string(value) + ", draw " + std::to_string(d));
        }
        if (want_bound && exhaustive_hybrid) bound = exhaustive_hybrid->dual_value;
      } catch (const std::exception& e) {
        ++out.failed_draws;
        log_message(LogLevel::info, std::string("draw ") + std::to_string(d) + " failed: " + e.what());
        continue;
      }

      double hybrid_rate = -1.0;
      for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
        if (cfg.schemes[i] == Scheme::hybrid_optimal) hybrid_rate = sols[i].rate;
      for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
        const Scheme s = cfg.schemes[i];
        const double rate = sols[i].rate;
        rates[i].push_back(rate);
        times[i].push_back(sols[i].seconds);
        if (bound && *bound > 0.0) gaps[i].push_back((*bound - rate) / *bound);
        out.records.push_back({value, d, s, rate, bound, sols[i].seconds});
        if (progress) progress(value, d, s, rate);
        if (s != Scheme::dual_bound && bound && rate > *bound * (1.0 + 1e-9))
          out.failures.push_back(std::string(to_string(s)) + " exceeds the dual bound at draw " + std::to_string(d));
        if ((s == Scheme::all_fad || s == Scheme::all_daf) && hybrid_rate >= 0.0 &&
            hybrid_rate < rate - dominance_rel_tol * rate)
          out.warnings.push_back(std::string("hybrid_optimal below ") + to_string(s) + " at " + to_string(cfg.sweep) +
                                 "=" + std::to_string(value) + ", draw " + std::to_string(d));
      }
    }

    for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
      ResultRow row;
      row.scheme = cfg.schemes[i];
      row.sweep_var = cfg.sweep;
      row.sweep_value = value;
      row.draws = rates[i].size();
      if (row.draws == 0) {
        row.mean_rate = std::numeric_limits<double>::quiet_NaN();
        row.stderr_rate = std::numeric_limits<double>::quiet_NaN();
        out.rows.push_back(row);
        continue;
      }
      const double nd = static_cast<double>(row.draws);
      double sum = 0.0, sq = 0.0, t = 0.0;
      for (double r : rates[i]) sum += r;
      row.mean_rate = sum / nd;
      for (double r : rates[i]) sq += (r - row.mean_rate) * (r - row.mean_rate);
      row.stderr_rate = row.draws > 1 ? std::sqrt(sq / (nd - 1.0) / nd) : 0.0;
      for (double x : times[i]) t += x;
      row.mean_time = t / nd;
      if (!gaps[i].empty()) {
        double g = 0.0;
        for (double x : gaps[i]) g += x;
        row.mean_gap = g / static_cast<double>(gaps[i].size());
      }
      out.rows.push_back(row);
    }
  }
  for (auto& f : check_rows(out.rows)) out.failures.push_back(std::move(f));
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

struct OracleLimits {
  std::size_t max_subchannels = 4;
  std::size_t max_rrhs = 3;
  std::size_t max_users = 2;
  std::size_t max_grid = 16;
};

struct OracleResult {
  Allocation allocation;
  double weighted_sum_rate = 0.0;
  // First-order estimate of what finer power steps could add: the value of one
  // more grid step of power on every active subchannel of the best solution.
  double grid_slack = 0.0;
  std::uint64_t power_vectors = 0;
};

namespace detail {

/// All vectors of `parts` positive integers with sum <= total.
inline void positive_compositions(std::size_t parts, std::size_t total, std::vector<std::size_t>& cur,
                                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == parts) {
    out.push_back(cur);
    return;
  }
  std::size_t used = 0;
  for (std::size_t x : cur) used += x;
  const std::size_t remaining_parts = parts - cur.size() - 1;
  for (std::size_t x = 1; used + x + remaining_parts <= total; ++x) {
    cur.push_back(x);
    positive_compositions(parts, total, cur, out);
    cur.pop_back();
  }
}

struct OracleOption {
  double value;                 // weighted rate
  std::vector<double> load;     // fronthaul load per RRH
  ScDecision decision;
};

}  // namespace detail

/// Exhaustive search over user assignment, processing mode, RRH selection and a
/// per-user simplex grid of power splits (multiples of Pbar_k / grid_size).
/// Exact up to the power grid; refuses anything beyond tiny instances.
inline OracleResult brute_force_oracle(const ChannelGains& gains, const SystemParams& params, std::size_t grid_size,
                                       const OracleLimits& limits = {}) {
  params.validate();
  gains.validate(params);
  if (params.num_subchannels > limits.max_subchannels || params.num_rrhs > limits.max_rrhs ||
      params.num_users > limits.max_users || grid_size > limits.max_grid || grid_size == 0)
    throw std::invalid_argument("brute_force_oracle: instance too large (limits: N <= " +
                                std::to_string(limits.max_subchannels) + ", M <= " + std::to_string(limits.max_rrhs) +
                                ", K <= " + std::to_string(limits.max_users) + ", 1 <= grid <= " +
                                std::to_string(limits.max_grid) + ")");
  const std::size_t sc_count = params.num_subchannels;
  const std::size_t rrhs = params.num_rrhs;
  const std::size_t users = params.num_users;
  const double scb = params.subchannel_bandwidth();

  OracleResult best;
  best.allocation = empty_allocation(params);
  double best_value = 0.0;
  std::vector<double> best_grid_power(sc_count, 0.0);

  // Per-SC options for a given (user, power): DaF on one RRH or FaD on a set.
  auto options_for = [&](std::size_t n, std::size_t k, double p) {
    std::vector<detail::OracleOption> opts;
    for (std::size_t m = 0; m < rrhs; ++m) {
      detail::OracleOption o{0.0, std::vector<double>(rrhs, 0.0), ScDecision::empty(rrhs)};
      const double r = daf_rate(gains(m, k, n), p, params.noise_power[m], scb);
      o.value = params.weight[k] * r;
      o.load[m] = r;
      o.decision = {Mode::decode_and_forward, std::vector<bool>(rrhs, false), k, p};
      o.decision.alpha[m] = true;
      opts.push_back(std::move(o));
    }
    for (std::uint64_t code = 1; code < (std::uint64_t{1} << rrhs); ++code) {
      detail::OracleOption o{0.0, std::vector<double>(rrhs, 0.0), ScDecision::empty(rrhs)};
      o.decision = {Mode::forward_and_decode, std::vector<bool>(rrhs, false), k, p};
      for (std::size_t m = 0; m < rrhs; ++m)
        if ((code >> m) & 1u) {
          o.decision.alpha[m] = true;
          o.load[m] = params.quantized_sc_rate(m);
        }
      o.value = params.weight[k] * fad_rate(o.decision.alpha, k, n, p, gains, params);
      opts.push_back(std::move(o));
    }
    std::sort(opts.begin(), opts.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    return opts;
  };

  std::vector<std::size_t> assign(sc_count, 0);  // 0 = idle, k+1 = user k
  const std::size_t states = users + 1;
  std::size_t total_assignments = 1;
  for (std::size_t n = 0; n < sc_count; ++n) total_assignments *= states;

  for (std::size_t code = 0; code < total_assignments; ++code) {
    std::size_t c = code;
    for (std::size_t n = 0; n < sc_count; ++n) {
      assign[n] = c % states;
      c /= states;
    }
    std::vector<std::vector<std::size_t>> scs_of(users);
    for (std::size_t n = 0; n < sc_count; ++n)
      if (assign[n]) scs_of[assign[n] - 1].push_back(n);

    std::vector<std::vector<std::vector<std::size_t>>> splits(users);
    for (std::size_t k = 0; k < users; ++k) {
      std::vector<std::size_t> cur;
      if (scs_of[k].empty())
        splits[k].push_back({});
      else
        detail::positive_compositions(scs_of[k].size(), grid_size, cur, splits[k]);
    }

    std::vector<std::size_t> pick(users, 0);
    while (true) {
      ++best.power_vectors;
      std::vector<double> power(sc_count, 0.0);
      for (std::size_t k = 0; k < users; ++k)
        for (std::size_t i = 0; i < scs_of[k].size(); ++i)
          power[scs_of[k][i]] =
              params.power_budget[k] * static_cast<double>(splits[k][pick[k]][i]) / static_cast<double>(grid_size);

      std::vector<std::size_t> active;
      std::vector<std::vector<detail::OracleOption>> opts;
      for (std::size_t n = 0; n < sc_count; ++n)
        if (assign[n]) {
          active.push_back(n);
          opts.push_back(options_for(n, assign[n] - 1, power[n]));
        }
      // Upper bounds on what the remaining subchannels can add.
      std::vector<double> tail(active.size() + 1, 0.0);
      for (std::size_t i = active.size(); i-- > 0;) tail[i] = tail[i + 1] + opts[i].front().value;

      std::vector<double> load(rrhs, 0.0);
      std::vector<std::size_t> choice(active.size(), 0);
      std::function<void(std::size_t, double)> dfs = [&](std::size_t i, double value) {
        if (value + tail[i] <= best_value) return;
        if (i == active.size()) {
          best_value = value;
          best.allocation = empty_allocation(params);
          for (std::size_t j = 0; j < active.size(); ++j) {
            best.allocation.decisions[active[j]] = opts[j][choice[j]].decision;
            best_grid_power[active[j]] = power[active[j]];
          }
          return;
        }
        for (std::size_t o = 0; o < opts[i].size(); ++o) {
          const auto& opt = opts[i][o];
          bool fits = true;
          for (std::size_t m = 0; m < rrhs; ++m)
            if (load[m] + opt.load[m] > params.fronthaul_capacity[m]) fits = false;
          if (!fits) continue;
          for (std::size_t m = 0; m < rrhs; ++m) load[m] += opt.load[m];
          choice[i] = o;
          dfs(i + 1, value + opt.value);
          for (std::size_t m = 0; m < rrhs; ++m) load[m] -= opt.load[m];
        }
      };
      dfs(0, 0.0);

      std::size_t k = 0;
      while (k < users) {
        if (++pick[k] < splits[k].size()) break;
        pick[k] = 0;
        ++k;
      }
      if (k == users) break;
    }
  }

  refresh_metrics(best.allocation, gains, params);
  best.weighted_sum_rate = best.allocation.weighted_sum_rate;
  for (std::size_t n = 0; n < sc_count; ++n) {
    ScDecision d = best.allocation.decisions[n];
    if (!d.user) continue;
    const double base = hybrid_rate(n, d, gains, params);
    d.power += params.power_budget[*d.user] / static_cast<double>(grid_size);
    best.grid_slack += params.weight[*d.user] * (hybrid_rate(n, d, gains, params) - base);
  }
  return best;
}

}  // namespace cran
