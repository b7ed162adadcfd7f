// Command-line front end: channel generation, single-instance solves, sweeps
// and tiny-instance oracle checks.

#include <cran/cran.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace cran;

// Flags that mirror ExperimentConfig fields. Unset flags leave the config
// (defaults, possibly overridden by a config file) untouched.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> preset;
  std::optional<std::size_t> users;
  std::optional<std::size_t> active_clusters;
  std::optional<std::string> sweep;
  std::vector<double> values;
  std::vector<std::string> schemes;
  std::optional<std::size_t> draws;
  std::optional<std::uint64_t> seed;
  std::optional<double> bandwidth;
  std::optional<std::size_t> subchannels;
  std::optional<int> beta;
  std::optional<double> rbar_mbps;
  std::optional<double> pbar_dbm;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_iterations;
  std::optional<std::string> output;
  std::optional<std::string> format;

  void attach(CLI::App* app, bool sweep_flags) {
    app->add_option("-c,--config", config_path, "JSON configuration file");
    app->add_option("--preset", preset, "small | large | custom");
    app->add_option("--users", users, "number of users (0 = preset default)");
    app->add_option("--active-clusters", active_clusters, "large preset: keep only the first clusters");
    app->add_option("--seed", seed, "base random seed");
    app->add_option("--bandwidth", bandwidth, "system bandwidth in Hz");
    app->add_option("--subchannels", subchannels, "number of subchannels (multiple of 4)");
    app->add_option("--beta", beta, "SQ bits per real dimension");
    app->add_option("--rbar", rbar_mbps, "per-RRH fronthaul capacity in Mbps");
    app->add_option("--pbar", pbar_dbm, "per-user power budget in dBm");
    app->add_option("--tolerance", tolerance, "ellipsoid relative tolerance");
    app->add_option("--max-iterations", max_iterations, "ellipsoid iteration limit (0 = default)");
    if (sweep_flags) {
      app->add_option("--sweep", sweep, "beta | pbar_dbm | rbar_mbps");
      app->add_option("--values", values, "sweep values, strictly increasing");
      app->add_option("--schemes", schemes, "hybrid_optimal hybrid_greedy all_fad all_daf dual_bound");
      app->add_option("--draws", draws, "random draws per sweep value");
      app->add_option("-o,--output", output, "output path prefix");
      app->add_option("--format", format, "csv | json | all");
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (preset) c.preset = parse_preset(*preset);
    if (users) c.num_users = *users;
    if (active_clusters) c.active_clusters = *active_clusters;
    if (sweep) c.sweep = parse_sweep_variable(*sweep);
    if (!values.empty()) c.values = values;
    if (!schemes.empty()) {
      c.schemes.clear();
      for (const auto& s : schemes) c.schemes.push_back(parse_scheme(s));
    }
    if (draws) c.draws = *draws;
    if (seed) c.seed = *seed;
    if (bandwidth) c.bandwidth_hz = *bandwidth;
    if (subchannels) c.subchannels = *subchannels;
    if (beta) c.sq_bits = *beta;
    if (rbar_mbps) c.rbar_mbps = *rbar_mbps;
    if (pbar_dbm) c.pbar_dbm = *pbar_dbm;
    if (tolerance) c.tolerance = *tolerance;
    if (max_iterations) c.max_iterations = *max_iterations;
    if (output) c.output = *output;
    if (format) c.format = *format;
    c.validate();
    return c;
  }
};

// The sweep value used when building parameters outside of a sweep.
double base_value(const ExperimentConfig& c) {
  switch (c.sweep) {
    case SweepVariable::beta: return c.sq_bits;
    case SweepVariable::rbar_mbps: return c.rbar_mbps;
    case SweepVariable::pbar_dbm: return c.pbar_dbm;
  }
  return 0.0;
}

void print_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << "\n";
  else
    write_text(path, j.dump(2) + "\n");
}

int cmd_channel(const ConfigFlags& flags, std::size_t draw_index, const std::string& out) {
  const ExperimentConfig cfg = flags.resolve();
  ChannelFile f;
  const Topology topo = generate_topology(cfg.topology(), derive_seed(cfg.seed, 0, draw_index));
  f.draw = generate_channel(topo, cfg.subchannels, derive_seed(cfg.seed, 1, draw_index));
  f.params = make_params(cfg, base_value(cfg), topo.rrh_pos.size(), topo.user_pos.size());
  f.topology = topo;
  if (out.empty() || out == "-")
    std::cout << channel_to_json(f).dump() << "\n";
  else
    save_channel(out, f);
  log_message(LogLevel::info, "channel: " + std::to_string(topo.rrh_pos.size()) + " RRHs, " +
                                  std::to_string(topo.user_pos.size()) + " users, " +
                                  std::to_string(cfg.subchannels) + " subchannels");
  return 0;
}

int cmd_solve(const ConfigFlags& flags, const std::string& channel_path, const std::string& scheme_name,
              bool use_file_params, const std::string& out) {
  const ExperimentConfig cfg = flags.resolve();
  const ChannelFile f = load_channel(channel_path);
  const ChannelGains& gains = f.draw.gains;
  if (gains.num_subchannels() != cfg.subchannels && !(use_file_params && f.params))
    throw std::invalid_argument("solve: channel file has " + std::to_string(gains.num_subchannels()) +
                                " subchannels; pass --subchannels to match");
  const SystemParams params = (use_file_params && f.params)
                                  ? *f.params
                                  : make_params(cfg, base_value(cfg), gains.num_rrhs(), gains.num_users());
  const Scheme scheme = parse_scheme(scheme_name);

  json j;
  j["scheme"] = to_string(scheme);
  j["params"] = params_to_json(params);
  if (f.topology && f.topology->num_clusters() > 1) {
    const ClusteredSolution sol = cluster_and_solve(*f.topology, gains, params, scheme, cfg.ellipsoid());
    j["rate_bps"] = sol.rate;
    j["converged"] = sol.converged;
    j["seconds"] = sol.seconds;
    if (sol.dual_value) j["dual_bound_bps"] = *sol.dual_value;
    json clusters = json::array();
    for (const auto& c : sol.clusters) {
      json cj{{"cluster", c.cluster}, {"rrhs", c.rrhs}, {"users", c.users}, {"rate_bps", c.outcome.rate}};
      if (c.outcome.allocation) {
        auto [p, g] = restrict_instance(params, gains, c.rrhs, c.users);
        cj["allocation"] = allocation_to_json(*c.outcome.allocation, evaluate_allocation(*c.outcome.allocation, g, p));
      }
      clusters.push_back(cj);
    }
    j["clusters"] = clusters;
  } else {
    const SchemeOutcome o = run_scheme(scheme, gains, params, cfg.ellipsoid());
    j["rate_bps"] = o.rate;
    j["converged"] = o.converged;
    j["seconds"] = o.seconds;
    if (o.dual_value) j["dual_bound_bps"] = *o.dual_value;
    if (o.allocation) j["allocation"] = allocation_to_json(*o.allocation, evaluate_allocation(*o.allocation, gains, params));
  }
  print_json(j, out);
  return 0;
}

int cmd_simulate(const ConfigFlags& flags) {
  const ExperimentConfig cfg = flags.resolve();
  const bool verbose = log_level() == LogLevel::debug;
  const SweepResult res = run_sweep(cfg, [&](double v, std::size_t d, Scheme s, double rate) {
    if (verbose)
      log_message(LogLevel::debug, std::string(to_string(cfg.sweep)) + "=" + format_number(v) + " draw " +
                                       std::to_string(d) + " " + to_string(s) + " " + format_number(rate));
  });
  std::cout << results_to_csv(res.rows);
  if (!cfg.output.empty())
    for (const auto& path : emit_results(res, cfg, cfg.output, cfg.format)) log_message(LogLevel::info, "wrote " + path);
  for (const auto& w : res.warnings) log_message(LogLevel::info, "warning: " + w);
  if (res.failed_draws) log_message(LogLevel::info, std::to_string(res.failed_draws) + " draw(s) failed and were excluded");
  for (const auto& f : res.failures) log_message(LogLevel::quiet, "assertion failed: " + f);
  return res.failures.empty() ? 0 : 3;
}

int cmd_oracle(const ConfigFlags& flags, const std::string& channel_path, std::size_t grid, const std::string& out) {
  ExperimentConfig cfg = flags.resolve();
  ChannelFile f;
  SystemParams params;
  if (!channel_path.empty()) {
    f = load_channel(channel_path);
    params = f.params ? *f.params
                      : make_params(cfg, base_value(cfg), f.draw.gains.num_rrhs(), f.draw.gains.num_users());
  } else {
    // Tiny default instance: three RRHs of the small layout, two users, four subchannels.
    if (!flags.subchannels) cfg.subchannels = 4;
    if (!flags.users) cfg.num_users = 2;
    cfg.preset = Preset::custom;
    cfg.custom_rrhs = {{0.0, 0.0}, {-187.5, -187.5}, {187.5, 187.5}};
    const Topology topo = generate_topology(cfg.topology(), derive_seed(cfg.seed, 0, 0));
    f.draw = generate_channel(topo, cfg.subchannels, derive_seed(cfg.seed, 1, 0));
    params = make_params(cfg, base_value(cfg), topo.rrh_pos.size(), topo.user_pos.size());
  }
  const ChannelGains& gains = f.draw.gains;
  const OracleResult o = brute_force_oracle(gains, params, grid);
  const SchemeOutcome h = run_scheme(Scheme::hybrid_optimal, gains, params, cfg.ellipsoid());
  const double lower = o.weighted_sum_rate - o.grid_slack;
  const double upper = h.dual_value.value_or(0.0);
  const bool ok = h.rate >= lower && h.rate <= upper * (1.0 + 1e-9);

  json j{{"oracle_rate_bps", o.weighted_sum_rate},
         {"grid_slack_bps", o.grid_slack},
         {"grid_size", grid},
         {"power_vectors", o.power_vectors},
         {"hybrid_rate_bps", h.rate},
         {"dual_bound_bps", upper},
         {"within_bounds", ok},
         {"oracle_allocation", allocation_to_json(o.allocation, evaluate_allocation(o.allocation, gains, params))}};
  print_json(j, out);
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid FaD/DaF uplink resource allocation for C-RAN"};
  app.require_subcommand(1);

  ConfigFlags channel_flags, solve_flags, simulate_flags, oracle_flags;

  auto* channel = app.add_subcommand("channel", "generate a topology and channel draw and export it");
  channel_flags.attach(channel, false);
  std::size_t draw_index = 0;
  std::string channel_out;
  channel->add_option("--draw", draw_index, "draw index under the base seed");
  channel->add_option("-o,--output", channel_out, "channel file to write (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve one channel file and print the allocation");
  solve_flags.attach(solve, false);
  std::string solve_channel, scheme = "hybrid_optimal", solve_out;
  bool file_params = true;
  solve->add_option("channel", solve_channel, "channel file")->required();
  solve->add_option("--scheme", scheme, "hybrid_optimal | hybrid_greedy | all_fad | all_daf | dual_bound");
  solve->add_flag("!--ignore-file-params", file_params, "build parameters from flags instead of the channel file");
  solve->add_option("-o,--output", solve_out, "allocation JSON to write (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "run a parameter sweep");
  simulate_flags.attach(simulate, true);

  auto* oracle = app.add_subcommand("oracle", "check the dual pipeline against brute force on a tiny instance");
  oracle_flags.attach(oracle, false);
  std::string oracle_channel, oracle_out;
  std::size_t grid = 16;
  oracle->add_option("--channel", oracle_channel, "channel file (default: random tiny instance)");
  oracle->add_option("--grid", grid, "power grid steps per user budget (<= 16)");
  oracle->add_option("-o,--output", oracle_out, "result JSON to write (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*channel) return cmd_channel(channel_flags, draw_index, channel_out);
    if (*solve) return cmd_solve(solve_flags, solve_channel, scheme, file_params, solve_out);
    if (*simulate) return cmd_simulate(simulate_flags);
    if (*oracle) return cmd_oracle(oracle_flags, oracle_channel, grid, oracle_out);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
