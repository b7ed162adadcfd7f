#pragma once

// File formats: experiment configuration (JSON), channel draws (JSON), solved
// allocations (JSON), and sweep results (CSV, JSON, plot data).

#include <cran/channel.hpp>
#include <cran/harness.hpp>
#include <cran/model.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cran {

using json = nlohmann::json;

inline constexpr const char* channel_format_tag = "cran-channel-v1";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Experiment configuration

inline json config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = to_string(c.preset);
  j["num_users"] = c.users();
  j["active_clusters"] = c.active_clusters;
  if (!c.custom_rrhs.empty()) {
    json pts = json::array();
    for (const auto& p : c.custom_rrhs) pts.push_back({p.x, p.y});
    j["custom_rrhs"] = pts;
  }
  j["user_square_side_m"] = c.user_square_side;
  j["sweep"] = {{"variable", to_string(c.sweep)}, {"values", c.values}};
  json schemes = json::array();
  for (Scheme s : c.schemes) schemes.push_back(to_string(s));
  j["schemes"] = schemes;
  j["draws"] = c.draws;
  j["seed"] = c.seed;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["subchannels"] = c.subchannels;
  j["beta"] = c.sq_bits;
  j["rbar_mbps"] = c.rbar_mbps;
  j["pbar_dbm"] = c.pbar_dbm;
  j["weight"] = c.weight;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["noise_figure_db"] = c.noise_figure_db;
  j["ellipsoid"] = {{"tolerance", c.tolerance}, {"initial_radius", c.initial_radius},
                    {"max_iterations", c.max_iterations}};
  j["output"] = c.output;
  j["format"] = c.format;
  return j;
}

/// Overlays the keys present in j onto cfg; absent keys keep their values.
inline void apply_config_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  try {
    if (j.contains("preset")) c.preset = parse_preset(j.at("preset").get<std::string>());
    if (j.contains("num_users")) c.num_users = j.at("num_users").get<std::size_t>();
    if (j.contains("active_clusters")) c.active_clusters = j.at("active_clusters").get<std::size_t>();
    if (j.contains("custom_rrhs")) {
      c.custom_rrhs.clear();
      for (const auto& p : j.at("custom_rrhs")) c.custom_rrhs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    if (j.contains("user_square_side_m")) c.user_square_side = j.at("user_square_side_m").get<double>();
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("variable")) c.sweep = parse_sweep_variable(s.at("variable").get<std::string>());
      if (s.contains("values")) c.values = s.at("values").get<std::vector<double>>();
    }
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    if (j.contains("draws")) c.draws = j.at("draws").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("bandwidth_hz")) c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("subchannels")) c.subchannels = j.at("subchannels").get<std::size_t>();
    if (j.contains("beta")) c.sq_bits = j.at("beta").get<int>();
    if (j.contains("rbar_mbps")) c.rbar_mbps = j.at("rbar_mbps").get<double>();
    if (j.contains("pbar_dbm")) c.pbar_dbm = j.at("pbar_dbm").get<double>();
    if (j.contains("weight")) c.weight = j.at("weight").get<double>();
    if (j.contains("noise_psd_dbm_hz")) c.noise_psd_dbm_hz = j.at("noise_psd_dbm_hz").get<double>();
    if (j.contains("noise_figure_db")) c.noise_figure_db = j.at("noise_figure_db").get<double>();
    if (j.contains("ellipsoid")) {
      const auto& e = j.at("ellipsoid");
      if (e.contains("tolerance")) c.tolerance = e.at("tolerance").get<double>();
      if (e.contains("initial_radius")) c.initial_radius = e.at("initial_radius").get<double>();
      if (e.contains("max_iterations")) c.max_iterations = e.at("max_iterations").get<std::size_t>();
    }
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("format")) c.format = j.at("format").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig c;
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
  apply_config_json(j, c);
  return c;
}

// ---------------------------------------------------------------------------
// System parameters and channel files

inline json params_to_json(const SystemParams& p) {
  return {{"num_rrhs", p.num_rrhs},
          {"num_users", p.num_users},
          {"num_subchannels", p.num_subchannels},
          {"bandwidth_hz", p.bandwidth},
          {"beta", p.sq_bits},
          {"rbar_bps", p.fronthaul_capacity},
          {"pbar_w", p.power_budget},
          {"weight", p.weight},
          {"noise_w", p.noise_power}};
}

inline SystemParams params_from_json(const json& j) {
  SystemParams p;
  try {
    p.num_rrhs = j.at("num_rrhs").get<std::size_t>();
    p.num_users = j.at("num_users").get<std::size_t>();
    p.num_subchannels = j.at("num_subchannels").get<std::size_t>();
    p.bandwidth = j.at("bandwidth_hz").get<double>();
    p.sq_bits = j.at("beta").get<std::vector<int>>();
    p.fronthaul_capacity = j.at("rbar_bps").get<std::vector<double>>();
    p.power_budget = j.at("pbar_w").get<std::vector<double>>();
    p.weight = j.at("weight").get<std::vector<double>>();
    p.noise_power = j.at("noise_w").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("params: ") + e.what());
  }
  p.validate();
  return p;
}

struct ChannelFile {
  ChannelDraw draw;
  std::optional<SystemParams> params;
  std::optional<Topology> topology;
};

inline json topology_to_json(const Topology& t) {
  auto pts = [](const std::vector<Point>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
  };
  return {{"rrh_pos", pts(t.rrh_pos)},
          {"user_pos", pts(t.user_pos)},
          {"cluster_of_rrh", t.cluster_of_rrh},
          {"cluster_of_user", t.cluster_of_user},
          {"cluster_centers", pts(t.cluster_centers)}};
}

inline Topology topology_from_json(const json& j) {
  auto pts = [](const json& a) {
    std::vector<Point> v;
    for (const auto& p : a) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return v;
  };
  Topology t;
  t.rrh_pos = pts(j.at("rrh_pos"));
  t.user_pos = pts(j.at("user_pos"));
  t.cluster_of_rrh = j.at("cluster_of_rrh").get<std::vector<std::size_t>>();
  t.cluster_of_user = j.at("cluster_of_user").get<std::vector<std::size_t>>();
  t.cluster_centers = pts(j.at("cluster_centers"));
  return t;
}

/// Self-describing channel file: dimensions, seed, row-major (rrh, user,
/// subchannel) gains, and optionally the parameters and layout used.
inline json channel_to_json(const ChannelFile& f) {
  const ChannelGains& g = f.draw.gains;
  json j = {{"format", channel_format_tag},
            {"rrhs", g.num_rrhs()},
            {"users", g.num_users()},
            {"subchannels", g.num_subchannels()},
            {"seed", f.draw.seed},
            {"gains", g.data()},
            {"loss_db", f.draw.loss_db}};
  if (f.params) j["params"] = params_to_json(*f.params);
  if (f.topology) j["topology"] = topology_to_json(*f.topology);
  return j;
}

inline ChannelFile channel_from_json(const json& j) {
  ChannelFile f;
  try {
    if (j.at("format").get<std::string>() != channel_format_tag)
      throw std::invalid_argument("channel file: unsupported format tag");
    const auto rrhs = j.at("rrhs").get<std::size_t>();
    const auto users = j.at("users").get<std::size_t>();
    const auto scs = j.at("subchannels").get<std::size_t>();
    f.draw.seed = j.at("seed").get<std::uint64_t>();
    auto data = j.at("gains").get<std::vector<double>>();
    if (data.size() != rrhs * users * scs) throw std::invalid_argument("channel file: gain count does not match dimensions");
    f.draw.gains = ChannelGains(rrhs, users, scs);
    f.draw.gains.data() = std::move(data);
    if (j.contains("loss_db")) f.draw.loss_db = j.at("loss_db").get<std::vector<double>>();
    if (j.contains("params")) f.params = params_from_json(j.at("params"));
    if (j.contains("topology")) f.topology = topology_from_json(j.at("topology"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("channel file: ") + e.what());
  }
  return f;
}

inline void save_channel(const std::string& path, const ChannelFile& f) { write_text(path, channel_to_json(f).dump()); }

inline ChannelFile load_channel(const std::string& path) {
  try {
    return channel_from_json(json::parse(read_text(path)));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("channel file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Allocations

inline json decision_to_json(const ScDecision& d) {
  json j;
  j["mode"] = d.mode == Mode::decode_and_forward ? "daf" : "fad";
  std::vector<std::size_t> rrhs;
  for (std::size_t m = 0; m < d.alpha.size(); ++m)
    if (d.alpha[m]) rrhs.push_back(m);
  j["rrhs"] = rrhs;
  j["user"] = d.user ? json(*d.user) : json(nullptr);
  j["power_w"] = d.power;
  return j;
}

inline json allocation_to_json(const Allocation& a, const AllocationReport& report) {
  json decisions = json::array();
  for (const auto& d : a.decisions) decisions.push_back(decision_to_json(d));
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"kind", v.kind == Violation::Kind::fronthaul ? "fronthaul" : "power"},
                          {"index", v.index},
                          {"slack", v.slack}});
  return {{"weighted_sum_rate_bps", report.weighted_sum_rate},
          {"sum_rate_bps", report.sum_rate},
          {"fronthaul_usage_bps", report.fronthaul_usage},
          {"power_usage_w", report.power_usage},
          {"feasible", report.feasible()},
          {"violations", violations},
          {"decisions", decisions}};
}

inline json trace_to_json(const GreedyTrace& t) {
  json it = json::array();
  for (const auto& s : t.iterations) it.push_back({{"candidate", s.candidate}, {"value", s.value}, {"accepted", s.accepted}});
  return {{"iterations", it}, {"final_subset", t.final_subset}, {"final_power_w", t.final_power}};
}

// ---------------------------------------------------------------------------
// Sweep results

inline const char* csv_header = "scheme,sweep_var,sweep_value,mean_rate_bps,stderr_bps,mean_gap,mean_time_s";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(csv_header) + "\n";
  for (const auto& r : rows) {
    out += to_string(r.scheme);
    out += ",";
    out += to_string(r.sweep_var);
    for (double v : {r.sweep_value, r.mean_rate, r.stderr_rate, r.mean_gap, r.mean_time}) {
      out += ",";
      out += format_number(v);
    }
    out += "\n";
  }
  return out;
}

inline std::vector<ResultRow> results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header) throw std::invalid_argument("results CSV: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw std::invalid_argument("results CSV: expected 7 columns");
    ResultRow r;
    r.scheme = parse_scheme(cells[0]);
    r.sweep_var = parse_sweep_variable(cells[1]);
    r.sweep_value = std::stod(cells[2]);
    r.mean_rate = std::stod(cells[3]);
    r.stderr_rate = std::stod(cells[4]);
    r.mean_gap = std::stod(cells[5]);
    r.mean_time = std::stod(cells[6]);
    rows.push_back(r);
  }
  return rows;
}

inline json results_to_json(const SweepResult& res, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const auto& r : res.rows) {
    rows.push_back({{"scheme", to_string(r.scheme)},
                    {"sweep_var", to_string(r.sweep_var)},
                    {"sweep_value", r.sweep_value},
                    {"mean_rate_bps", r.mean_rate},
                    {"stderr_bps", r.stderr_rate},
                    {"mean_gap", std::isnan(r.mean_gap) ? json(nullptr) : json(r.mean_gap)},
                    {"mean_time_s", r.mean_time},
                    {"draws", r.draws}});
  }
  return {{"config", config_to_json(cfg)},
          {"rows", rows},
          {"failed_draws", res.failed_draws},
          {"failures", res.failures},
          {"warnings", res.warnings}};
}

/// Whitespace-separated columns: sweep value, then one mean rate per scheme.
inline std::string results_to_plot_data(const std::vector<ResultRow>& rows, const std::vector<Scheme>& schemes) {
  std::vector<double> xs;
  for (const auto& r : rows)
    if (std::find(xs.begin(), xs.end(), r.sweep_value) == xs.end()) xs.push_back(r.sweep_value);
  std::string out = "#";
  out += rows.empty() ? "x" : to_string(rows.front().sweep_var);
  for (Scheme s : schemes) out += std::string(" ") + to_string(s);
  out += "\n";
  for (double x : xs) {
    out += format_number(x);
    for (Scheme s : schemes) {
      double y = std::numeric_limits<double>::quiet_NaN();
      for (const auto& r : rows)
        if (r.scheme == s && r.sweep_value == x) y = r.mean_rate;
      out += " " + format_number(y);
    }
    out += "\n";
  }
  return out;
}

/// Writes prefix.csv, prefix.json and prefix.plot.dat according to format.
inline std::vector<std::string> emit_results(const SweepResult& res, const ExperimentConfig& cfg,
                                             const std::string& prefix, const std::string& format) {
  if (res.rows.empty()) throw std::invalid_argument("emit_results: empty result table");
  std::vector<std::string> written;
  if (format == "csv" || format == "all") {
    write_text(prefix + ".csv", results_to_csv(res.rows));
    written.push_back(prefix + ".csv");
  }
  if (format == "json" || format == "all") {
    write_text(prefix + ".json", results_to_json(res, cfg).dump(2));
    written.push_back(prefix + ".json");
  }
  write_text(prefix + ".plot.dat", results_to_plot_data(res.rows, cfg.schemes));
  written.push_back(prefix + ".plot.dat");
  return written;
}

}  // namespace cran
