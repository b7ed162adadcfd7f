#pragma once

// Random network layouts and frequency-selective channel gains:
// 38 + 30 log10(d) dB path loss, log-normal shadowing, Rayleigh taps with an
// exponential power delay profile, and an N-point DFT to the subchannels.

#include <cran/model.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cran {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Preset { small, large, custom };

struct TopologyConfig {
  Preset preset = Preset::small;
  std::size_t num_users = 3;

  // small preset: one RRH at the origin, four on the corners of a square
  double rrh_square_side = 375.0;
  double user_square_side = 750.0;  // also used by the custom preset

  // large preset: grid of square clusters, five RRHs per cluster
  std::size_t cluster_grid = 5;
  double region_side = 2000.0;
  double cluster_rrh_square_side = 200.0;
  std::size_t active_clusters = 0;  // 0 keeps every cluster; otherwise the first ones in row-major order

  std::vector<Point> custom_rrhs;

  void validate() const {
    if (num_users == 0) throw std::invalid_argument("topology: need at least one user");
    if (!(user_square_side > 0.0) || !(rrh_square_side > 0.0) || !(region_side > 0.0) ||
        !(cluster_rrh_square_side > 0.0))
      throw std::invalid_argument("topology: region sides must be positive");
    if (preset == Preset::large) {
      if (cluster_grid == 0) throw std::invalid_argument("topology: cluster grid must be positive");
      if (active_clusters > cluster_grid * cluster_grid)
        throw std::invalid_argument("topology: more active clusters than the grid holds");
      if (cluster_rrh_square_side >= region_side / static_cast<double>(cluster_grid))
        throw std::invalid_argument("topology: cluster RRH square must fit inside its cluster");
    }
    if (preset == Preset::custom && custom_rrhs.empty())
      throw std::invalid_argument("topology: custom preset needs RRH positions");
  }
};

struct Topology {
  std::vector<Point> rrh_pos;
  std::vector<Point> user_pos;
  std::vector<std::size_t> cluster_of_rrh;
  std::vector<std::size_t> cluster_of_user;
  std::vector<Point> cluster_centers;

  std::size_t num_clusters() const { return cluster_centers.size(); }
};

/// splitmix64 step, used to derive independent per-draw seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return mix_seed(mix_seed(base ^ mix_seed(stream)) + index);
}

namespace detail {

inline std::vector<Point> five_rrh_cross(Point c, double side) {
  const double h = side / 2.0;
  return {{c.x, c.y}, {c.x - h, c.y - h}, {c.x + h, c.y - h}, {c.x - h, c.y + h}, {c.x + h, c.y + h}};
}

}  // namespace detail

inline Topology generate_topology(const TopologyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Topology t;
  std::mt19937_64 rng(seed);

  if (cfg.preset == Preset::large) {
    const std::size_t total = cfg.cluster_grid * cfg.cluster_grid;
    const std::size_t used = cfg.active_clusters ? cfg.active_clusters : total;
    const double side = cfg.region_side / static_cast<double>(cfg.cluster_grid);
    const double origin = -cfg.region_side / 2.0;
    for (std::size_t c = 0; c < used; ++c) {
      const std::size_t row = c / cfg.cluster_grid;
      const std::size_t col = c % cfg.cluster_grid;
      const Point center{origin + (static_cast<double>(col) + 0.5) * side,
                         origin + (static_cast<double>(row) + 0.5) * side};
      t.cluster_centers.push_back(center);
      for (const Point& p : detail::five_rrh_cross(center, cfg.cluster_rrh_square_side)) {
        t.rrh_pos.push_back(p);
        t.cluster_of_rrh.push_back(c);
      }
    }
    // Users are uniform over the union of the active cluster squares.
    std::uniform_int_distribution<std::size_t> pick(0, used - 1);
    std::uniform_real_distribution<double> offset(-side / 2.0, side / 2.0);
    for (std::size_t k = 0; k < cfg.num_users; ++k) {
      const std::size_t c = pick(rng);
      const Point p{t.cluster_centers[c].x + offset(rng), t.cluster_centers[c].y + offset(rng)};
      t.user_pos.push_back(p);
    }
    // Each user belongs to the cluster square containing it; the nearest
    // centroid decides points on shared edges.
    for (const Point& u : t.user_pos) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < used; ++c)
        if (distance(u, t.cluster_centers[c]) < distance(u, t.cluster_centers[best])) best = c;
      t.cluster_of_user.push_back(best);
    }
    return t;
  }

  t.rrh_pos = cfg.preset == Preset::small ? detail::five_rrh_cross({0.0, 0.0}, cfg.rrh_square_side) : cfg.custom_rrhs;
  t.cluster_of_rrh.assign(t.rrh_pos.size(), 0);
  t.cluster_centers.push_back({0.0, 0.0});
  std::uniform_real_distribution<double> coord(-cfg.user_square_side / 2.0, cfg.user_square_side / 2.0);
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    const double x = coord(rng);
    const double y = coord(rng);
    t.user_pos.push_back({x, y});
  }
  t.cluster_of_user.assign(cfg.num_users, 0);
  return t;
}

struct ChannelModel {
  double pathloss_intercept_db = 38.0;
  double pathloss_slope_db = 30.0;  // per decade of distance in meters
  double shadowing_std_db = 6.0;
  double min_distance = 1.0;
  double carrier_hz = 2e9;  // informational; the intercept already accounts for it
};

struct ChannelDraw {
  ChannelGains gains;
  std::uint64_t seed = 0;
  std::vector<double> loss_db;  // (rrh, user) row-major: path loss plus shadowing
  std::vector<double> shadowing_db;
};

/// Thermal noise per subchannel in watts: PSD (dBm/Hz) + 10 log10(B/N) + noise figure.
inline double subchannel_noise_power(double bandwidth, std::size_t subchannels, double psd_dbm_hz = -174.0,
                                     double noise_figure_db = 6.0) {
  const double dbm = psd_dbm_hz + 10.0 * std::log10(bandwidth / static_cast<double>(subchannels)) + noise_figure_db;
  return dbm_to_watts(dbm);
}

/// Normalized exponential power delay profile with decay constant taps/3.
inline std::vector<double> exponential_pdp(std::size_t taps) {
  std::vector<double> v(taps);
  const double tau = static_cast<double>(taps) / 3.0;
  double total = 0.0;
  for (std::size_t l = 0; l < taps; ++l) total += v[l] = std::exp(-static_cast<double>(l) / tau);
  for (double& x : v) x /= total;
  return v;
}

inline ChannelDraw generate_channel(const Topology& topo, std::size_t subchannels, std::uint64_t seed,
                                    const ChannelModel& model = {}) {
  if (subchannels == 0 || subchannels % 4 != 0)
    throw std::invalid_argument("generate_channel: number of subchannels must be a positive multiple of 4");
  const std::size_t rrhs = topo.rrh_pos.size();
  const std::size_t users = topo.user_pos.size();
  const std::size_t taps = subchannels / 4;
  const std::vector<double> pdp = exponential_pdp(taps);

  // twiddle[n * taps + l] = exp(-j 2 pi n l / N)
  std::vector<std::complex<double>> twiddle(subchannels * taps);
  for (std::size_t n = 0; n < subchannels; ++n)
    for (std::size_t l = 0; l < taps; ++l) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((n * l) % subchannels) /
                           static_cast<double>(subchannels);
      twiddle[n * taps + l] = std::polar(1.0, phase);
    }

  ChannelDraw draw;
  draw.seed = seed;
  draw.gains = ChannelGains(rrhs, users, subchannels);
  draw.loss_db.resize(rrhs * users);
  draw.shadowing_db.resize(rrhs * users);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> tap(taps);
  for (std::size_t m = 0; m < rrhs; ++m) {
    for (std::size_t k = 0; k < users; ++k) {
      const double d = std::max(distance(topo.rrh_pos[m], topo.user_pos[k]), model.min_distance);
      const double shadow = model.shadowing_std_db * normal(rng);
      const double loss = model.pathloss_intercept_db + model.pathloss_slope_db * std::log10(d) + shadow;
      draw.shadowing_db[m * users + k] = shadow;
      draw.loss_db[m * users + k] = loss;
      const double scale = std::pow(10.0, -loss / 10.0);
      for (std::size_t l = 0; l < taps; ++l) {
        const double s = std::sqrt(pdp[l] / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        tap[l] = {s * re, s * im};
      }
      for (std::size_t n = 0; n < subchannels; ++n) {
        std::complex<double> h = 0.0;
        for (std::size_t l = 0; l < taps; ++l) h += tap[l] * twiddle[n * taps + l];
        draw.gains(m, k, n) = scale * std::norm(h);
      }
    }
  }
  return draw;
}

}  // namespace cran
