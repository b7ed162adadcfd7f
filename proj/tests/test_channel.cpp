#include <cran/channel.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

using namespace cran;

namespace {

double sample_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Topology pair_topology(double separation) {
  Topology t;
  t.rrh_pos = {{0.0, 0.0}, {50.0, 0.0}};
  t.user_pos = {{separation, 0.0}};
  t.cluster_of_rrh = {0, 0};
  t.cluster_of_user = {0};
  t.cluster_centers = {{0.0, 0.0}};
  return t;
}

}  // namespace

TEST(Topology, SmallPresetLayout) {
  TopologyConfig cfg;
  cfg.num_users = 40;
  const Topology t = generate_topology(cfg, 7);
  ASSERT_EQ(t.rrh_pos.size(), 5u);
  const double expected[5][2] = {{0, 0}, {-187.5, -187.5}, {187.5, -187.5}, {-187.5, 187.5}, {187.5, 187.5}};
  for (std::size_t m = 0; m < 5; ++m) {
    EXPECT_EQ(t.rrh_pos[m].x, expected[m][0]);
    EXPECT_EQ(t.rrh_pos[m].y, expected[m][1]);
  }
  ASSERT_EQ(t.user_pos.size(), 40u);
  for (const Point& u : t.user_pos) {
    EXPECT_LE(std::abs(u.x), 375.0);
    EXPECT_LE(std::abs(u.y), 375.0);
  }
  EXPECT_EQ(t.num_clusters(), 1u);
}

TEST(Topology, LargePresetLayout) {
  TopologyConfig cfg;
  cfg.preset = Preset::large;
  cfg.num_users = 120;
  const Topology t = generate_topology(cfg, 8);
  ASSERT_EQ(t.rrh_pos.size(), 125u);
  ASSERT_EQ(t.num_clusters(), 25u);
  std::vector<int> per_cluster(25, 0);
  for (std::size_t m = 0; m < 125; ++m) {
    const std::size_t c = t.cluster_of_rrh[m];
    ++per_cluster[c];
    EXPECT_LE(distance(t.rrh_pos[m], t.cluster_centers[c]), 100.0 * std::numbers::sqrt2 + 1e-9);
  }
  for (int n : per_cluster) EXPECT_EQ(n, 5);
  for (std::size_t k = 0; k < 120; ++k) {
    const Point& u = t.user_pos[k];
    EXPECT_LE(std::abs(u.x), 1000.0);
    EXPECT_LE(std::abs(u.y), 1000.0);
    const Point& c = t.cluster_centers[t.cluster_of_user[k]];
    EXPECT_LE(std::abs(u.x - c.x), 200.0 + 1e-9);
    EXPECT_LE(std::abs(u.y - c.y), 200.0 + 1e-9);
  }
}

TEST(Topology, ActiveClustersKeepsTheFirstOnes) {
  TopologyConfig cfg;
  cfg.preset = Preset::large;
  cfg.num_users = 10;
  cfg.active_clusters = 2;
  const Topology t = generate_topology(cfg, 9);
  EXPECT_EQ(t.rrh_pos.size(), 10u);
  EXPECT_EQ(t.num_clusters(), 2u);
  for (std::size_t c : t.cluster_of_user) EXPECT_LT(c, 2u);
}

TEST(Topology, InvalidConfigsThrow) {
  TopologyConfig cfg;
  cfg.num_users = 0;
  EXPECT_THROW(generate_topology(cfg, 1), std::invalid_argument);
  cfg.num_users = 1;
  cfg.preset = Preset::custom;
  EXPECT_THROW(generate_topology(cfg, 1), std::invalid_argument);
  cfg.preset = Preset::large;
  cfg.active_clusters = 26;
  EXPECT_THROW(generate_topology(cfg, 1), std::invalid_argument);
}

TEST(Channel, SameSeedSameDraw) {
  TopologyConfig cfg;
  const Topology a = generate_topology(cfg, 11);
  const Topology b = generate_topology(cfg, 11);
  ASSERT_EQ(a.user_pos.size(), b.user_pos.size());
  for (std::size_t k = 0; k < a.user_pos.size(); ++k) {
    EXPECT_EQ(a.user_pos[k].x, b.user_pos[k].x);
    EXPECT_EQ(a.user_pos[k].y, b.user_pos[k].y);
  }
  const ChannelDraw x = generate_channel(a, 64, 12);
  const ChannelDraw y = generate_channel(a, 64, 12);
  EXPECT_EQ(x.gains.data(), y.gains.data());
  const ChannelDraw z = generate_channel(a, 64, 13);
  EXPECT_NE(x.gains.data(), z.gains.data());
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
}

TEST(Channel, PathLossAtHundredMeters) {
  ChannelModel model;
  model.shadowing_std_db = 0.0;
  const ChannelDraw d = generate_channel(pair_topology(100.0), 4, 1, model);
  EXPECT_NEAR(d.loss_db[0], 98.0, 1e-12);
  EXPECT_NEAR(d.loss_db[1], 38.0 + 30.0 * std::log10(50.0), 1e-12);
}

TEST(Channel, SubchannelNoisePower) {
  EXPECT_NEAR(watts_to_dbm(subchannel_noise_power(20e6, 64)), -113.05, 0.005);
  EXPECT_NEAR(watts_to_dbm(subchannel_noise_power(20e6, 64, -174.0, 0.0)),
              -174.0 + 10.0 * std::log10(312500.0), 1e-12);
}

TEST(Channel, SubchannelCountMustBeMultipleOfFour) {
  const Topology t = pair_topology(100.0);
  EXPECT_THROW(generate_channel(t, 6, 1), std::invalid_argument);
  EXPECT_THROW(generate_channel(t, 0, 1), std::invalid_argument);
  EXPECT_NO_THROW(generate_channel(t, 8, 1));
}

TEST(Channel, PowerDelayProfileIsNormalized) {
  for (std::size_t taps : {1u, 4u, 16u, 64u}) {
    const auto pdp = exponential_pdp(taps);
    double total = 0.0;
    for (std::size_t l = 0; l < taps; ++l) {
      total += pdp[l];
      if (l > 0) {
        EXPECT_LT(pdp[l], pdp[l - 1]);
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Channel, MeanGainMatchesLargeScaleLoss) {
  const Topology t = pair_topology(120.0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; s < 25000; ++s) {
    const ChannelDraw d = generate_channel(t, 4, derive_seed(99, 0, s));
    const double scale = std::pow(10.0, -d.loss_db[0] / 10.0);
    for (std::size_t n = 0; n < 4; ++n, ++count) sum += d.gains(0, 0, n) / scale;
  }
  EXPECT_EQ(count, 100000u);
  EXPECT_NEAR(sum / static_cast<double>(count), 1.0, 0.01);
}

TEST(Channel, FrequencyCorrelationFollowsDelayProfile) {
  const std::size_t subchannels = 64;
  const Topology t = pair_topology(120.0);
  const auto pdp = exponential_pdp(subchannels / 4);
  // For Rayleigh taps, corr(|h_n|^2, |h_{n+s}|^2) = |sum_l pdp_l e^{-j 2 pi s l / N}|^2.
  auto expected = [&](std::size_t shift) {
    std::complex<double> rho = 0.0;
    for (std::size_t l = 0; l < pdp.size(); ++l)
      rho += pdp[l] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(shift * l) / subchannels);
    return std::norm(rho);
  };
  std::vector<double> base, near, far;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const ChannelDraw d = generate_channel(t, subchannels, derive_seed(98, 0, s));
    const double scale = std::pow(10.0, -d.loss_db[0] / 10.0);
    base.push_back(d.gains(0, 0, 0) / scale);
    near.push_back(d.gains(0, 0, 1) / scale);
    far.push_back(d.gains(0, 0, subchannels / 2) / scale);
  }
  const double c_near = sample_correlation(base, near);
  const double c_far = sample_correlation(base, far);
  EXPECT_GT(c_near, c_far);
  EXPECT_NEAR(c_near, expected(1), 0.05);
  EXPECT_NEAR(c_far, expected(subchannels / 2), 0.05);
}

TEST(Channel, LinksAreIndependent) {
  const Topology t = pair_topology(120.0);
  std::vector<double> first, second, shadow_a, shadow_b;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const ChannelDraw d = generate_channel(t, 4, derive_seed(97, 0, s));
    first.push_back(d.gains(0, 0, 0) * std::pow(10.0, d.loss_db[0] / 10.0));
    second.push_back(d.gains(1, 0, 0) * std::pow(10.0, d.loss_db[1] / 10.0));
    shadow_a.push_back(d.shadowing_db[0]);
    shadow_b.push_back(d.shadowing_db[1]);
  }
  EXPECT_LT(std::abs(sample_correlation(first, second)), 0.05);
  EXPECT_LT(std::abs(sample_correlation(shadow_a, shadow_b)), 0.05);
}

TEST(Channel, GainsAreFiniteAndPositive) {
  TopologyConfig cfg;
  cfg.preset = Preset::large;
  cfg.num_users = 30;
  const Topology t = generate_topology(cfg, 5);
  const ChannelDraw d = generate_channel(t, 64, 6);
  for (double g : d.gains.data()) {
    ASSERT_TRUE(std::isfinite(g));
    ASSERT_GT(g, 0.0);
  }
  std::set<double> distinct(d.gains.data().begin(), d.gains.data().end());
  EXPECT_GT(distinct.size(), d.gains.data().size() / 2);
}
