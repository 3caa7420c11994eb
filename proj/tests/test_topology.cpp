#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dudemec/topology.hpp"

using namespace dudemec;

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dbm_to_watt(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(dbm_to_watt(23.0) == doctest::Approx(0.19952623149688797).epsilon(1e-12));
  CHECK(watt_to_dbm(1.0) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(linear_to_db(100.0) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("path loss matches the close-in reference model") {
  NetworkConfig cfg;  // f = 2 GHz, d0 = 1 m, phi = 3

  // Independently computed: 20 log10(4 pi * 1 * 2e9 / 2.998e8).
  CHECK(pathloss_db(1.0, cfg, 0.0) == doctest::Approx(38.46816462347633).epsilon(1e-12));
  // + 10 * 3 * log10(100) at 100 m.
  CHECK(pathloss_db(100.0, cfg, 0.0) == doctest::Approx(98.46816462347633).epsilon(1e-12));
  // 30 dB per decade.
  CHECK(pathloss_db(100.0, cfg, 0.0) - pathloss_db(10.0, cfg, 0.0) ==
        doctest::Approx(30.0).epsilon(1e-12));
  // Shadowing enters additively.
  CHECK(pathloss_db(50.0, cfg, 4.5) - pathloss_db(50.0, cfg, 0.0) ==
        doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("distances below the reference clamp to it") {
  NetworkConfig cfg;
  CHECK(pathloss_db(0.25, cfg, 0.0) == pathloss_db(1.0, cfg, 0.0));
  CHECK_THROWS_AS(pathloss_db(0.0, cfg, 0.0), std::domain_error);
  CHECK_THROWS_AS(pathloss_db(-1.0, cfg, 0.0), std::domain_error);
}

TEST_CASE("topology node counts follow the densities") {
  NetworkConfig cfg;
  cfg.seed = 99;
  const auto [stations, devices] = generate_topology(cfg);
  // 0.2 km2 area: 25/km2 -> 5 SBSs, 250/km2 -> 50 MDs, plus the MBS.
  REQUIRE(stations.size() == 6);
  CHECK(devices.size() == 50);
  CHECK(stations[0].kind == StationKind::MBS);
  CHECK(stations[0].x_m == doctest::Approx(cfg.area_width_m / 2));
  CHECK(stations[0].y_m == doctest::Approx(cfg.area_height_m / 2));
  for (std::size_t i = 1; i < stations.size(); ++i) {
    CHECK(stations[i].kind == StationKind::SBS);
    CHECK(stations[i].compute_capacity_cps == doctest::Approx(3.6e9));
    CHECK(stations[i].x_m >= 0.0);
    CHECK(stations[i].x_m <= cfg.area_width_m);
  }
  CHECK(stations[0].compute_capacity_cps == doctest::Approx(36e9));
  CHECK(stations[0].max_tx_power_dbm == doctest::Approx(46.0));
  for (const auto& d : devices) {
    CHECK(d.max_tx_power_dbm == doctest::Approx(23.0));
    CHECK(d.x_m >= 0.0);
    CHECK(d.x_m <= cfg.area_width_m);
    CHECK(d.y_m >= 0.0);
    CHECK(d.y_m <= cfg.area_height_m);
  }
}

TEST_CASE("SBS count override replaces the density-derived count") {
  NetworkConfig cfg;
  cfg.sbs_count_override = 17;
  cfg.seed = 3;
  const auto [stations, devices] = generate_topology(cfg);
  CHECK(stations.size() == 18);
  CHECK(devices.size() == 50);
}

TEST_CASE("topology generation is a pure function of the seed") {
  NetworkConfig cfg;
  cfg.seed = 1234;
  const auto a = generate_topology(cfg);
  const auto b = generate_topology(cfg);
  REQUIRE(a.second.size() == b.second.size());
  for (std::size_t i = 0; i < a.second.size(); ++i) {
    CHECK(a.second[i].x_m == b.second[i].x_m);
    CHECK(a.second[i].y_m == b.second[i].y_m);
  }
  cfg.seed = 1235;
  const auto c = generate_topology(cfg);
  bool any_different = false;
  for (std::size_t i = 0; i < a.second.size(); ++i) {
    any_different = any_different || a.second[i].x_m != c.second[i].x_m;
  }
  CHECK(any_different);
}

TEST_CASE("channel sampling: fading is unit-mean, shadowing has the configured spread") {
  NetworkConfig cfg;
  cfg.seed = 7;
  const auto [stations, devices] = generate_topology(cfg);
  const ChannelTensor ch = sample_channels(stations, devices, cfg, 42);

  REQUIRE(ch.n_devices() == 50);
  REQUIRE(ch.n_stations() == 6);
  REQUIRE(ch.n_subchannels() == 25);

  double fading_sum = 0.0;
  int fading_count = 0;
  std::vector<double> shadow_ul, shadow_dl;
  for (int k = 0; k < ch.n_devices(); ++k) {
    for (int m = 0; m < ch.n_stations(); ++m) {
      const double dist = std::max(ch.distance_m(k, m), cfg.reference_distance_m);
      const double pl_det = pathloss_db(dist, cfg, 0.0);
      shadow_ul.push_back(ch.pathloss_db(k, m, Direction::UL) - pl_det);
      shadow_dl.push_back(ch.pathloss_db(k, m, Direction::DL) - pl_det);
      for (int n = 0; n < ch.n_subchannels(); ++n) {
        for (Direction d : {Direction::UL, Direction::DL}) {
          const double g = ch.gain(k, m, n, d);
          CHECK(g > 0.0);
          fading_sum += g / db_to_linear(-ch.pathloss_db(k, m, d));
          ++fading_count;
        }
      }
    }
  }
  // 15000 exponential draws: the sample mean sits within a few percent of 1.
  CHECK(fading_sum / fading_count == doctest::Approx(1.0).epsilon(0.05));

  auto stddev = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
  };
  CHECK(stddev(shadow_ul) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(stddev(shadow_dl) == doctest::Approx(4.0).epsilon(0.15));

  // FDD: the two directions draw independent shadowing.
  bool directions_differ = false;
  for (std::size_t i = 0; i < shadow_ul.size(); ++i) {
    directions_differ = directions_differ || shadow_ul[i] != shadow_dl[i];
  }
  CHECK(directions_differ);
}

TEST_CASE("channel sampling is deterministic in the seed") {
  NetworkConfig cfg;
  cfg.seed = 11;
  const auto [stations, devices] = generate_topology(cfg);
  const ChannelTensor a = sample_channels(stations, devices, cfg, 5);
  const ChannelTensor b = sample_channels(stations, devices, cfg, 5);
  const ChannelTensor c = sample_channels(stations, devices, cfg, 6);
  CHECK(a.gain(3, 2, 7, Direction::UL) == b.gain(3, 2, 7, Direction::UL));
  CHECK(a.gain(3, 2, 7, Direction::UL) != c.gain(3, 2, 7, Direction::UL));
}

TEST_CASE("topology CSV lists every node once") {
  NetworkConfig cfg;
  cfg.seed = 2;
  const auto [stations, devices] = generate_topology(cfg);
  const std::string csv = topology_csv(stations, devices);
  CHECK(csv.rfind("node_id,kind,x_m,y_m", 0) == 0);
  const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 1 + stations.size() + devices.size());
}
