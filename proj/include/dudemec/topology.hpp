#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dudemec/task.hpp"

namespace dudemec {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s, fixed for reproducibility

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Scenario parameters for one Monte-Carlo drop. Defaults follow the common
/// two-tier evaluation setup: one macro cell whose area is the inverse of the
/// macro density, uniform node placement, log-normal shadowing and Rayleigh
/// fading on 25 subchannels.
struct NetworkConfig {
  // Geometry. The default area is one MBS cell: 1 / mbs_density.
  double area_width_m = 447.21359549995793;
  double area_height_m = 447.21359549995793;
  double mbs_density_per_km2 = 5.0;
  double sbs_density_per_km2 = 25.0;
  double md_density_per_km2 = 250.0;
  /// When set, places exactly this many SBSs instead of the density-derived
  /// count (used by parameter sweeps).
  std::optional<int> sbs_count_override;

  // Radio.
  double carrier_frequency_hz = 2e9;
  double reference_distance_m = 1.0;  // close-in distance d0
  double pathloss_exponent = 3.0;
  double shadowing_mean_db = 0.0;
  double shadowing_std_db = 4.0;
  double ul_bandwidth_hz = 5e6;
  double dl_bandwidth_hz = 5e6;
  int n_subchannels = 25;
  double noise_density_dbm_hz = -174.0;

  // Node capabilities applied at generation time.
  double mbs_power_dbm = 46.0;
  double sbs_power_dbm = 30.0;
  double md_power_dbm = 23.0;
  double mbs_compute_cps = 36e9;  // F^M, CPU cycles/s
  double sbs_compute_cps = 3.6e9; // F^S
  double backhaul_capacity_bps = 1e7;  // C^bh

  std::uint64_t seed = 0;

  double area_km2() const { return area_width_m * area_height_m * 1e-6; }
  double subchannel_bandwidth_ul_hz() const { return ul_bandwidth_hz / n_subchannels; }
  double subchannel_bandwidth_dl_hz() const { return dl_bandwidth_hz / n_subchannels; }
  /// Noise power over one subchannel, sigma^2 = N0 * B, in watts.
  double noise_power_ul_w() const {
    return dbm_to_watt(noise_density_dbm_hz) * subchannel_bandwidth_ul_hz();
  }
  double noise_power_dl_w() const {
    return dbm_to_watt(noise_density_dbm_hz) * subchannel_bandwidth_dl_hz();
  }

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

enum class StationKind { MBS, SBS };

/// Base station with a co-located cloudlet. Station 0 is always the MBS.
struct Station {
  int id = 0;
  StationKind kind = StationKind::SBS;
  double x_m = 0.0;
  double y_m = 0.0;
  double max_tx_power_dbm = 0.0;
  double compute_capacity_cps = 0.0;  // F-bar of the attached cloudlet
};

struct Device {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double max_tx_power_dbm = 0.0;
  TaskSpec task;

  double max_tx_power_w() const { return dbm_to_watt(max_tx_power_dbm); }
};

enum class Direction : int { UL = 0, DL = 1 };

/// Channel state for one drop: large-scale loss (path-loss + shadowing) per
/// MD-BS link and direction, and the full linear power gain per
/// (MD, BS, subchannel, direction) including Rayleigh fading.
class ChannelTensor {
 public:
  ChannelTensor() = default;
  ChannelTensor(int n_devices, int n_stations, int n_subchannels);

  int n_devices() const { return k_; }
  int n_stations() const { return m_; }
  int n_subchannels() const { return n_; }

  double gain(int k, int m, int n, Direction d) const {
    return gain_[gain_index(k, m, n, d)];
  }
  double& gain(int k, int m, int n, Direction d) { return gain_[gain_index(k, m, n, d)]; }

  /// Large-scale loss in dB (Eq.-style path-loss plus the link's shadowing
  /// draw; no fading). This is what open-loop power control sees.
  double pathloss_db(int k, int m, Direction d) const { return pl_db_[pl_index(k, m, d)]; }
  double& pathloss_db(int k, int m, Direction d) { return pl_db_[pl_index(k, m, d)]; }

  double distance_m(int k, int m) const { return dist_[k * m_ + m]; }
  double& distance_m(int k, int m) { return dist_[k * m_ + m]; }

 private:
  std::size_t gain_index(int k, int m, int n, Direction d) const {
    return ((static_cast<std::size_t>(k) * m_ + m) * n_ + n) * 2 + static_cast<int>(d);
  }
  std::size_t pl_index(int k, int m, Direction d) const {
    return (static_cast<std::size_t>(k) * m_ + m) * 2 + static_cast<int>(d);
  }

  int k_ = 0, m_ = 0, n_ = 0;
  std::vector<double> gain_;
  std::vector<double> pl_db_;
  std::vector<double> dist_;
};

/// Close-in reference path-loss model in dB:
///   PL(d) = 20 log10(4 pi d0 f / c) + 10 phi log10(d / d0) + chi.
/// Distances below d0 are clamped to d0; d <= 0 throws std::domain_error.
double pathloss_db(double distance_m, const NetworkConfig& cfg, double shadowing_db);

/// Places 1 MBS plus round(density * area) SBSs and MDs uniformly over the
/// area. Deterministic in cfg.seed. Throws std::invalid_argument when the
/// rounded device count is zero.
std::pair<std::vector<Station>, std::vector<Device>> generate_topology(const NetworkConfig& cfg);

/// Draws shadowing per (MD, BS, direction) link and Rayleigh power fading per
/// (MD, BS, subchannel, direction); UL and DL are independent (FDD bands).
ChannelTensor sample_channels(const std::vector<Station>& stations,
                              const std::vector<Device>& devices, const NetworkConfig& cfg,
                              std::uint64_t seed);

/// One row per node: id, kind, x, y. RFC-4180 CSV, for plotting.
std::string topology_csv(const std::vector<Station>& stations,
                         const std::vector<Device>& devices);

}  // namespace dudemec
