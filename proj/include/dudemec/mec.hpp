#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dudemec/topology.hpp"

namespace dudemec {

inline constexpr double kInfiniteLatency = std::numeric_limits<double>::infinity();

/// Joint association + subchannel decision; -1 marks "unserved" in that
/// direction (a cell attracted more MDs than it has subchannels).
struct Assignment {
  std::vector<int> ul_bs;
  std::vector<int> ul_chan;
  std::vector<int> dl_bs;
  std::vector<int> dl_chan;

  explicit Assignment(int n_devices = 0)
      : ul_bs(n_devices, -1),
        ul_chan(n_devices, -1),
        dl_bs(n_devices, -1),
        dl_chan(n_devices, -1) {}

  int n_devices() const { return static_cast<int>(ul_bs.size()); }
  bool ul_served(int k) const { return ul_bs[k] >= 0 && ul_chan[k] >= 0; }
  bool dl_served(int k) const { return dl_bs[k] >= 0 && dl_chan[k] >= 0; }
  bool served(int k) const { return ul_served(k) && dl_served(k); }
  /// Decoupled access: output bits must cross the backhaul (Eq.-13 rule).
  bool decoupled(int k) const { return served(k) && ul_bs[k] != dl_bs[k]; }
};

/// Transmit powers in linear watts. UL is per MD; DL is per (BS, subchannel)
/// with every BS splitting its maximum power equally across subchannels.
struct PowerAllocation {
  std::vector<double> ul_w;
  std::vector<std::vector<double>> dl_w;
};

struct LatencyBreakdown {
  double ul_s = 0.0;
  double exe_s = 0.0;
  double bh_s = 0.0;
  double dl_s = 0.0;
  double total_s() const { return ul_s + exe_s + bh_s + dl_s; }
};

/// Aggregates over the served MDs of one drop; unserved MDs (no subchannel in
/// one direction) are excluded from sums and counted separately so that the
/// sums stay finite and comparable across schemes.
struct MetricsReport {
  int n_devices = 0;
  int n_served = 0;
  int n_unserved = 0;
  double sum_latency_s = 0.0;
  double sum_ul_latency_s = 0.0;
  double sum_exe_latency_s = 0.0;
  double sum_bh_latency_s = 0.0;
  double sum_dl_latency_s = 0.0;
  double energy_efficiency_bps_per_w = 0.0;
  double jain_ul = 0.0;
  double jain_exe = 0.0;
  double mean_ul_rate_bps = 0.0;
  std::map<int, double> rate_percentiles_bps;  // keys {10, 20, 50, 80, 90}
};

/// Number of MDs UL-associated with each station (K-bar of the load-coupled
/// execution model); only MDs that actually hold a subchannel transmit/occupy
/// the cloudlet.
std::vector<int> server_loads(const Assignment& asg, int n_stations);

/// Co-channel UL interference received at MD k's serving BS (Eq.-7 style):
/// all other transmitting MDs on the same subchannel, any cell.
double ul_interference_w(int k, const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch);
double ul_sinr(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg);
double ul_rate(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg);

/// DL interference at MD k: other BSs actively transmitting on k's DL
/// subchannel (Eq.-9 style).
double dl_interference_w(int k, const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch);
double dl_sinr(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg);
double dl_rate(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg);

/// Four-component latency of MD k. Unserved directions yield the
/// infinite-latency sentinel in the affected components.
LatencyBreakdown md_latency(int k, const Assignment& asg, const PowerAllocation& powers,
                            const ChannelTensor& ch, const NetworkConfig& cfg,
                            const std::vector<Station>& stations,
                            const std::vector<Device>& devices,
                            const std::vector<int>& loads);

/// Network UL energy efficiency: sum of UL rates over sum of UL transmit
/// powers (linear), served MDs only. Throws std::domain_error when the total
/// power is zero.
double energy_efficiency(const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch, const NetworkConfig& cfg);

/// (Σx)² / (K·Σx²). Throws std::invalid_argument on empty or all-zero input.
double jain_index(const std::vector<double>& values);

/// Nearest-rank empirical percentiles at {10, 20, 50, 80, 90}. Throws
/// std::invalid_argument on empty input.
std::map<int, double> rate_percentiles(const std::vector<double>& rates);

/// Full per-drop evaluation of one scheme's assignment + powers.
MetricsReport compute_metrics(const std::vector<Station>& stations,
                              const std::vector<Device>& devices, const NetworkConfig& cfg,
                              const ChannelTensor& ch, const Assignment& asg,
                              const PowerAllocation& powers);

/// Structural checks: indices in range, one subchannel per MD per direction,
/// intra-cell orthogonality in both directions. Throws std::invalid_argument
/// with a description of the first violation.
void validate_assignment(const Assignment& asg, int n_stations, int n_subchannels);

}  // namespace dudemec
