#include "dudemec/mec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dudemec {

std::vector<int> server_loads(const Assignment& asg, int n_stations) {
  std::vector<int> loads(n_stations, 0);
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (asg.ul_served(k)) ++loads[asg.ul_bs[k]];
  }
  return loads;
}

double ul_interference_w(int k, const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch) {
  const int m = asg.ul_bs[k];
  const int n = asg.ul_chan[k];
  double interference = 0.0;
  for (int j = 0; j < asg.n_devices(); ++j) {
    if (j == k || !asg.ul_served(j) || asg.ul_chan[j] != n) continue;
    interference += powers.ul_w[j] * ch.gain(j, m, n, Direction::UL);
  }
  return interference;
}

double ul_sinr(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg) {
  if (!asg.ul_served(k)) return 0.0;
  const int m = asg.ul_bs[k];
  const int n = asg.ul_chan[k];
  const double signal = powers.ul_w[k] * ch.gain(k, m, n, Direction::UL);
  return signal / (ul_interference_w(k, asg, powers, ch) + cfg.noise_power_ul_w());
}

double ul_rate(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg) {
  if (!asg.ul_served(k)) return 0.0;
  return cfg.subchannel_bandwidth_ul_hz() * std::log2(1.0 + ul_sinr(k, asg, powers, ch, cfg));
}

double dl_interference_w(int k, const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch) {
  const int m = asg.dl_bs[k];
  const int n = asg.dl_chan[k];
  // A BS interferes on subchannel n only while actually transmitting on it,
  // i.e. when it serves one of its own MDs there.
  std::vector<char> active(static_cast<std::size_t>(ch.n_stations()), 0);
  for (int j = 0; j < asg.n_devices(); ++j) {
    if (j != k && asg.dl_served(j) && asg.dl_chan[j] == n) active[asg.dl_bs[j]] = 1;
  }
  double interference = 0.0;
  for (int i = 0; i < ch.n_stations(); ++i) {
    if (i == m || !active[i]) continue;
    interference += powers.dl_w[i][n] * ch.gain(k, i, n, Direction::DL);
  }
  return interference;
}

double dl_sinr(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg) {
  if (!asg.dl_served(k)) return 0.0;
  const int m = asg.dl_bs[k];
  const int n = asg.dl_chan[k];
  const double signal = powers.dl_w[m][n] * ch.gain(k, m, n, Direction::DL);
  return signal / (dl_interference_w(k, asg, powers, ch) + cfg.noise_power_dl_w());
}

double dl_rate(int k, const Assignment& asg, const PowerAllocation& powers,
               const ChannelTensor& ch, const NetworkConfig& cfg) {
  if (!asg.dl_served(k)) return 0.0;
  return cfg.subchannel_bandwidth_dl_hz() * std::log2(1.0 + dl_sinr(k, asg, powers, ch, cfg));
}

LatencyBreakdown md_latency(int k, const Assignment& asg, const PowerAllocation& powers,
                            const ChannelTensor& ch, const NetworkConfig& cfg,
                            const std::vector<Station>& stations,
                            const std::vector<Device>& devices,
                            const std::vector<int>& loads) {
  const TaskSpec& task = devices[k].task;
  LatencyBreakdown lb;
  if (asg.ul_served(k)) {
    const double r_ul = ul_rate(k, asg, powers, ch, cfg);
    lb.ul_s = r_ul > 0.0 ? task.input_bits / r_ul : kInfiniteLatency;
    const int m = asg.ul_bs[k];
    const double share = stations[m].compute_capacity_cps / std::max(loads[m], 1);
    lb.exe_s = task.cycles() / share;
  } else {
    lb.ul_s = kInfiniteLatency;
    lb.exe_s = kInfiniteLatency;
  }
  lb.bh_s = asg.decoupled(k) ? task.output_bits() / cfg.backhaul_capacity_bps : 0.0;
  if (asg.dl_served(k)) {
    const double r_dl = dl_rate(k, asg, powers, ch, cfg);
    lb.dl_s = r_dl > 0.0 ? task.output_bits() / r_dl : kInfiniteLatency;
  } else {
    lb.dl_s = kInfiniteLatency;
  }
  return lb;
}

double energy_efficiency(const Assignment& asg, const PowerAllocation& powers,
                         const ChannelTensor& ch, const NetworkConfig& cfg) {
  double sum_rate = 0.0;
  double sum_power = 0.0;
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (!asg.ul_served(k)) continue;
    sum_rate += ul_rate(k, asg, powers, ch, cfg);
    sum_power += powers.ul_w[k];
  }
  if (sum_power <= 0.0) {
    throw std::domain_error("energy_efficiency: total UL transmit power is zero");
  }
  return sum_rate / sum_power;
}

double jain_index(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("jain_index: empty input");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : values) {
    if (x < 0.0) throw std::invalid_argument("jain_index: negative value");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) throw std::invalid_argument("jain_index: all-zero input");
  return (sum * sum) / (static_cast<double>(values.size()) * sum_sq);
}

std::map<int, double> rate_percentiles(const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("rate_percentiles: empty input");
  std::vector<double> sorted = rates;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::map<int, double> out;
  for (int p : {10, 20, 50, 80, 90}) {
    // nearest-rank: smallest value with at least p% of the sample at or below
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    out[p] = sorted[std::max<std::size_t>(rank, 1) - 1];
  }
  return out;
}

MetricsReport compute_metrics(const std::vector<Station>& stations,
                              const std::vector<Device>& devices, const NetworkConfig& cfg,
                              const ChannelTensor& ch, const Assignment& asg,
                              const PowerAllocation& powers) {
  MetricsReport rep;
  rep.n_devices = asg.n_devices();
  const std::vector<int> loads = server_loads(asg, static_cast<int>(stations.size()));

  std::vector<double> ul_latencies;
  std::vector<double> exe_latencies;
  std::vector<double> ul_rates;
  double sum_rate = 0.0;
  double sum_power = 0.0;
  for (int k = 0; k < asg.n_devices(); ++k) {
    const LatencyBreakdown lb = md_latency(k, asg, powers, ch, cfg, stations, devices, loads);
    if (!std::isfinite(lb.total_s())) {
      ++rep.n_unserved;
      continue;
    }
    ++rep.n_served;
    rep.sum_latency_s += lb.total_s();
    rep.sum_ul_latency_s += lb.ul_s;
    rep.sum_exe_latency_s += lb.exe_s;
    rep.sum_bh_latency_s += lb.bh_s;
    rep.sum_dl_latency_s += lb.dl_s;
    ul_latencies.push_back(lb.ul_s);
    exe_latencies.push_back(lb.exe_s);
    const double r = ul_rate(k, asg, powers, ch, cfg);
    ul_rates.push_back(r);
    sum_rate += r;
    sum_power += powers.ul_w[k];
  }
  if (rep.n_served > 0) {
    rep.energy_efficiency_bps_per_w = sum_power > 0.0 ? sum_rate / sum_power : 0.0;
    rep.jain_ul = jain_index(ul_latencies);
    rep.jain_exe = jain_index(exe_latencies);
    rep.mean_ul_rate_bps = sum_rate / rep.n_served;
    rep.rate_percentiles_bps = rate_percentiles(ul_rates);
  }
  return rep;
}

void validate_assignment(const Assignment& asg, int n_stations, int n_subchannels) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  // (bs, chan) -> owning MD, per direction
  std::vector<int> ul_slot(static_cast<std::size_t>(n_stations) * n_subchannels, -1);
  std::vector<int> dl_slot(static_cast<std::size_t>(n_stations) * n_subchannels, -1);
  for (int k = 0; k < asg.n_devices(); ++k) {
    for (auto [bs, chan, slots, name] :
         {std::tuple{asg.ul_bs[k], asg.ul_chan[k], &ul_slot, "ul"},
          std::tuple{asg.dl_bs[k], asg.dl_chan[k], &dl_slot, "dl"}}) {
      if (bs < 0 && chan < 0) continue;  // unserved
      std::ostringstream os;
      if (bs < 0 || bs >= n_stations || chan < 0 || chan >= n_subchannels) {
        os << name << " indices out of range for md " << k;
        fail(os.str());
      }
      int& owner = (*slots)[static_cast<std::size_t>(bs) * n_subchannels + chan];
      if (owner >= 0) {
        os << "intra-cell " << name << " subchannel reuse: mds " << owner << " and " << k
           << " share bs " << bs << " chan " << chan;
        fail(os.str());
      }
      owner = k;
    }
  }
}

}  // namespace dudemec
