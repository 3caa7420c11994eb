#include "dudemec/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <tuple>

namespace dudemec {

std::string to_string(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::Cuda: return "CUDA";
    case SchemeId::MinPlGFpc: return "Min-PL-G-FPC";
    case SchemeId::SpaFpc: return "SPA-FPC";
    case SchemeId::SpaSmFpc: return "SPA-SM-FPC";
    case SchemeId::SpaSmOpa: return "SPA-SM-OPA";
  }
  throw std::invalid_argument("unknown scheme");
}

std::optional<SchemeId> parse_scheme(std::string_view name) {
  const auto fold = [](std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  };
  const std::string wanted = fold(name);
  for (SchemeId s : all_schemes()) {
    if (fold(to_string(s)) == wanted) return s;
  }
  return std::nullopt;
}

const std::vector<SchemeId>& all_schemes() {
  static const std::vector<SchemeId> schemes = {SchemeId::Cuda, SchemeId::MinPlGFpc,
                                                SchemeId::SpaFpc, SchemeId::SpaSmFpc,
                                                SchemeId::SpaSmOpa};
  return schemes;
}

std::vector<int> associate_biased_rsrp(const std::vector<Station>& stations,
                                       const ChannelTensor& ch, const BiasConfig& bias) {
  std::vector<int> assoc(ch.n_devices(), -1);
  for (int k = 0; k < ch.n_devices(); ++k) {
    double best = 0.0;
    for (int m = 0; m < static_cast<int>(stations.size()); ++m) {
      const double rsrp_db = stations[m].max_tx_power_dbm - ch.pathloss_db(k, m, Direction::DL) +
                             bias.dl_bias_db(stations[m].kind);
      if (assoc[k] < 0 || rsrp_db > best) {
        assoc[k] = m;
        best = rsrp_db;
      }
    }
  }
  return assoc;
}

std::vector<int> associate_min_pl(const std::vector<Station>& stations,
                                  const std::vector<Device>& devices, const ChannelTensor& ch,
                                  const FpcParams& fpc, const BiasConfig& bias) {
  std::vector<int> assoc(ch.n_devices(), -1);
  for (int k = 0; k < ch.n_devices(); ++k) {
    double best = 0.0;
    for (int m = 0; m < static_cast<int>(stations.size()); ++m) {
      const double pl = ch.pathloss_db(k, m, Direction::UL);
      const double rx_db = fpc_power_dbm(pl, devices[k].max_tx_power_dbm, fpc) - pl +
                           bias.ul_w_db(stations[m].kind);
      if (assoc[k] < 0 || rx_db > best) {
        assoc[k] = m;
        best = rx_db;
      }
    }
  }
  return assoc;
}

GreedyResult greedy_subchannels(const std::vector<int>& assoc_bs,
                                const std::vector<double>& weight_w, const ChannelTensor& ch,
                                const NetworkConfig& cfg, Direction dir) {
  const int K = ch.n_devices();
  const int N = cfg.n_subchannels;
  const double noise = dir == Direction::UL ? cfg.noise_power_ul_w() : cfg.noise_power_dl_w();
  GreedyResult res;
  res.chan.assign(K, -1);

  for (int m = 0; m < ch.n_stations(); ++m) {
    std::vector<std::tuple<double, int, int>> pairs;  // (snr, md, chan)
    int members = 0;
    for (int k = 0; k < K; ++k) {
      if (assoc_bs[k] != m) continue;
      ++members;
      for (int n = 0; n < N; ++n) {
        pairs.emplace_back(weight_w[k] * ch.gain(k, m, n, dir) / noise, k, n);
      }
    }
    if (members == 0) continue;
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<char> chan_used(N, 0);
    int assigned = 0;
    for (const auto& [snr, k, n] : pairs) {
      if (assigned == members || assigned == N) break;
      if (res.chan[k] >= 0 || chan_used[n]) continue;
      res.chan[k] = n;
      chan_used[n] = 1;
      ++assigned;
    }
    res.n_overflow += std::max(0, members - assigned);
  }
  return res;
}

int allocate_dl(Assignment& asg, PowerAllocation& powers, const std::vector<Station>& stations,
                const std::vector<Device>& devices, const ChannelTensor& ch,
                const NetworkConfig& cfg, const BiasConfig& bias) {
  (void)devices;
  const std::vector<int> assoc = associate_biased_rsrp(stations, ch, bias);
  std::vector<double> weight(ch.n_devices());
  for (int k = 0; k < ch.n_devices(); ++k) {
    weight[k] = dbm_to_watt(stations[assoc[k]].max_tx_power_dbm) / cfg.n_subchannels;
  }
  const GreedyResult greedy = greedy_subchannels(assoc, weight, ch, cfg, Direction::DL);
  for (int k = 0; k < ch.n_devices(); ++k) {
    if (greedy.chan[k] >= 0) {
      asg.dl_bs[k] = assoc[k];
      asg.dl_chan[k] = greedy.chan[k];
    } else {
      asg.dl_bs[k] = -1;
      asg.dl_chan[k] = -1;
    }
  }
  powers.dl_w.assign(stations.size(), std::vector<double>(cfg.n_subchannels, 0.0));
  for (std::size_t m = 0; m < stations.size(); ++m) {
    const double per_chan = dbm_to_watt(stations[m].max_tx_power_dbm) / cfg.n_subchannels;
    std::fill(powers.dl_w[m].begin(), powers.dl_w[m].end(), per_chan);
  }
  return greedy.n_overflow;
}

int allocate_ul_greedy(Assignment& asg, PowerAllocation& powers,
                       const std::vector<int>& assoc_bs, const std::vector<Device>& devices,
                       const ChannelTensor& ch, const NetworkConfig& cfg, const FpcParams& fpc,
                       double p_floor_scale) {
  std::vector<double> fpc_w(ch.n_devices());
  for (int k = 0; k < ch.n_devices(); ++k) {
    fpc_w[k] = fpc_power_w(ch.pathloss_db(k, assoc_bs[k], Direction::UL),
                           devices[k].max_tx_power_dbm, fpc,
                           devices[k].max_tx_power_w() * p_floor_scale);
  }
  const GreedyResult greedy = greedy_subchannels(assoc_bs, fpc_w, ch, cfg, Direction::UL);
  powers.ul_w.assign(ch.n_devices(), 0.0);
  for (int k = 0; k < ch.n_devices(); ++k) {
    if (greedy.chan[k] >= 0) {
      asg.ul_bs[k] = assoc_bs[k];
      asg.ul_chan[k] = greedy.chan[k];
      powers.ul_w[k] = fpc_w[k];
    } else {
      asg.ul_bs[k] = -1;
      asg.ul_chan[k] = -1;
    }
  }
  return greedy.n_overflow;
}

}  // namespace dudemec
