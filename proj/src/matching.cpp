#include "dudemec/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dudemec {

Capacities derive_capacities(const std::vector<Station>& stations, int n_devices,
                             int n_subchannels, const SpaParams& spa) {
  Capacities caps;
  const double per_bs = static_cast<double>(n_devices) / static_cast<double>(stations.size());
  for (const auto& st : stations) {
    const double nu = st.kind == StationKind::MBS ? spa.nu_mbs : spa.nu_sbs;
    const int omega = static_cast<int>(std::floor(nu * per_bs + 0.5));
    caps.omega.push_back(std::clamp(omega, 1, n_subchannels));
  }
  return caps;
}

PreferenceProfile build_preferences(const std::vector<Station>& stations,
                                    const std::vector<Device>& devices,
                                    const ChannelTensor& ch, const NetworkConfig& cfg,
                                    const FpcParams& fpc, const SpaParams& spa) {
  const int K = static_cast<int>(devices.size());
  const int M1 = static_cast<int>(stations.size());
  const int N = cfg.n_subchannels;
  PreferenceProfile prof;
  prof.n_devices = K;
  prof.n_stations = M1;
  prof.n_subchannels = N;
  prof.md_prefs.resize(K);
  prof.acceptable.assign(static_cast<std::size_t>(K) * M1 * N, 0);

  // Acceptable set C_k: the top N*M_k subchannels network-wide by
  // interference-free SNR under FPC power. The cut usually keeps the
  // channels of the nearest BSs, but strong subchannels of farther BSs
  // (notably the MBS) stay reachable for MDs rejected elsewhere.
  const int m_k = std::min(spa.m_k, M1);
  const std::size_t list_len = static_cast<std::size_t>(m_k) * N;
  const double noise = cfg.noise_power_ul_w();
  for (int k = 0; k < K; ++k) {
    std::vector<std::pair<double, int>> ranked;  // (snr, project)
    ranked.reserve(static_cast<std::size_t>(M1) * N);
    for (int m = 0; m < M1; ++m) {
      const double p_w = dbm_to_watt(
          fpc_power_dbm(ch.pathloss_db(k, m, Direction::UL), devices[k].max_tx_power_dbm, fpc));
      for (int n = 0; n < N; ++n) {
        const double snr = p_w * ch.gain(k, m, n, Direction::UL) / noise;
        ranked.emplace_back(snr, prof.project_id(m, n));
      }
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    if (ranked.size() > list_len) ranked.resize(list_len);
    prof.md_prefs[k].reserve(ranked.size());
    for (const auto& [snr, project] : ranked) {
      prof.md_prefs[k].push_back(project);
      prof.acceptable[static_cast<std::size_t>(k) * prof.n_projects() + project] = 1;
    }
  }

  prof.bs_rank.resize(M1);
  prof.bs_rank_pos.assign(M1, std::vector<int>(K, -1));
  for (int m = 0; m < M1; ++m) {
    std::vector<int>& rank = prof.bs_rank[m];
    for (int k = 0; k < K; ++k) {
      // the MD is on U_m iff it finds at least one project of the BS acceptable
      for (int n = 0; n < N; ++n) {
        if (prof.is_acceptable(k, prof.project_id(m, n))) {
          rank.push_back(k);
          break;
        }
      }
    }
    const bool descending = stations[m].kind == StationKind::MBS;
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      const double ca = devices[a].task.cycles();
      const double cb = devices[b].task.cycles();
      if (ca != cb) return descending ? ca > cb : ca < cb;
      return a < b;
    });
    for (std::size_t pos = 0; pos < rank.size(); ++pos) prof.bs_rank_pos[m][rank[pos]] = static_cast<int>(pos);
  }
  return prof;
}

namespace {

// Working view of the deletion-adjusted preference structure during SPA.
struct SpaState {
  const PreferenceProfile& prof;
  std::vector<char> alive;       // pair (k, p) not yet deleted
  std::vector<std::size_t> cursor;  // per MD: index of the first live entry

  explicit SpaState(const PreferenceProfile& p)
      : prof(p),
        alive(p.acceptable),
        cursor(static_cast<std::size_t>(p.n_devices), 0) {}

  bool pair_alive(int k, int p) const {
    return alive[static_cast<std::size_t>(k) * prof.n_projects() + p] != 0;
  }
  void delete_pair(int k, int p) {
    alive[static_cast<std::size_t>(k) * prof.n_projects() + p] = 0;
  }
  /// First live project on k's list, or -1 when exhausted.
  int first(int k) {
    auto& c = cursor[k];
    const auto& list = prof.md_prefs[k];
    while (c < list.size() && !pair_alive(k, list[c])) ++c;
    return c < list.size() ? list[c] : -1;
  }
};

int worst_assigned_of_bs(const PreferenceProfile& prof, const Matching& match, int m) {
  int worst = -1;
  const int base = prof.project_id(m, 0);
  for (int n = 0; n < prof.n_subchannels; ++n) {
    const int k = match.project_md[base + n];
    if (k < 0) continue;
    if (worst < 0 || prof.bs_rank_pos[m][k] > prof.bs_rank_pos[m][worst]) worst = k;
  }
  return worst;
}

}  // namespace

SpaResult spa_match(const PreferenceProfile& profile, const Capacities& capacities,
                    const std::function<void(const Matching&)>& observer) {
  SpaResult res;
  Matching& match = res.matching;
  match = Matching(profile.n_devices, profile.n_projects(), profile.n_stations);
  SpaState state(profile);

  auto notify = [&] {
    if (observer) observer(match);
  };
  auto unassign = [&](int k) {
    const int p = match.md_project[k];
    match.md_project[k] = -1;
    match.project_md[p] = -1;
    --match.bs_count[profile.bs_of(p)];
  };
  auto assign = [&](int k, int p) {
    match.md_project[k] = p;
    match.project_md[p] = k;
    ++match.bs_count[profile.bs_of(p)];
  };

  std::deque<int> free;
  for (int k = 0; k < profile.n_devices; ++k) free.push_back(k);

  while (!free.empty()) {
    const int k = free.front();
    free.pop_front();
    if (match.md_project[k] >= 0) continue;
    const int p = state.first(k);
    if (p < 0) {
      res.unassigned.push_back(k);
      continue;
    }
    ++res.proposals;
    const int m = profile.bs_of(p);

    // Provisional assignment; the incumbent (if any) makes p over-subscribed.
    const int incumbent = match.project_md[p];
    if (incumbent >= 0) {
      // keep the better of {incumbent, k} per the projected list U_m^p
      const int loser = profile.bs_prefers(m, k, incumbent) ? incumbent : k;
      if (loser == incumbent) {
        unassign(incumbent);
        assign(k, p);
      }
      state.delete_pair(loser, p);
      free.push_back(loser);
      notify();
    } else {
      assign(k, p);
      // A vacant project at a full BS over-subscribes the BS; rejecting the
      // worst assignee restores the quota before the state is observable.
      if (match.bs_count[m] > capacities.omega[m]) {
        const int r = worst_assigned_of_bs(profile, match, m);
        const int pr = match.md_project[r];
        unassign(r);
        state.delete_pair(r, pr);
        free.push_back(r);
      }
      notify();
    }

    // Full project: successors of its occupant on U_m^p can never win it.
    if (match.project_md[p] >= 0) {
      const int r = match.project_md[p];
      const int r_pos = profile.bs_rank_pos[m][r];
      for (std::size_t pos = r_pos + 1; pos < profile.bs_rank[m].size(); ++pos) {
        state.delete_pair(profile.bs_rank[m][pos], p);
      }
    }
    // Full BS: successors of its worst assignee lose all of its projects.
    if (match.bs_count[m] >= capacities.omega[m]) {
      const int r = worst_assigned_of_bs(profile, match, m);
      const int r_pos = profile.bs_rank_pos[m][r];
      for (std::size_t pos = r_pos + 1; pos < profile.bs_rank[m].size(); ++pos) {
        const int t = profile.bs_rank[m][pos];
        for (int n = 0; n < profile.n_subchannels; ++n) {
          state.delete_pair(t, profile.project_id(m, n));
        }
      }
    }
  }

  std::sort(res.unassigned.begin(), res.unassigned.end());
  return res;
}

namespace {

int md_pref_pos(const PreferenceProfile& prof, int k, int project) {
  const auto& list = prof.md_prefs[k];
  const auto it = std::find(list.begin(), list.end(), project);
  return it == list.end() ? -1 : static_cast<int>(it - list.begin());
}

}  // namespace

bool is_blocking_pair(const PreferenceProfile& profile, const Capacities& capacities,
                      const Matching& matching, int k, int project) {
  if (matching.md_project[k] == project) return false;
  // (a) acceptability
  if (!profile.is_acceptable(k, project)) return false;
  // (b) the MD must improve
  const int current = matching.md_project[k];
  if (current >= 0 &&
      md_pref_pos(profile, k, project) >= md_pref_pos(profile, k, current)) {
    return false;
  }
  const int m = profile.bs_of(project);
  const int occupant = matching.project_md[project];
  if (occupant < 0) {
    if (matching.bs_count[m] < capacities.omega[m]) return true;  // (c1)
    // (c2): BS full — k already belongs to it, or beats its worst member
    const bool member = current >= 0 && profile.bs_of(current) == m;
    if (member) return true;
    const int worst = worst_assigned_of_bs(profile, matching, m);
    return worst >= 0 && profile.bs_prefers(m, k, worst);
  }
  // (c3): channel full — BS prefers k to the occupant
  return profile.bs_prefers(m, k, occupant);
}

std::vector<std::pair<int, int>> find_blocking_pairs(const PreferenceProfile& profile,
                                                     const Capacities& capacities,
                                                     const Matching& matching) {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < profile.n_devices; ++k) {
    for (int p = 0; p < profile.n_projects(); ++p) {
      if (matching.md_project[k] == p) continue;
      if (is_blocking_pair(profile, capacities, matching, k, p)) out.emplace_back(k, p);
    }
  }
  return out;
}

void apply_matching(const Matching& matching, const PreferenceProfile& profile, Assignment& asg) {
  for (int k = 0; k < profile.n_devices; ++k) {
    const int p = matching.md_project[k];
    if (p < 0) continue;
    asg.ul_bs[k] = profile.bs_of(p);
    asg.ul_chan[k] = profile.chan_of(p);
  }
}

std::vector<int> complete_assignment(Assignment& asg, const std::vector<Station>& stations,
                                     const std::vector<Device>& devices, const ChannelTensor& ch,
                                     const NetworkConfig& cfg, const FpcParams& fpc,
                                     double p_floor_scale, std::vector<double>& powers_ul_w) {
  const int M1 = static_cast<int>(stations.size());
  const int N = cfg.n_subchannels;
  std::vector<char> used(static_cast<std::size_t>(M1) * N, 0);
  std::vector<int> free_slots(M1, N);
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (!asg.ul_served(k)) continue;
    used[static_cast<std::size_t>(asg.ul_bs[k]) * N + asg.ul_chan[k]] = 1;
    --free_slots[asg.ul_bs[k]];
  }

  std::vector<int> placed;
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (asg.ul_served(k)) continue;
    int best_bs = -1;
    for (int m = 0; m < M1; ++m) {
      if (free_slots[m] <= 0) continue;
      if (best_bs < 0 ||
          ch.pathloss_db(k, m, Direction::UL) < ch.pathloss_db(k, best_bs, Direction::UL)) {
        best_bs = m;
      }
    }
    if (best_bs < 0) continue;  // network completely full; stays unserved

    int best_chan = -1;
    double best_interference = 0.0;
    for (int n = 0; n < N; ++n) {
      if (used[static_cast<std::size_t>(best_bs) * N + n]) continue;
      double interference = 0.0;
      for (int j = 0; j < asg.n_devices(); ++j) {
        if (j == k || !asg.ul_served(j) || asg.ul_chan[j] != n) continue;
        interference += powers_ul_w[j] * ch.gain(j, best_bs, n, Direction::UL);
      }
      if (best_chan < 0 || interference < best_interference) {
        best_chan = n;
        best_interference = interference;
      }
    }
    asg.ul_bs[k] = best_bs;
    asg.ul_chan[k] = best_chan;
    used[static_cast<std::size_t>(best_bs) * N + best_chan] = 1;
    --free_slots[best_bs];
    powers_ul_w[k] =
        fpc_power_w(ch.pathloss_db(k, best_bs, Direction::UL), devices[k].max_tx_power_dbm, fpc,
                    devices[k].max_tx_power_w() * p_floor_scale);
    placed.push_back(k);
  }
  return placed;
}

namespace {

// Sum UL transmission latency over the served MDs on the two subchannels.
double two_channel_latency(const Assignment& asg, const PowerAllocation& powers,
                           const ChannelTensor& ch, const NetworkConfig& cfg,
                           const std::vector<Device>& devices, int n1, int n2) {
  double sum = 0.0;
  for (int j = 0; j < asg.n_devices(); ++j) {
    if (!asg.ul_served(j)) continue;
    if (asg.ul_chan[j] != n1 && asg.ul_chan[j] != n2) continue;
    sum += devices[j].task.input_bits / ul_rate(j, asg, powers, ch, cfg);
  }
  return sum;
}

// Definition-6 test for moving MD k to subchannel target (same BS), swapping
// with the occupant when there is one. Fills `post` with the swapped
// assignment when it blocks.
bool is_swap_blocking(const Assignment& asg, const PowerAllocation& powers,
                      const ChannelTensor& ch, const NetworkConfig& cfg,
                      const std::vector<Device>& devices, int k, int target, double slack,
                      Assignment* post_out) {
  const int m = asg.ul_bs[k];
  const int n = asg.ul_chan[k];
  int occupant = -1;
  for (int j = 0; j < asg.n_devices(); ++j) {
    if (j != k && asg.ul_served(j) && asg.ul_bs[j] == m && asg.ul_chan[j] == target) {
      occupant = j;
      break;
    }
  }

  Assignment post = asg;
  post.ul_chan[k] = target;
  if (occupant >= 0) post.ul_chan[occupant] = n;

  // (a) the moving MD gets a strictly higher rate on the target channel
  const double r_k_old = ul_rate(k, asg, powers, ch, cfg);
  const double r_k_new = ul_rate(k, post, powers, ch, cfg);
  if (!(r_k_new > r_k_old)) return false;

  // (b) with an occupant: its rate improves on k's old channel and the
  // pairwise UL latency sum drops
  if (occupant >= 0) {
    const double r_o_old = ul_rate(occupant, asg, powers, ch, cfg);
    const double r_o_new = ul_rate(occupant, post, powers, ch, cfg);
    if (!(r_o_new > r_o_old)) return false;
    const double pair_old =
        devices[k].task.input_bits / r_k_old + devices[occupant].task.input_bits / r_o_old;
    const double pair_new =
        devices[k].task.input_bits / r_k_new + devices[occupant].task.input_bits / r_o_new;
    if (!(pair_new < pair_old)) return false;
  }

  // (c) network-wide: every MD on either channel, across all cells
  const double before = two_channel_latency(asg, powers, ch, cfg, devices, n, target);
  const double after = two_channel_latency(post, powers, ch, cfg, devices, n, target);
  if (!(before - after > slack * std::max(before, 1.0))) return false;

  if (post_out) *post_out = std::move(post);
  return true;
}

}  // namespace

SwapResult swap_match(Assignment& asg, const PowerAllocation& powers, const ChannelTensor& ch,
                      const NetworkConfig& cfg, const std::vector<Device>& devices,
                      const SwapParams& params) {
  SwapResult res;
  auto network_sum = [&] {
    double sum = 0.0;
    for (int j = 0; j < asg.n_devices(); ++j) {
      if (asg.ul_served(j)) sum += devices[j].task.input_bits / ul_rate(j, asg, powers, ch, cfg);
    }
    return sum;
  };
  res.sum_ul_latency_trace_s.push_back(network_sum());

  for (res.passes = 0; res.passes < params.max_passes; ++res.passes) {
    bool any = false;
    for (int k = 0; k < asg.n_devices(); ++k) {
      if (!asg.ul_served(k)) continue;
      const int n = asg.ul_chan[k];
      const double r_old = ul_rate(k, asg, powers, ch, cfg);

      // candidate target channels of the same BS, by descending rate gain
      std::vector<std::pair<double, int>> candidates;
      for (int target = 0; target < cfg.n_subchannels; ++target) {
        if (target == n) continue;
        Assignment probe = asg;
        probe.ul_chan[k] = target;
        for (int j = 0; j < asg.n_devices(); ++j) {
          if (j != k && asg.ul_served(j) && asg.ul_bs[j] == asg.ul_bs[k] &&
              asg.ul_chan[j] == target) {
            probe.ul_chan[j] = n;
            break;
          }
        }
        const double r_new = ul_rate(k, probe, powers, ch, cfg);
        if (r_new > r_old) candidates.emplace_back(r_new, target);
      }
      std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });

      for (const auto& [r_new, target] : candidates) {
        Assignment post;
        if (!is_swap_blocking(asg, powers, ch, cfg, devices, k, target, params.slack, &post)) {
          continue;
        }
        asg = std::move(post);
        ++res.n_swaps;
        res.sum_ul_latency_trace_s.push_back(network_sum());
        any = true;
        break;  // re-evaluate remaining MDs against the updated matching
      }
    }
    if (!any) {
      ++res.passes;
      return res;
    }
  }
  res.reached_pass_cap = true;
  return res;
}

bool certify_exchange_stable(const Assignment& asg, const PowerAllocation& powers,
                             const ChannelTensor& ch, const NetworkConfig& cfg,
                             const std::vector<Device>& devices, double slack) {
  for (int k = 0; k < asg.n_devices(); ++k) {
    if (!asg.ul_served(k)) continue;
    for (int target = 0; target < cfg.n_subchannels; ++target) {
      if (target == asg.ul_chan[k]) continue;
      if (is_swap_blocking(asg, powers, ch, cfg, devices, k, target, slack, nullptr)) {
        return false;
      }
    }
  }
  return true;
}

std::string assignment_csv(const Assignment& asg) {
  std::ostringstream os;
  os << "md_id,bs_id,subchannel,direction\n";
  for (int k = 0; k < asg.n_devices(); ++k) {
    os << k << ',' << asg.ul_bs[k] << ',' << asg.ul_chan[k] << ",ul\n";
    os << k << ',' << asg.dl_bs[k] << ',' << asg.dl_chan[k] << ",dl\n";
  }
  return os.str();
}

std::string profile_json(const PreferenceProfile& profile, const Capacities& capacities) {
  nlohmann::json j;
  j["n_devices"] = profile.n_devices;
  j["n_stations"] = profile.n_stations;
  j["n_subchannels"] = profile.n_subchannels;
  j["md_prefs"] = profile.md_prefs;
  j["bs_rank"] = profile.bs_rank;
  j["omega"] = capacities.omega;
  return j.dump(2);
}

}  // namespace dudemec
