#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dudemec/mec.hpp"
#include "dudemec/power.hpp"
#include "dudemec/topology.hpp"

namespace dudemec {

/// Knobs of the three-party matching stage.
struct SpaParams {
  int m_k = 2;          // each MD accepts the top m_k * N subchannels by SNR network-wide
  double nu_mbs = 2.0;  // capacity weight of the MBS (computation-rich)
  double nu_sbs = 0.8;
};

/// "Projects" are (BS, subchannel) pairs: project id = bs * N + chan.
struct PreferenceProfile {
  int n_devices = 0;
  int n_stations = 0;
  int n_subchannels = 0;

  /// Per MD: project ids, most preferred first (SNR under initial powers).
  std::vector<std::vector<int>> md_prefs;
  /// Per BS: MD ids, most preferred first (task cycles; MBS descending, SBS
  /// ascending); contains exactly the MDs that find one of its projects
  /// acceptable.
  std::vector<std::vector<int>> bs_rank;
  /// Per BS: rank position per MD id (-1 when the MD is not on its list).
  std::vector<std::vector<int>> bs_rank_pos;
  /// Original acceptability; flat [k * n_projects + project].
  std::vector<char> acceptable;

  int n_projects() const { return n_stations * n_subchannels; }
  int project_id(int bs, int chan) const { return bs * n_subchannels + chan; }
  int bs_of(int project) const { return project / n_subchannels; }
  int chan_of(int project) const { return project % n_subchannels; }
  bool is_acceptable(int k, int project) const {
    return acceptable[static_cast<std::size_t>(k) * n_projects() + project] != 0;
  }
  /// True when BS m ranks MD a strictly better than MD b.
  bool bs_prefers(int m, int a, int b) const {
    return bs_rank_pos[m][a] >= 0 && (bs_rank_pos[m][b] < 0 || bs_rank_pos[m][a] < bs_rank_pos[m][b]);
  }
};

struct Capacities {
  std::vector<int> omega;  // per BS, in [1, N]
};

/// Omega_m = round-half-up(nu_m * K / (M+1)), clamped to [1, N].
Capacities derive_capacities(const std::vector<Station>& stations, int n_devices,
                             int n_subchannels, const SpaParams& spa);

/// Deterministic profile: each MD list keeps the top m_k * N projects
/// network-wide by interference-free SNR under per-candidate FPC power; BS
/// lists rank by task cycles (MBS descending, SBS ascending). All ties break
/// by ascending id.
PreferenceProfile build_preferences(const std::vector<Station>& stations,
                                    const std::vector<Device>& devices,
                                    const ChannelTensor& ch, const NetworkConfig& cfg,
                                    const FpcParams& fpc, const SpaParams& spa);

struct Matching {
  std::vector<int> md_project;  // per MD: project id or -1
  std::vector<int> project_md;  // per project: MD id or -1
  std::vector<int> bs_count;    // per BS: |M(s_m)|

  Matching() = default;
  Matching(int n_devices, int n_projects, int n_stations)
      : md_project(n_devices, -1), project_md(n_projects, -1), bs_count(n_stations, 0) {}
};

struct SpaResult {
  Matching matching;
  std::vector<int> unassigned;  // MDs whose lists were exhausted
  long proposals = 0;           // loop iterations, bounded by |U|·|C|
};

/// Student-optimal student-project allocation with deletions applied inside
/// the proposal loop. The observer (if any) runs after every provisional
/// accept/reject so tests can assert capacities mid-run.
SpaResult spa_match(const PreferenceProfile& profile, const Capacities& capacities,
                    const std::function<void(const Matching&)>& observer = {});

/// Definition-4 test for a pair not in the matching, against the original
/// profile: (a) acceptable, (b) MD improves, (c1)/(c2)/(c3) capacity clauses.
bool is_blocking_pair(const PreferenceProfile& profile, const Capacities& capacities,
                      const Matching& matching, int k, int project);

/// All blocking pairs (md, project), ascending; empty means stable.
std::vector<std::pair<int, int>> find_blocking_pairs(const PreferenceProfile& profile,
                                                     const Capacities& capacities,
                                                     const Matching& matching);

/// Copies the UL side of a matching into an Assignment.
void apply_matching(const Matching& matching, const PreferenceProfile& profile, Assignment& asg);

/// Completes an assignment after SPA: every UL-unserved MD goes to its
/// lowest-UL-path-loss BS that still has a free subchannel, on the
/// least-interfered free subchannel there (interference under the given FPC
/// powers). Returns the ids of the MDs placed this way.
std::vector<int> complete_assignment(Assignment& asg, const std::vector<Station>& stations,
                                     const std::vector<Device>& devices, const ChannelTensor& ch,
                                     const NetworkConfig& cfg, const FpcParams& fpc,
                                     double p_floor_scale, std::vector<double>& powers_ul_w);

struct SwapParams {
  double slack = 1e-12;  // relative improvement a swap must exceed
  int max_passes = 64;
};

struct SwapResult {
  int n_swaps = 0;
  int passes = 0;
  bool reached_pass_cap = false;
  /// Network sum UL latency before any swap and after each executed swap;
  /// strictly decreasing by construction.
  std::vector<double> sum_ul_latency_trace_s;
};

/// Exchange-stability restoration: scans MDs in id order, candidate target
/// subchannels of the same BS by descending rate gain, and executes
/// swap-blocking swaps (occupied) or moves (vacant) until a full pass finds
/// none. Every executed swap strictly decreases the network sum UL latency.
SwapResult swap_match(Assignment& asg, const PowerAllocation& powers, const ChannelTensor& ch,
                      const NetworkConfig& cfg, const std::vector<Device>& devices,
                      const SwapParams& params = {});

/// True iff no within-BS pair (MD, target subchannel) swap-blocks the
/// assignment under the given powers.
bool certify_exchange_stable(const Assignment& asg, const PowerAllocation& powers,
                             const ChannelTensor& ch, const NetworkConfig& cfg,
                             const std::vector<Device>& devices, double slack = 1e-12);

/// RFC-4180 rows: md_id, bs_id, subchannel, direction.
std::string assignment_csv(const Assignment& asg);

/// JSON dump of a profile + capacities for replaying matching failures.
std::string profile_json(const PreferenceProfile& profile, const Capacities& capacities);

}  // namespace dudemec
