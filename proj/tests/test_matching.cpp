#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "dudemec/matching.hpp"
#include "dudemec/rng.hpp"

using namespace dudemec;

namespace {

std::vector<Station> make_stations(int count) {
  std::vector<Station> stations;
  for (int m = 0; m < count; ++m) {
    Station s;
    s.id = m;
    s.kind = m == 0 ? StationKind::MBS : StationKind::SBS;
    s.max_tx_power_dbm = m == 0 ? 46.0 : 30.0;
    s.compute_capacity_cps = m == 0 ? 36e9 : 3.6e9;
    stations.push_back(s);
  }
  return stations;
}

std::vector<Device> make_devices(int count, double cycles_per_bit = 330.0) {
  std::vector<Device> devices;
  for (int k = 0; k < count; ++k) {
    Device d;
    d.id = k;
    d.max_tx_power_dbm = 23.0;
    d.task = TaskSpec{3e6, 0.2, cycles_per_bit};
    devices.push_back(d);
  }
  return devices;
}

/// Random scenario for property tests: every link gets a plausible path loss
/// and an independent fading draw.
struct RandomScenario {
  NetworkConfig cfg;
  std::vector<Station> stations;
  std::vector<Device> devices;
  ChannelTensor ch;

  RandomScenario(int n_md, int n_bs, int n_chan, Rng& rng) {
    cfg.n_subchannels = n_chan;
    stations = make_stations(n_bs);
    devices = make_devices(n_md);
    for (auto& d : devices) d.task.input_bits = 3e6 + 3e6 * rng.uniform();
    ch = ChannelTensor(n_md, n_bs, n_chan);
    for (int k = 0; k < n_md; ++k) {
      for (int m = 0; m < n_bs; ++m) {
        ch.distance_m(k, m) = 10.0 + 400.0 * rng.uniform();
        for (Direction d : {Direction::UL, Direction::DL}) {
          ch.pathloss_db(k, m, d) = 80.0 + 50.0 * rng.uniform();
        }
        for (int n = 0; n < n_chan; ++n) {
          for (Direction d : {Direction::UL, Direction::DL}) {
            ch.gain(k, m, n, d) =
                db_to_linear(-ch.pathloss_db(k, m, d)) * rng.exponential(1.0);
          }
        }
      }
    }
  }
};

}  // namespace

TEST_CASE("capacities: round half up, then clamp to [1, N]") {
  const SpaParams spa;
  SUBCASE("paper-scale example") {
    // K = 50 over 4 stations: MBS 2*12.5 = 25, SBS 0.8*12.5 = 10.
    const auto caps = derive_capacities(make_stations(4), 50, 25, spa);
    CHECK(caps.omega == std::vector<int>{25, 10, 10, 10});
  }
  SUBCASE("half values round up") {
    // K = 25 over 8 stations: MBS 6.25 -> 6, SBS 2.5 -> 3.
    const auto caps = derive_capacities(make_stations(8), 25, 25, spa);
    CHECK(caps.omega[0] == 6);
    CHECK(caps.omega[1] == 3);
  }
  SUBCASE("clamped to the subchannel count and to at least one") {
    const auto caps = derive_capacities(make_stations(2), 100, 3, spa);
    CHECK(caps.omega == std::vector<int>{3, 3});
    const auto tiny = derive_capacities(make_stations(4), 1, 25, spa);
    CHECK(tiny.omega[1] == 1);  // 0.8 * 0.25 rounds to 0, clamped up
  }
}

TEST_CASE("preferences: top-SNR projects network-wide, cycle-ranked MDs") {
  Rng rng(7);
  RandomScenario sc(3, 3, 2, rng);
  // Distances: MD0 closest to BS1 and BS2; the MBS (BS0) is farthest, so
  // its channels can enter the list only through fading luck.
  sc.ch.distance_m(0, 0) = 400.0;
  sc.ch.distance_m(0, 1) = 50.0;
  sc.ch.distance_m(0, 2) = 60.0;
  // Tasks: cycles 330*3e6, 960*3e6, 1900*3e6.
  sc.devices[0].task = TaskSpec{3e6, 0.2, 330.0};
  sc.devices[1].task = TaskSpec{3e6, 0.2, 960.0};
  sc.devices[2].task = TaskSpec{3e6, 0.2, 1900.0};

  const PreferenceProfile prof =
      build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});

  REQUIRE(prof.n_projects() == 6);
  const double noise = sc.cfg.noise_power_ul_w();
  auto snr_of = [&](int k, int p) {
    const int m = prof.bs_of(p);
    const double pw = dbm_to_watt(
        fpc_power_dbm(sc.ch.pathloss_db(k, m, Direction::UL), 23.0, FpcParams{}));
    return pw * sc.ch.gain(k, m, prof.chan_of(p), Direction::UL) / noise;
  };

  // MD0's list is exactly its m_k * N = 4 highest-SNR projects, descending;
  // the two projects below the cut are unacceptable.
  CHECK(prof.md_prefs[0].size() == 4);
  std::vector<int> all_projects{0, 1, 2, 3, 4, 5};
  std::sort(all_projects.begin(), all_projects.end(),
            [&](int a, int b) { return snr_of(0, a) > snr_of(0, b); });
  CHECK(prof.md_prefs[0] == std::vector<int>(all_projects.begin(), all_projects.begin() + 4));
  CHECK_FALSE(prof.is_acceptable(0, all_projects[4]));
  CHECK_FALSE(prof.is_acceptable(0, all_projects[5]));
  for (std::size_t i = 1; i < prof.md_prefs[0].size(); ++i) {
    CHECK(snr_of(0, prof.md_prefs[0][i - 1]) >= snr_of(0, prof.md_prefs[0][i]));
  }

  // BS lists: MBS wants big tasks first, SBSs want small tasks first.
  const auto on = [&](int m, int k) { return prof.bs_rank_pos[m][k]; };
  if (on(0, 0) >= 0 && on(0, 2) >= 0) CHECK(on(0, 2) < on(0, 0));
  if (on(1, 0) >= 0 && on(1, 2) >= 0) CHECK(on(1, 0) < on(1, 2));

  // bs_prefers is consistent with positions.
  for (int m = 0; m < 3; ++m) {
    const auto& rank = prof.bs_rank[m];
    for (std::size_t i = 1; i < rank.size(); ++i) {
      CHECK(prof.bs_prefers(m, rank[i - 1], rank[i]));
      CHECK_FALSE(prof.bs_prefers(m, rank[i], rank[i - 1]));
    }
  }
}

TEST_CASE("spa_match: deterministic, capacity-safe at every step, stable") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_md = 1 + static_cast<int>(rng.below(5));
    const int n_bs = 1 + static_cast<int>(rng.below(3));
    const int n_chan = 1 + static_cast<int>(rng.below(3));
    RandomScenario sc(n_md, n_bs, n_chan, rng);
    const PreferenceProfile prof =
        build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
    const Capacities caps = derive_capacities(sc.stations, n_md, n_chan, SpaParams{});

    long observed = 0;
    const SpaResult res = spa_match(prof, caps, [&](const Matching& m) {
      ++observed;
      for (int p = 0; p < prof.n_projects(); ++p) {
        if (m.project_md[p] >= 0) CHECK(m.md_project[m.project_md[p]] == p);
      }
      for (int bs = 0; bs < n_bs; ++bs) CHECK(m.bs_count[bs] <= caps.omega[bs]);
    });
    CHECK(observed > 0);
    CHECK(res.proposals <= static_cast<long>(n_md) * (prof.n_projects() + 1));

    // Assigned + unassigned partitions the MDs.
    int assigned = 0;
    for (int k = 0; k < n_md; ++k) assigned += res.matching.md_project[k] >= 0 ? 1 : 0;
    CHECK(assigned + static_cast<int>(res.unassigned.size()) == n_md);

    // Definition-4 stability against the original profile.
    CHECK(find_blocking_pairs(prof, caps, res.matching).empty());

    // Pure function of its inputs.
    const SpaResult again = spa_match(prof, caps);
    CHECK(again.matching.md_project == res.matching.md_project);
  }
}

TEST_CASE("blocking-pair clauses fire exactly as defined") {
  // Two BSs, one subchannel each; two MDs, everyone finds everything
  // acceptable. Rank both BS lists as [0, 1] (equal cycles, id tiebreak).
  Rng rng(5);
  RandomScenario sc(2, 2, 1, rng);
  const PreferenceProfile prof =
      build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
  Capacities caps;
  caps.omega = {1, 1};

  Matching m(2, prof.n_projects(), 2);
  const int p0 = prof.project_id(0, 0);
  const int p1 = prof.project_id(1, 0);

  SUBCASE("(c1) vacant project at an under-subscribed BS blocks for an unassigned MD") {
    CHECK(is_blocking_pair(prof, caps, m, 0, p0));
    CHECK(is_blocking_pair(prof, caps, m, 1, p1));
  }
  SUBCASE("(b) gates on the MD's own preference") {
    // Assign MD0 to its top choice: nothing else can block for it.
    const int top = prof.md_prefs[0][0];
    m.md_project[0] = top;
    m.project_md[top] = 0;
    m.bs_count[prof.bs_of(top)] = 1;
    const int other = top == p0 ? p1 : p0;
    CHECK_FALSE(is_blocking_pair(prof, caps, m, 0, other));
  }
  SUBCASE("(c3) occupied project blocks only when the BS prefers the newcomer") {
    // MD1 holds project p0; BS0 ranks MD0 above MD1.
    m.md_project[1] = p0;
    m.project_md[p0] = 1;
    m.bs_count[0] = 1;
    CHECK(is_blocking_pair(prof, caps, m, 0, p0));
    // Mirror: MD0 holds it; MD1 is worse, no block.
    m = Matching(2, prof.n_projects(), 2);
    m.md_project[0] = p0;
    m.project_md[p0] = 0;
    m.bs_count[0] = 1;
    const bool md1_prefers_p0 = prof.md_prefs[1][0] == p0;
    CHECK(is_blocking_pair(prof, caps, m, 1, p0) == false);
    (void)md1_prefers_p0;
  }
}

TEST_CASE("blocking clause (c2): full BS, vacant channel") {
  // One BS with two subchannels but quota 1; MD0 assigned to channel 0.
  Rng rng(6);
  RandomScenario sc(2, 1, 2, rng);
  const PreferenceProfile prof =
      build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
  Capacities caps;
  caps.omega = {1};

  Matching m(2, prof.n_projects(), 1);
  const int assigned_project = prof.md_prefs[0][1];  // MD0 holds its 2nd choice
  m.md_project[0] = assigned_project;
  m.project_md[assigned_project] = 0;
  m.bs_count[0] = 1;

  // MD0 with the vacant better channel: member exception applies.
  const int better = prof.md_prefs[0][0];
  CHECK(is_blocking_pair(prof, caps, m, 0, better));

  // MD1 (worse on the BS list than MD0) cannot displace through a vacant
  // channel while the BS is full.
  const int md1_choice = prof.md_prefs[1][0];
  if (m.project_md[md1_choice] < 0) {
    CHECK_FALSE(is_blocking_pair(prof, caps, m, 1, md1_choice));
  }
}

TEST_CASE("apply_matching and completion") {
  Rng rng(17);
  RandomScenario sc(6, 2, 2, rng);  // 6 MDs, 4 slots total: completion must cope
  const PreferenceProfile prof =
      build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
  const Capacities caps = derive_capacities(sc.stations, 6, 2, SpaParams{});
  const SpaResult res = spa_match(prof, caps);

  Assignment asg(6);
  apply_matching(res.matching, prof, asg);
  for (int k = 0; k < 6; ++k) {
    if (res.matching.md_project[k] >= 0) {
      CHECK(asg.ul_bs[k] == prof.bs_of(res.matching.md_project[k]));
      CHECK(asg.ul_chan[k] == prof.chan_of(res.matching.md_project[k]));
    } else {
      CHECK_FALSE(asg.ul_served(k));
    }
  }

  std::vector<double> powers = fpc_powers(asg, sc.ch, sc.devices, FpcParams{}, 1e-6);
  const auto placed = complete_assignment(asg, sc.stations, sc.devices, sc.ch, sc.cfg,
                                          FpcParams{}, 1e-6, powers);
  // Physical capacity: 2 BSs x 2 channels = 4 slots for 6 MDs.
  int served = 0;
  for (int k = 0; k < 6; ++k) served += asg.ul_served(k) ? 1 : 0;
  CHECK(served == 4);
  CHECK_NOTHROW(validate_assignment(asg, 2, 2));
  for (int fallback_md : placed) {
    CHECK(asg.ul_served(fallback_md));
    CHECK(powers[fallback_md] > 0.0);
  }
  for (int k = 0; k < 6; ++k) {
    if (!asg.ul_served(k)) CHECK(powers[k] == 0.0);
  }
}

TEST_CASE("swap executes a vacant-channel move that lowers latency") {
  // One BS, two channels, one MD sitting on its weak channel.
  Rng rng(3);
  RandomScenario sc(1, 1, 2, rng);
  sc.ch.gain(0, 0, 0, Direction::UL) = 1e-12;
  sc.ch.gain(0, 0, 1, Direction::UL) = 1e-9;

  Assignment asg(1);
  asg.ul_bs[0] = 0;
  asg.ul_chan[0] = 0;
  PowerAllocation powers;
  powers.ul_w = {0.1};
  powers.dl_w.assign(1, std::vector<double>(2, 0.0));

  const SwapResult res = swap_match(asg, powers, sc.ch, sc.cfg, sc.devices, SwapParams{});
  CHECK(res.n_swaps == 1);
  CHECK(asg.ul_chan[0] == 1);
  REQUIRE(res.sum_ul_latency_trace_s.size() == 2);
  CHECK(res.sum_ul_latency_trace_s[1] < res.sum_ul_latency_trace_s[0]);
  CHECK(certify_exchange_stable(asg, powers, sc.ch, sc.cfg, sc.devices));
}

TEST_CASE("swap executes an occupied-channel exchange when both MDs gain") {
  Rng rng(4);
  RandomScenario sc(2, 1, 2, rng);
  // Crosswise assignment: each MD is on the other's favorite channel.
  sc.ch.gain(0, 0, 0, Direction::UL) = 1e-12;
  sc.ch.gain(0, 0, 1, Direction::UL) = 1e-9;
  sc.ch.gain(1, 0, 0, Direction::UL) = 2e-9;
  sc.ch.gain(1, 0, 1, Direction::UL) = 1e-12;

  Assignment asg(2);
  asg.ul_bs = {0, 0};
  asg.ul_chan = {0, 1};
  PowerAllocation powers;
  powers.ul_w = {0.1, 0.1};
  powers.dl_w.assign(1, std::vector<double>(2, 0.0));

  const SwapResult res = swap_match(asg, powers, sc.ch, sc.cfg, sc.devices, SwapParams{});
  CHECK(res.n_swaps == 1);
  CHECK(asg.ul_chan[0] == 1);
  CHECK(asg.ul_chan[1] == 0);
  CHECK(certify_exchange_stable(asg, powers, sc.ch, sc.cfg, sc.devices));
}

TEST_CASE("swap matching on random instances: strict descent, stable exit") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_md = 4 + static_cast<int>(rng.below(8));
    const int n_bs = 2 + static_cast<int>(rng.below(2));
    const int n_chan = 2 + static_cast<int>(rng.below(3));
    RandomScenario sc(n_md, n_bs, n_chan, rng);
    const PreferenceProfile prof =
        build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
    const Capacities caps = derive_capacities(sc.stations, n_md, n_chan, SpaParams{});
    Assignment asg(n_md);
    apply_matching(spa_match(prof, caps).matching, prof, asg);
    std::vector<double> p = fpc_powers(asg, sc.ch, sc.devices, FpcParams{}, 1e-6);
    complete_assignment(asg, sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, 1e-6, p);
    PowerAllocation powers;
    powers.ul_w = p;
    powers.dl_w.assign(n_bs, std::vector<double>(n_chan, 0.0));

    const SwapResult res = swap_match(asg, powers, sc.ch, sc.cfg, sc.devices, SwapParams{});
    CHECK_FALSE(res.reached_pass_cap);
    for (std::size_t i = 1; i < res.sum_ul_latency_trace_s.size(); ++i) {
      CHECK(res.sum_ul_latency_trace_s[i] < res.sum_ul_latency_trace_s[i - 1]);
    }
    CHECK(static_cast<int>(res.sum_ul_latency_trace_s.size()) == res.n_swaps + 1);
    CHECK(certify_exchange_stable(asg, powers, sc.ch, sc.cfg, sc.devices));
    CHECK_NOTHROW(validate_assignment(asg, n_bs, n_chan));
  }
}

TEST_CASE("assignment CSV and profile JSON render") {
  Rng rng(8);
  RandomScenario sc(2, 2, 2, rng);
  const PreferenceProfile prof =
      build_preferences(sc.stations, sc.devices, sc.ch, sc.cfg, FpcParams{}, SpaParams{});
  const Capacities caps = derive_capacities(sc.stations, 2, 2, SpaParams{});

  Assignment asg(2);
  apply_matching(spa_match(prof, caps).matching, prof, asg);
  const std::string csv = assignment_csv(asg);
  CHECK(csv.rfind("md_id,bs_id,subchannel,direction", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 2 MDs x 2 rows

  const auto j = nlohmann::json::parse(profile_json(prof, caps));
  CHECK(j["n_devices"] == 2);
  CHECK(j["omega"].size() == 2);
  CHECK(j["md_prefs"].size() == 2);
}
