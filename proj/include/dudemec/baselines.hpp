#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dudemec/mec.hpp"
#include "dudemec/power.hpp"
#include "dudemec/topology.hpp"

namespace dudemec {

/// The evaluated association / allocation / power-control combinations.
enum class SchemeId {
  Cuda,       // coupled access: UL follows the biased-RSRP DL cell
  MinPlGFpc,  // decoupled UL via minimum effective path loss, greedy channels
  SpaFpc,     // three-party matching, fractional power control
  SpaSmFpc,   // matching refined by swap operations
  SpaSmOpa,   // matching + swaps + optimal transmit power
};

std::string to_string(SchemeId scheme);
std::optional<SchemeId> parse_scheme(std::string_view name);
const std::vector<SchemeId>& all_schemes();

/// Association biases in dB. RSRP biases steer the DL cell choice (and the
/// CUDA UL); the W_m weights enter the decoupled UL rule. All default to 0.
struct BiasConfig {
  double dl_bias_mbs_db = 0.0;
  double dl_bias_sbs_db = 0.0;
  double ul_w_mbs_db = 0.0;
  double ul_w_sbs_db = 0.0;

  double dl_bias_db(StationKind kind) const {
    return kind == StationKind::MBS ? dl_bias_mbs_db : dl_bias_sbs_db;
  }
  double ul_w_db(StationKind kind) const {
    return kind == StationKind::MBS ? ul_w_mbs_db : ul_w_sbs_db;
  }
};

/// Per MD, the BS with the highest biased received power
/// (tx power dBm - DL path loss + bias), ties to the lowest BS id.
std::vector<int> associate_biased_rsrp(const std::vector<Station>& stations,
                                       const ChannelTensor& ch, const BiasConfig& bias);

/// Decoupled UL rule: argmax over BSs of the received power under that
/// candidate's own open-loop power (FPC dBm - UL path loss + W_m), ties to
/// the lowest BS id.
std::vector<int> associate_min_pl(const std::vector<Station>& stations,
                                  const std::vector<Device>& devices, const ChannelTensor& ch,
                                  const FpcParams& fpc, const BiasConfig& bias);

/// Greedy orthogonal subchannel allocation inside each cell: all
/// (member, channel) pairs ranked by interference-free SNR
/// weight_w[k] * gain / noise, descending (ties by MD id then channel id),
/// assigned while both sides are free. Members beyond the cell's N channels
/// overflow and get no channel (-1).
struct GreedyResult {
  std::vector<int> chan;  // per MD: subchannel or -1
  int n_overflow = 0;
};
GreedyResult greedy_subchannels(const std::vector<int>& assoc_bs,
                                const std::vector<double>& weight_w, const ChannelTensor& ch,
                                const NetworkConfig& cfg, Direction dir);

/// The DL side shared by every scheme: biased-RSRP association, greedy DL
/// subchannels per cell, and each BS's power split equally over the N
/// subchannels. Writes dl_bs/dl_chan (both -1 for overflow MDs) and dl_w.
/// Returns the number of DL-overflow MDs.
int allocate_dl(Assignment& asg, PowerAllocation& powers, const std::vector<Station>& stations,
                const std::vector<Device>& devices, const ChannelTensor& ch,
                const NetworkConfig& cfg, const BiasConfig& bias);

/// Coupled or decoupled UL for the non-matching baselines: takes a per-MD
/// association, allocates greedy UL subchannels under FPC powers, and writes
/// ul_bs/ul_chan (-1 on overflow) plus powers.ul_w. Returns UL overflow count.
int allocate_ul_greedy(Assignment& asg, PowerAllocation& powers,
                       const std::vector<int>& assoc_bs, const std::vector<Device>& devices,
                       const ChannelTensor& ch, const NetworkConfig& cfg, const FpcParams& fpc,
                       double p_floor_scale);

}  // namespace dudemec
