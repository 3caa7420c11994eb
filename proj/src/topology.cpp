#include "dudemec/topology.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dudemec/rng.hpp"

namespace dudemec {

void NetworkConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(area_width_m > 0.0 && area_height_m > 0.0, "area dimensions must be positive");
  require(mbs_density_per_km2 > 0.0, "mbs_density_per_km2 must be positive");
  require(sbs_density_per_km2 >= 0.0, "sbs_density_per_km2 must be non-negative");
  require(md_density_per_km2 > 0.0, "md_density_per_km2 must be positive");
  require(!sbs_count_override || *sbs_count_override >= 0,
          "sbs_count_override must be non-negative");
  require(carrier_frequency_hz > 0.0, "carrier_frequency_hz must be positive");
  require(reference_distance_m > 0.0, "reference_distance_m must be positive");
  require(pathloss_exponent > 0.0, "pathloss_exponent must be positive");
  require(shadowing_std_db >= 0.0, "shadowing_std_db must be non-negative");
  require(ul_bandwidth_hz > 0.0 && dl_bandwidth_hz > 0.0, "bandwidths must be positive");
  require(n_subchannels > 0, "n_subchannels must be positive");
  require(mbs_compute_cps > 0.0 && sbs_compute_cps > 0.0,
          "compute capacities must be positive");
  require(backhaul_capacity_bps > 0.0, "backhaul_capacity_bps must be positive");
}

ChannelTensor::ChannelTensor(int n_devices, int n_stations, int n_subchannels)
    : k_(n_devices),
      m_(n_stations),
      n_(n_subchannels),
      gain_(static_cast<std::size_t>(n_devices) * n_stations * n_subchannels * 2, 0.0),
      pl_db_(static_cast<std::size_t>(n_devices) * n_stations * 2, 0.0),
      dist_(static_cast<std::size_t>(n_devices) * n_stations, 0.0) {}

double pathloss_db(double distance_m, const NetworkConfig& cfg, double shadowing_db) {
  if (!(distance_m > 0.0)) throw std::domain_error("pathloss_db: distance must be positive");
  const double d0 = cfg.reference_distance_m;
  const double d = std::max(distance_m, d0);
  const double fspl_d0 =
      20.0 * std::log10(4.0 * M_PI * d0 * cfg.carrier_frequency_hz / kSpeedOfLight);
  return fspl_d0 + 10.0 * cfg.pathloss_exponent * std::log10(d / d0) + shadowing_db;
}

namespace {

int count_from_density(double density_per_km2, double area_km2) {
  // round-half-up keeps counts stable across platforms
  return static_cast<int>(std::floor(density_per_km2 * area_km2 + 0.5));
}

}  // namespace

std::pair<std::vector<Station>, std::vector<Device>> generate_topology(const NetworkConfig& cfg) {
  cfg.validate();
  const double area = cfg.area_km2();
  const int n_sbs = cfg.sbs_count_override ? *cfg.sbs_count_override
                                           : count_from_density(cfg.sbs_density_per_km2, area);
  const int n_md = count_from_density(cfg.md_density_per_km2, area);
  if (n_md <= 0) {
    throw std::invalid_argument("generate_topology: configuration yields zero devices");
  }

  Rng rng(derive_seed(cfg.seed, 1));  // stream 1: node placement

  std::vector<Station> stations;
  stations.reserve(1 + n_sbs);
  Station mbs;
  mbs.id = 0;
  mbs.kind = StationKind::MBS;
  mbs.x_m = cfg.area_width_m / 2.0;  // macro cell site at the area centre
  mbs.y_m = cfg.area_height_m / 2.0;
  mbs.max_tx_power_dbm = cfg.mbs_power_dbm;
  mbs.compute_capacity_cps = cfg.mbs_compute_cps;
  stations.push_back(mbs);
  for (int s = 0; s < n_sbs; ++s) {
    Station st;
    st.id = 1 + s;
    st.kind = StationKind::SBS;
    st.x_m = rng.uniform() * cfg.area_width_m;
    st.y_m = rng.uniform() * cfg.area_height_m;
    st.max_tx_power_dbm = cfg.sbs_power_dbm;
    st.compute_capacity_cps = cfg.sbs_compute_cps;
    stations.push_back(st);
  }

  std::vector<Device> devices;
  devices.reserve(n_md);
  for (int k = 0; k < n_md; ++k) {
    Device md;
    md.id = k;
    md.x_m = rng.uniform() * cfg.area_width_m;
    md.y_m = rng.uniform() * cfg.area_height_m;
    md.max_tx_power_dbm = cfg.md_power_dbm;
    devices.push_back(md);
  }
  return {std::move(stations), std::move(devices)};
}

ChannelTensor sample_channels(const std::vector<Station>& stations,
                              const std::vector<Device>& devices, const NetworkConfig& cfg,
                              std::uint64_t seed) {
  const int K = static_cast<int>(devices.size());
  const int M = static_cast<int>(stations.size());
  const int N = cfg.n_subchannels;
  ChannelTensor ch(K, M, N);
  Rng rng(seed);
  // Fixed draw order (k, m): shadowing UL, shadowing DL, then per subchannel
  // fading UL, fading DL. Changing this order changes every seeded result.
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      const double dx = devices[k].x_m - stations[m].x_m;
      const double dy = devices[k].y_m - stations[m].y_m;
      const double dist = std::max(std::hypot(dx, dy), cfg.reference_distance_m);
      ch.distance_m(k, m) = dist;
      const double chi_ul = rng.normal(cfg.shadowing_mean_db, cfg.shadowing_std_db);
      const double chi_dl = rng.normal(cfg.shadowing_mean_db, cfg.shadowing_std_db);
      ch.pathloss_db(k, m, Direction::UL) = pathloss_db(dist, cfg, chi_ul);
      ch.pathloss_db(k, m, Direction::DL) = pathloss_db(dist, cfg, chi_dl);
      const double large_ul = db_to_linear(-ch.pathloss_db(k, m, Direction::UL));
      const double large_dl = db_to_linear(-ch.pathloss_db(k, m, Direction::DL));
      for (int n = 0; n < N; ++n) {
        const double g_ul = rng.exponential(1.0);  // unit-mean Rayleigh power
        const double g_dl = rng.exponential(1.0);
        ch.gain(k, m, n, Direction::UL) = large_ul * g_ul;
        ch.gain(k, m, n, Direction::DL) = large_dl * g_dl;
      }
    }
  }
  return ch;
}

std::string topology_csv(const std::vector<Station>& stations,
                         const std::vector<Device>& devices) {
  std::ostringstream os;
  os.precision(17);
  os << "node_id,kind,x_m,y_m\n";
  for (const auto& st : stations) {
    os << st.id << ',' << (st.kind == StationKind::MBS ? "mbs" : "sbs") << ',' << st.x_m << ','
       << st.y_m << '\n';
  }
  for (const auto& md : devices) {
    os << md.id << ",md," << md.x_m << ',' << md.y_m << '\n';
  }
  return os.str();
}

}  // namespace dudemec
