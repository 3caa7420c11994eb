#include "dudemec/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <json.hpp>

namespace dudemec {

void TaskDistribution::validate() const {
  if (!(input_bits_min > 0) || !(input_bits_max >= input_bits_min)) {
    throw std::invalid_argument("tasks: need 0 < input_bits_min <= input_bits_max");
  }
  if (!(output_ratio > 0)) throw std::invalid_argument("tasks: output_ratio must be positive");
  if (cycles_per_bit_classes.empty()) {
    throw std::invalid_argument("tasks: need at least one cycles_per_bit class");
  }
  for (double c : cycles_per_bit_classes) {
    if (!(c > 0)) throw std::invalid_argument("tasks: cycles_per_bit classes must be positive");
  }
}

TaskSpec TaskDistribution::sample(Rng& rng) const {
  TaskSpec t;
  t.input_bits = input_bits_min + (input_bits_max - input_bits_min) * rng.uniform();
  t.output_ratio = output_ratio;
  t.cycles_per_bit =
      cycles_per_bit_classes[rng.below(static_cast<std::uint64_t>(cycles_per_bit_classes.size()))];
  return t;
}

void ExperimentConfig::validate() const {
  network.validate();
  solver.validate();
  tasks.validate();
  if (n_drops <= 0) throw std::invalid_argument("n_drops must be positive");
  if (schemes.empty()) throw std::invalid_argument("need at least one scheme");
  for (int s : sweep_sbs) {
    if (s <= 0) throw std::invalid_argument("sweep_sbs entries must be positive");
  }
  if (max_swap_opa_rounds < 1) throw std::invalid_argument("max_swap_opa_rounds must be >= 1");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must not be empty");
}

namespace {

using nlohmann::json;

/// Rejects keys outside the whitelist so config typos fail loudly instead of
/// silently keeping defaults.
void check_keys(const json& j, const char* section,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string("config section '") + section +
                                "' must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in config section '" + section + "'");
    }
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void read_network(const json& j, NetworkConfig& net) {
  check_keys(j, "network",
             {"area_width_m", "area_height_m", "mbs_density_per_km2", "sbs_density_per_km2",
              "md_density_per_km2", "sbs_count_override", "carrier_frequency_hz",
              "reference_distance_m", "pathloss_exponent", "shadowing_mean_db",
              "shadowing_std_db", "ul_bandwidth_hz", "dl_bandwidth_hz", "n_subchannels",
              "noise_density_dbm_hz", "mbs_power_dbm", "sbs_power_dbm", "md_power_dbm",
              "mbs_compute_cps", "sbs_compute_cps", "backhaul_capacity_bps", "seed"});
  get_if(j, "area_width_m", net.area_width_m);
  get_if(j, "area_height_m", net.area_height_m);
  get_if(j, "mbs_density_per_km2", net.mbs_density_per_km2);
  get_if(j, "sbs_density_per_km2", net.sbs_density_per_km2);
  get_if(j, "md_density_per_km2", net.md_density_per_km2);
  if (j.contains("sbs_count_override")) {
    if (j.at("sbs_count_override").is_null()) {
      net.sbs_count_override.reset();
    } else {
      net.sbs_count_override = j.at("sbs_count_override").get<int>();
    }
  }
  get_if(j, "carrier_frequency_hz", net.carrier_frequency_hz);
  get_if(j, "reference_distance_m", net.reference_distance_m);
  get_if(j, "pathloss_exponent", net.pathloss_exponent);
  get_if(j, "shadowing_mean_db", net.shadowing_mean_db);
  get_if(j, "shadowing_std_db", net.shadowing_std_db);
  get_if(j, "ul_bandwidth_hz", net.ul_bandwidth_hz);
  get_if(j, "dl_bandwidth_hz", net.dl_bandwidth_hz);
  get_if(j, "n_subchannels", net.n_subchannels);
  get_if(j, "noise_density_dbm_hz", net.noise_density_dbm_hz);
  get_if(j, "mbs_power_dbm", net.mbs_power_dbm);
  get_if(j, "sbs_power_dbm", net.sbs_power_dbm);
  get_if(j, "md_power_dbm", net.md_power_dbm);
  get_if(j, "mbs_compute_cps", net.mbs_compute_cps);
  get_if(j, "sbs_compute_cps", net.sbs_compute_cps);
  get_if(j, "backhaul_capacity_bps", net.backhaul_capacity_bps);
  get_if(j, "seed", net.seed);
}

json network_to_json(const NetworkConfig& net) {
  json j;
  j["area_width_m"] = net.area_width_m;
  j["area_height_m"] = net.area_height_m;
  j["mbs_density_per_km2"] = net.mbs_density_per_km2;
  j["sbs_density_per_km2"] = net.sbs_density_per_km2;
  j["md_density_per_km2"] = net.md_density_per_km2;
  j["sbs_count_override"] =
      net.sbs_count_override ? json(*net.sbs_count_override) : json(nullptr);
  j["carrier_frequency_hz"] = net.carrier_frequency_hz;
  j["reference_distance_m"] = net.reference_distance_m;
  j["pathloss_exponent"] = net.pathloss_exponent;
  j["shadowing_mean_db"] = net.shadowing_mean_db;
  j["shadowing_std_db"] = net.shadowing_std_db;
  j["ul_bandwidth_hz"] = net.ul_bandwidth_hz;
  j["dl_bandwidth_hz"] = net.dl_bandwidth_hz;
  j["n_subchannels"] = net.n_subchannels;
  j["noise_density_dbm_hz"] = net.noise_density_dbm_hz;
  j["mbs_power_dbm"] = net.mbs_power_dbm;
  j["sbs_power_dbm"] = net.sbs_power_dbm;
  j["md_power_dbm"] = net.md_power_dbm;
  j["mbs_compute_cps"] = net.mbs_compute_cps;
  j["sbs_compute_cps"] = net.sbs_compute_cps;
  j["backhaul_capacity_bps"] = net.backhaul_capacity_bps;
  j["seed"] = net.seed;
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "<top>",
             {"network", "solver", "fpc", "bias", "spa", "swap", "tasks", "schemes", "n_drops",
              "sweep_sbs", "master_seed", "max_swap_opa_rounds", "out_dir", "plots", "threads"});

  ExperimentConfig cfg;
  if (j.contains("network")) read_network(j.at("network"), cfg.network);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver",
               {"zeta", "eps", "inner_tol", "outer_tol", "max_outer", "max_inner", "max_armijo",
                "p_floor_scale", "max_cd_sweeps", "cd_tol", "trust_delta_q"});
    get_if(s, "zeta", cfg.solver.zeta);
    get_if(s, "eps", cfg.solver.eps);
    get_if(s, "inner_tol", cfg.solver.inner_tol);
    get_if(s, "outer_tol", cfg.solver.outer_tol);
    get_if(s, "max_outer", cfg.solver.max_outer);
    get_if(s, "max_inner", cfg.solver.max_inner);
    get_if(s, "max_armijo", cfg.solver.max_armijo);
    get_if(s, "p_floor_scale", cfg.solver.p_floor_scale);
    get_if(s, "max_cd_sweeps", cfg.solver.max_cd_sweeps);
    get_if(s, "cd_tol", cfg.solver.cd_tol);
    get_if(s, "trust_delta_q", cfg.solver.trust_delta_q);
  }
  if (j.contains("fpc")) {
    const json& s = j.at("fpc");
    check_keys(s, "fpc", {"p0_dbm", "w"});
    get_if(s, "p0_dbm", cfg.fpc.p0_dbm);
    get_if(s, "w", cfg.fpc.w);
  }
  if (j.contains("bias")) {
    const json& s = j.at("bias");
    check_keys(s, "bias", {"dl_bias_mbs_db", "dl_bias_sbs_db", "ul_w_mbs_db", "ul_w_sbs_db"});
    get_if(s, "dl_bias_mbs_db", cfg.bias.dl_bias_mbs_db);
    get_if(s, "dl_bias_sbs_db", cfg.bias.dl_bias_sbs_db);
    get_if(s, "ul_w_mbs_db", cfg.bias.ul_w_mbs_db);
    get_if(s, "ul_w_sbs_db", cfg.bias.ul_w_sbs_db);
  }
  if (j.contains("spa")) {
    const json& s = j.at("spa");
    check_keys(s, "spa", {"m_k", "nu_mbs", "nu_sbs"});
    get_if(s, "m_k", cfg.spa.m_k);
    get_if(s, "nu_mbs", cfg.spa.nu_mbs);
    get_if(s, "nu_sbs", cfg.spa.nu_sbs);
  }
  if (j.contains("swap")) {
    const json& s = j.at("swap");
    check_keys(s, "swap", {"slack", "max_passes"});
    get_if(s, "slack", cfg.swap.slack);
    get_if(s, "max_passes", cfg.swap.max_passes);
  }
  if (j.contains("tasks")) {
    const json& s = j.at("tasks");
    check_keys(s, "tasks",
               {"input_bits_min", "input_bits_max", "output_ratio", "cycles_per_bit_classes"});
    get_if(s, "input_bits_min", cfg.tasks.input_bits_min);
    get_if(s, "input_bits_max", cfg.tasks.input_bits_max);
    get_if(s, "output_ratio", cfg.tasks.output_ratio);
    get_if(s, "cycles_per_bit_classes", cfg.tasks.cycles_per_bit_classes);
  }
  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& name : j.at("schemes")) {
      const auto scheme = parse_scheme(name.get<std::string>());
      if (!scheme) {
        throw std::invalid_argument("unknown scheme '" + name.get<std::string>() + "'");
      }
      cfg.schemes.push_back(*scheme);
    }
  }
  get_if(j, "n_drops", cfg.n_drops);
  get_if(j, "sweep_sbs", cfg.sweep_sbs);
  get_if(j, "master_seed", cfg.master_seed);
  get_if(j, "max_swap_opa_rounds", cfg.max_swap_opa_rounds);
  get_if(j, "out_dir", cfg.out_dir);
  get_if(j, "plots", cfg.plots);
  get_if(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["network"] = network_to_json(cfg.network);
  j["solver"] = {{"zeta", cfg.solver.zeta},
                 {"eps", cfg.solver.eps},
                 {"inner_tol", cfg.solver.inner_tol},
                 {"outer_tol", cfg.solver.outer_tol},
                 {"max_outer", cfg.solver.max_outer},
                 {"max_inner", cfg.solver.max_inner},
                 {"max_armijo", cfg.solver.max_armijo},
                 {"p_floor_scale", cfg.solver.p_floor_scale},
                 {"max_cd_sweeps", cfg.solver.max_cd_sweeps},
                 {"cd_tol", cfg.solver.cd_tol},
                 {"trust_delta_q", cfg.solver.trust_delta_q}};
  j["fpc"] = {{"p0_dbm", cfg.fpc.p0_dbm}, {"w", cfg.fpc.w}};
  j["bias"] = {{"dl_bias_mbs_db", cfg.bias.dl_bias_mbs_db},
               {"dl_bias_sbs_db", cfg.bias.dl_bias_sbs_db},
               {"ul_w_mbs_db", cfg.bias.ul_w_mbs_db},
               {"ul_w_sbs_db", cfg.bias.ul_w_sbs_db}};
  j["spa"] = {{"m_k", cfg.spa.m_k}, {"nu_mbs", cfg.spa.nu_mbs}, {"nu_sbs", cfg.spa.nu_sbs}};
  j["swap"] = {{"slack", cfg.swap.slack}, {"max_passes", cfg.swap.max_passes}};
  j["tasks"] = {{"input_bits_min", cfg.tasks.input_bits_min},
                {"input_bits_max", cfg.tasks.input_bits_max},
                {"output_ratio", cfg.tasks.output_ratio},
                {"cycles_per_bit_classes", cfg.tasks.cycles_per_bit_classes}};
  std::vector<std::string> names;
  names.reserve(cfg.schemes.size());
  for (SchemeId s : cfg.schemes) names.push_back(to_string(s));
  j["schemes"] = names;
  j["n_drops"] = cfg.n_drops;
  j["sweep_sbs"] = cfg.sweep_sbs;
  j["master_seed"] = cfg.master_seed;
  j["max_swap_opa_rounds"] = cfg.max_swap_opa_rounds;
  j["out_dir"] = cfg.out_dir;
  j["plots"] = cfg.plots;
  j["threads"] = cfg.threads;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace dudemec
