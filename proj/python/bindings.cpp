#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "dudemec/config.hpp"
#include "dudemec/harness.hpp"
#include "dudemec/mec.hpp"
#include "dudemec/power.hpp"
#include "dudemec/rng.hpp"
#include "dudemec/topology.hpp"

namespace py = pybind11;

namespace {

nlohmann::json drop_to_json(const dudemec::ExperimentConfig& cfg, const dudemec::DropResult& drop) {
  nlohmann::json j;
  j["drop_index"] = drop.drop_index;
  j["drop_seed"] = drop.drop_seed;
  j["sbs_count"] = drop.sbs_count;
  j["n_devices"] = drop.n_devices;
  nlohmann::json schemes = nlohmann::json::array();
  for (std::size_t si = 0; si < drop.schemes.size(); ++si) {
    const auto& r = drop.schemes[si];
    nlohmann::json s;
    s["scheme"] = dudemec::to_string(cfg.schemes[si]);
    s["n_served"] = r.metrics.n_served;
    s["n_unserved"] = r.metrics.n_unserved;
    s["sum_latency_s"] = r.metrics.sum_latency_s;
    s["sum_ul_latency_s"] = r.metrics.sum_ul_latency_s;
    s["sum_exe_latency_s"] = r.metrics.sum_exe_latency_s;
    s["sum_bh_latency_s"] = r.metrics.sum_bh_latency_s;
    s["sum_dl_latency_s"] = r.metrics.sum_dl_latency_s;
    s["energy_efficiency_bps_per_w"] = r.metrics.energy_efficiency_bps_per_w;
    s["jain_ul"] = r.metrics.jain_ul;
    s["jain_exe"] = r.metrics.jain_exe;
    s["mean_ul_rate_bps"] = r.metrics.mean_ul_rate_bps;
    s["rate_percentiles_bps"] = r.metrics.rate_percentiles_bps;
    s["ul_overflow"] = r.ul_overflow;
    s["dl_overflow"] = r.dl_overflow;
    s["n_decoupled"] = r.n_decoupled;
    s["n_fallback"] = r.n_fallback;
    s["n_swaps"] = r.n_swaps;
    s["opa_rounds"] = r.opa_rounds;
    s["opa_converged"] = r.opa_converged;
    s["sum_ul_power_w"] = r.sum_ul_power_w;
    schemes.push_back(std::move(s));
  }
  j["schemes"] = std::move(schemes);
  return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decoupled-access heterogeneous MEC network simulator (C++ core)";

  m.def(
      "pathloss_db",
      [](double distance_m, double frequency_hz, double pathloss_exponent,
         double reference_distance_m, double shadowing_db) {
        dudemec::NetworkConfig cfg;
        cfg.carrier_frequency_hz = frequency_hz;
        cfg.pathloss_exponent = pathloss_exponent;
        cfg.reference_distance_m = reference_distance_m;
        return dudemec::pathloss_db(distance_m, cfg, shadowing_db);
      },
      py::arg("distance_m"), py::kw_only(), py::arg("frequency_hz") = 2e9,
      py::arg("pathloss_exponent") = 3.0, py::arg("reference_distance_m") = 1.0,
      py::arg("shadowing_db") = 0.0,
      "Close-in reference path loss in dB (20log10(4*pi*d0*f/c) + 10*phi*log10(d/d0) + chi)");

  m.def(
      "fpc_power_dbm",
      [](double pathloss_db, double max_power_dbm, double p0_dbm, double w) {
        return dudemec::fpc_power_dbm(pathloss_db, max_power_dbm, {p0_dbm, w});
      },
      py::arg("pathloss_db"), py::arg("max_power_dbm") = 23.0, py::kw_only(),
      py::arg("p0_dbm") = -80.0, py::arg("w") = 0.7,
      "Open-loop fractional power control: min(P_max, w*PL + P0) in dBm");

  m.def("jain_index", &dudemec::jain_index, py::arg("values"),
        "Jain fairness index (sum x)^2 / (n * sum x^2)");

  m.def("rate_percentiles", &dudemec::rate_percentiles, py::arg("rates"),
        "Nearest-rank percentiles at {10, 20, 50, 80, 90}");

  m.def("derive_seed", &dudemec::derive_seed, py::arg("master"), py::arg("stream"),
        "Deterministic substream seed derivation");

  m.def(
      "default_config_json", [] { return dudemec::config_to_json(dudemec::ExperimentConfig{}); },
      "Built-in default experiment config as pretty JSON");

  m.def(
      "run_drop_json",
      [](const std::string& config_json, int sbs_override, int drop_index) {
        const auto cfg = dudemec::config_from_json(config_json);
        const auto drop = dudemec::run_drop(cfg, sbs_override, drop_index);
        return drop_to_json(cfg, drop).dump(2);
      },
      py::arg("config_json"), py::arg("sbs_override") = -1, py::arg("drop_index") = 0,
      "Run one deterministic drop; returns the per-scheme metrics as JSON");

  m.def(
      "simulate",
      [](const std::string& config_json, const std::string& out_dir) {
        auto cfg = dudemec::config_from_json(config_json);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();
        const auto result = dudemec::run_experiment(cfg);
        dudemec::emit_outputs(cfg, result);
        return dudemec::summary_csv(cfg, result);
      },
      py::arg("config_json"), py::arg("out_dir") = std::string(),
      "Run the full experiment, write outputs, and return summary.csv text");

  m.attr("__version__") = "0.1.0";
}
