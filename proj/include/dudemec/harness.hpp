#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dudemec/config.hpp"
#include "dudemec/mec.hpp"

namespace dudemec {

/// Per-drop, per-scheme record: the metric report plus pipeline diagnostics.
struct SchemeDropMetrics {
  SchemeId scheme = SchemeId::Cuda;
  MetricsReport metrics;
  int ul_overflow = 0;   // MDs left without an UL subchannel
  int dl_overflow = 0;   // MDs left without a DL subchannel (shared DL side)
  int n_decoupled = 0;   // served MDs whose UL and DL cells differ
  int n_fallback = 0;    // matching schemes: MDs placed by the completion step
  int n_swaps = 0;
  int opa_rounds = 0;    // optimal-power invocations in the alternation
  bool opa_converged = true;
  double sum_ul_power_w = 0.0;
};

struct DropResult {
  int drop_index = 0;
  std::uint64_t drop_seed = 0;
  int sbs_count = 0;  // realized SBS count of this topology
  int n_devices = 0;
  std::vector<SchemeDropMetrics> schemes;  // ordered as in the config
};

/// Everything a drop derives from its seed: the concrete network, tasks and
/// channel realization. Split out so tests can drive individual pipeline
/// stages on exactly the drops the harness would run.
struct DropScenario {
  NetworkConfig net;  // per-drop seed and SBS override applied
  std::uint64_t drop_seed = 0;
  std::vector<Station> stations;
  std::vector<Device> devices;
  ChannelTensor ch;
};

DropScenario build_scenario(const ExperimentConfig& cfg, int sbs_override, int drop_index);

/// One fully deterministic Monte-Carlo drop: the result is a pure function of
/// (config, sbs_override, drop_index). sbs_override < 0 keeps the
/// density-derived SBS count; the drop seed is shared across sweep points so
/// sweeps compare under common random numbers.
DropResult run_drop(const ExperimentConfig& cfg, int sbs_override, int drop_index);

struct SweepResult {
  int sbs_override = -1;
  std::vector<DropResult> drops;
};

struct ExperimentResult {
  std::vector<SweepResult> sweeps;
};

/// Runs every (sweep point, drop) job, optionally across threads; the result
/// is identical regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// CSV/JSON renderings (exposed for tests; emit_outputs writes these).
std::string summary_csv(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string drops_csv(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string manifest_json(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Writes summary.csv, drops.csv, manifest.json and (with cfg.plots)
/// plots/*.svg under cfg.out_dir. Every file is written to a temporary name
/// and renamed into place so partial files never overwrite good ones.
void emit_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Atomic text-file write used for all outputs.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace dudemec
