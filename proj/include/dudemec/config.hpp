#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dudemec/baselines.hpp"
#include "dudemec/matching.hpp"
#include "dudemec/power.hpp"
#include "dudemec/rng.hpp"
#include "dudemec/task.hpp"
#include "dudemec/topology.hpp"

namespace dudemec {

/// Random task model: B^I ~ U[min, max] bits, output = ratio * input, and a
/// uniformly chosen CPU-cycles-per-bit class.
struct TaskDistribution {
  double input_bits_min = 3e6;
  double input_bits_max = 6e6;
  double output_ratio = 0.2;
  std::vector<double> cycles_per_bit_classes = {330.0, 960.0, 1900.0};

  void validate() const;
  TaskSpec sample(Rng& rng) const;
};

/// Everything one experiment needs; serializable to/from JSON so a run is
/// reproducible from its manifest alone.
struct ExperimentConfig {
  NetworkConfig network;
  SolverParams solver;
  FpcParams fpc;
  BiasConfig bias;
  SpaParams spa;
  SwapParams swap;
  TaskDistribution tasks;

  std::vector<SchemeId> schemes = all_schemes();
  int n_drops = 50;
  /// SBS counts to sweep; empty runs the single density-derived point.
  std::vector<int> sweep_sbs;
  std::uint64_t master_seed = 12345;
  /// Cap on swap <-> optimal-power alternation rounds.
  int max_swap_opa_rounds = 5;
  std::string out_dir = "out";
  bool plots = false;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Parse from a JSON document; absent keys keep their defaults, unknown keys
/// throw std::invalid_argument naming the offender.
ExperimentConfig config_from_json(const std::string& text);
/// Pretty-printed JSON carrying every field.
std::string config_to_json(const ExperimentConfig& cfg);
/// Reads and parses a config file; throws std::runtime_error when unreadable.
ExperimentConfig load_config(const std::string& path);

}  // namespace dudemec
