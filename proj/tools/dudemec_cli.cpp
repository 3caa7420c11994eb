#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dudemec/baselines.hpp"
#include "dudemec/config.hpp"
#include "dudemec/harness.hpp"
#include "dudemec/topology.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::vector<std::string>& scheme_names, int drops,
                 const std::vector<int>& sweep_sbs, std::uint64_t seed, bool seed_set, bool plots,
                 int threads) {
  dudemec::ExperimentConfig cfg = dudemec::load_config(config_path);
  cfg.out_dir = out_dir;
  if (!scheme_names.empty()) {
    cfg.schemes.clear();
    for (const auto& name : scheme_names) {
      const auto scheme = dudemec::parse_scheme(name);
      if (!scheme) {
        std::cerr << "unknown scheme '" << name << "'; valid:";
        for (auto s : dudemec::all_schemes()) std::cerr << ' ' << dudemec::to_string(s);
        std::cerr << '\n';
        return 2;
      }
      cfg.schemes.push_back(*scheme);
    }
  }
  if (drops > 0) cfg.n_drops = drops;
  if (!sweep_sbs.empty()) cfg.sweep_sbs = sweep_sbs;
  if (seed_set) cfg.master_seed = seed;
  if (plots) cfg.plots = true;
  if (threads >= 0) cfg.threads = threads;
  cfg.validate();

  const dudemec::ExperimentResult result = dudemec::run_experiment(cfg);
  dudemec::emit_outputs(cfg, result);

  std::size_t n_drops_total = 0;
  for (const auto& sweep : result.sweeps) n_drops_total += sweep.drops.size();
  std::cout << "simulated " << result.sweeps.size() << " sweep point(s) x " << cfg.n_drops
            << " drop(s) x " << cfg.schemes.size() << " scheme(s) (" << n_drops_total
            << " drops total)\n"
            << "outputs: " << cfg.out_dir << "/summary.csv, drops.csv, manifest.json"
            << (cfg.plots ? ", plots/" : "") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled-access heterogeneous MEC network simulator"};
  app.require_subcommand(1);

  // simulate
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> scheme_names;
  int drops = 0;
  std::vector<int> sweep_sbs;
  std::uint64_t seed = 0;
  bool plots = false;
  int threads = -1;
  auto* sim = app.add_subcommand("simulate", "Run a seeded Monte-Carlo experiment");
  sim->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--schemes", scheme_names, "Subset of schemes to run")->delimiter(',');
  sim->add_option("--drops", drops, "Number of Monte-Carlo drops")->check(CLI::PositiveNumber);
  sim->add_option("--sweep-sbs", sweep_sbs, "SBS counts to sweep, e.g. 10,20,30")
      ->delimiter(',');
  auto* seed_opt = sim->add_option("--seed", seed, "Master seed");
  sim->add_flag("--plots", plots, "Also write SVG plots");
  sim->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // dump-topology
  std::string dump_config;
  int dump_drop = 0;
  int dump_sbs = -1;
  auto* dump = app.add_subcommand("dump-topology", "Print one drop's node layout as CSV");
  dump->add_option("--config", dump_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  dump->add_option("--drop", dump_drop, "Drop index")->check(CLI::NonNegativeNumber);
  dump->add_option("--sbs", dump_sbs, "Override the SBS count");

  // print-config
  auto* print = app.add_subcommand("print-config", "Print the built-in default config as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_simulate(config_path, out_dir, scheme_names, drops, sweep_sbs, seed,
                          seed_opt->count() > 0, plots, threads);
    }
    if (dump->parsed()) {
      dudemec::ExperimentConfig cfg = dudemec::load_config(dump_config);
      dudemec::NetworkConfig net = cfg.network;
      if (dump_sbs >= 0) net.sbs_count_override = dump_sbs;
      net.seed = dudemec::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(dump_drop));
      const auto [stations, devices] = dudemec::generate_topology(net);
      std::cout << dudemec::topology_csv(stations, devices);
      return 0;
    }
    if (print->parsed()) {
      std::cout << dudemec::config_to_json(dudemec::ExperimentConfig{});
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
