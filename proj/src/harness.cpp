#include "dudemec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dudemec/baselines.hpp"
#include "dudemec/matching.hpp"
#include "dudemec/power.hpp"
#include "dudemec/svg.hpp"

namespace dudemec {

namespace {

SchemeDropMetrics run_scheme(SchemeId scheme, const Assignment& dl_template,
                             const PowerAllocation& dl_powers, const std::vector<Station>& stations,
                             const std::vector<Device>& devices, const ChannelTensor& ch,
                             const NetworkConfig& net, const ExperimentConfig& cfg,
                             int dl_overflow) {
  const int K = static_cast<int>(devices.size());
  Assignment asg = dl_template;
  PowerAllocation powers = dl_powers;
  powers.ul_w.assign(K, 0.0);

  SchemeDropMetrics rec;
  rec.scheme = scheme;
  rec.dl_overflow = dl_overflow;

  if (scheme == SchemeId::Cuda) {
    const auto assoc = associate_biased_rsrp(stations, ch, cfg.bias);
    rec.ul_overflow = allocate_ul_greedy(asg, powers, assoc, devices, ch, net, cfg.fpc,
                                         cfg.solver.p_floor_scale);
  } else if (scheme == SchemeId::MinPlGFpc) {
    const auto assoc = associate_min_pl(stations, devices, ch, cfg.fpc, cfg.bias);
    rec.ul_overflow = allocate_ul_greedy(asg, powers, assoc, devices, ch, net, cfg.fpc,
                                         cfg.solver.p_floor_scale);
  } else {
    const PreferenceProfile prof = build_preferences(stations, devices, ch, net, cfg.fpc, cfg.spa);
    const Capacities caps = derive_capacities(stations, K, net.n_subchannels, cfg.spa);
    const SpaResult spa = spa_match(prof, caps);
    apply_matching(spa.matching, prof, asg);
    powers.ul_w = fpc_powers(asg, ch, devices, cfg.fpc, cfg.solver.p_floor_scale);
    rec.n_fallback = static_cast<int>(complete_assignment(asg, stations, devices, ch, net,
                                                          cfg.fpc, cfg.solver.p_floor_scale,
                                                          powers.ul_w)
                                          .size());
    for (int k = 0; k < K; ++k) rec.ul_overflow += asg.ul_served(k) ? 0 : 1;

    if (scheme != SchemeId::SpaFpc) {
      const SwapResult sw = swap_match(asg, powers, ch, net, devices, cfg.swap);
      rec.n_swaps = sw.n_swaps;
    }
    if (scheme == SchemeId::SpaSmOpa) {
      // Alternate optimal power with swap restoration until both fix points
      // hold or the round cap bites.
      for (int round = 0; round < cfg.max_swap_opa_rounds; ++round) {
        const UplinkSystem sys(asg, ch, devices, net);
        try {
          const PowerResult pr = solve_optimal_power(sys, cfg.solver, powers.ul_w);
          powers.ul_w = pr.p_ul_w;
          rec.opa_converged = pr.converged;
        } catch (const std::exception&) {
          rec.opa_converged = false;  // keep the last good powers
          break;
        }
        ++rec.opa_rounds;
        if (!rec.opa_converged) break;
        if (certify_exchange_stable(asg, powers, ch, net, devices, cfg.swap.slack)) break;
        const SwapResult sw = swap_match(asg, powers, ch, net, devices, cfg.swap);
        rec.n_swaps += sw.n_swaps;
        if (sw.n_swaps == 0) break;
      }
    }
  }

  rec.metrics = compute_metrics(stations, devices, net, ch, asg, powers);
  for (int k = 0; k < K; ++k) {
    if (asg.decoupled(k)) ++rec.n_decoupled;
    if (asg.ul_served(k)) rec.sum_ul_power_w += powers.ul_w[k];
  }
  return rec;
}

}  // namespace

DropScenario build_scenario(const ExperimentConfig& cfg, int sbs_override, int drop_index) {
  DropScenario sc;
  sc.net = cfg.network;
  if (sbs_override >= 0) sc.net.sbs_count_override = sbs_override;
  sc.drop_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(drop_index));
  sc.net.seed = sc.drop_seed;

  std::tie(sc.stations, sc.devices) = generate_topology(sc.net);
  Rng task_rng(derive_seed(sc.drop_seed, 2));
  for (auto& d : sc.devices) d.task = cfg.tasks.sample(task_rng);
  sc.ch = sample_channels(sc.stations, sc.devices, sc.net, derive_seed(sc.drop_seed, 3));
  return sc;
}

DropResult run_drop(const ExperimentConfig& cfg, int sbs_override, int drop_index) {
  DropScenario sc = build_scenario(cfg, sbs_override, drop_index);
  const NetworkConfig& net = sc.net;
  const std::vector<Station>& stations = sc.stations;
  const std::vector<Device>& devices = sc.devices;
  const ChannelTensor& ch = sc.ch;
  const std::uint64_t drop_seed = sc.drop_seed;

  const int K = static_cast<int>(devices.size());
  Assignment dl_template(K);
  PowerAllocation dl_powers;
  const int dl_overflow =
      allocate_dl(dl_template, dl_powers, stations, devices, ch, net, cfg.bias);

  DropResult out;
  out.drop_index = drop_index;
  out.drop_seed = drop_seed;
  out.sbs_count = static_cast<int>(stations.size()) - 1;
  out.n_devices = K;
  out.schemes.reserve(cfg.schemes.size());
  for (SchemeId scheme : cfg.schemes) {
    out.schemes.push_back(
        run_scheme(scheme, dl_template, dl_powers, stations, devices, ch, net, cfg, dl_overflow));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::vector<int> points;
  if (cfg.sweep_sbs.empty()) {
    points.push_back(-1);
  } else {
    points.assign(cfg.sweep_sbs.begin(), cfg.sweep_sbs.end());
  }

  ExperimentResult result;
  result.sweeps.resize(points.size());
  for (std::size_t s = 0; s < points.size(); ++s) {
    result.sweeps[s].sbs_override = points[s];
    result.sweeps[s].drops.resize(cfg.n_drops);
  }

  struct Job {
    std::size_t sweep;
    int drop;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < points.size(); ++s) {
    for (int d = 0; d < cfg.n_drops; ++d) jobs.push_back({s, d});
  }

  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));

  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        result.sweeps[jobs[j].sweep].drops[jobs[j].drop] =
            run_drop(cfg, points[jobs[j].sweep], jobs[j].drop);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return result;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

/// Per-(sweep, scheme) column extraction across drops.
std::vector<double> column(const SweepResult& sweep, std::size_t scheme_index,
                           double (*get)(const SchemeDropMetrics&)) {
  std::vector<double> xs;
  xs.reserve(sweep.drops.size());
  for (const auto& drop : sweep.drops) xs.push_back(get(drop.schemes[scheme_index]));
  return xs;
}

struct SummaryColumn {
  const char* name;
  double (*get)(const SchemeDropMetrics&);
};

constexpr SummaryColumn kSummaryColumns[] = {
    {"sum_latency_s", [](const SchemeDropMetrics& r) { return r.metrics.sum_latency_s; }},
    {"sum_ul_latency_s", [](const SchemeDropMetrics& r) { return r.metrics.sum_ul_latency_s; }},
    {"sum_exe_latency_s", [](const SchemeDropMetrics& r) { return r.metrics.sum_exe_latency_s; }},
    {"sum_bh_latency_s", [](const SchemeDropMetrics& r) { return r.metrics.sum_bh_latency_s; }},
    {"sum_dl_latency_s", [](const SchemeDropMetrics& r) { return r.metrics.sum_dl_latency_s; }},
    {"energy_efficiency_bps_per_w",
     [](const SchemeDropMetrics& r) { return r.metrics.energy_efficiency_bps_per_w; }},
    {"jain_ul", [](const SchemeDropMetrics& r) { return r.metrics.jain_ul; }},
    {"jain_exe", [](const SchemeDropMetrics& r) { return r.metrics.jain_exe; }},
    {"mean_ul_rate_bps", [](const SchemeDropMetrics& r) { return r.metrics.mean_ul_rate_bps; }},
    {"n_served", [](const SchemeDropMetrics& r) { return double(r.metrics.n_served); }},
    {"n_unserved", [](const SchemeDropMetrics& r) { return double(r.metrics.n_unserved); }},
    {"n_decoupled", [](const SchemeDropMetrics& r) { return double(r.n_decoupled); }},
    {"n_swaps", [](const SchemeDropMetrics& r) { return double(r.n_swaps); }},
    {"opa_rounds", [](const SchemeDropMetrics& r) { return double(r.opa_rounds); }},
    {"sum_ul_power_w", [](const SchemeDropMetrics& r) { return r.sum_ul_power_w; }},
};

}  // namespace

std::string summary_csv(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream os;
  os << "sbs_count,scheme,n_drops";
  for (const auto& col : kSummaryColumns) os << ",mean_" << col.name << ",std_" << col.name;
  os << '\n';
  for (const auto& sweep : result.sweeps) {
    const int sbs_count = sweep.drops.empty() ? sweep.sbs_override : sweep.drops[0].sbs_count;
    for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
      os << sbs_count << ',' << to_string(cfg.schemes[si]) << ',' << sweep.drops.size();
      for (const auto& col : kSummaryColumns) {
        const MeanStd ms = mean_std(column(sweep, si, col.get));
        os << ',' << num(ms.mean) << ',' << num(ms.std);
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string drops_csv(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream os;
  os << "sbs_count,drop,scheme,drop_seed,n_devices,n_served,n_unserved,sum_latency_s,"
        "sum_ul_latency_s,sum_exe_latency_s,sum_bh_latency_s,sum_dl_latency_s,"
        "energy_efficiency_bps_per_w,jain_ul,jain_exe,mean_ul_rate_bps,rate_p10_bps,"
        "rate_p20_bps,rate_p50_bps,rate_p80_bps,rate_p90_bps,ul_overflow,dl_overflow,"
        "n_decoupled,n_fallback,n_swaps,opa_rounds,opa_converged,sum_ul_power_w\n";
  for (const auto& sweep : result.sweeps) {
    for (const auto& drop : sweep.drops) {
      for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
        const SchemeDropMetrics& r = drop.schemes[si];
        const MetricsReport& m = r.metrics;
        os << drop.sbs_count << ',' << drop.drop_index << ',' << to_string(cfg.schemes[si]) << ','
           << drop.drop_seed << ',' << drop.n_devices << ',' << m.n_served << ',' << m.n_unserved
           << ',' << num(m.sum_latency_s) << ',' << num(m.sum_ul_latency_s) << ','
           << num(m.sum_exe_latency_s) << ',' << num(m.sum_bh_latency_s) << ','
           << num(m.sum_dl_latency_s) << ',' << num(m.energy_efficiency_bps_per_w) << ','
           << num(m.jain_ul) << ',' << num(m.jain_exe) << ',' << num(m.mean_ul_rate_bps);
        for (int pct : {10, 20, 50, 80, 90}) {
          const auto it = m.rate_percentiles_bps.find(pct);
          os << ',' << num(it == m.rate_percentiles_bps.end() ? 0.0 : it->second);
        }
        os << ',' << r.ul_overflow << ',' << r.dl_overflow << ',' << r.n_decoupled << ','
           << r.n_fallback << ',' << r.n_swaps << ',' << r.opa_rounds << ','
           << (r.opa_converged ? 1 : 0) << ',' << num(r.sum_ul_power_w) << '\n';
      }
    }
  }
  return os.str();
}

std::string manifest_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json j;
  j["tool"] = "dudemec";
  j["version"] = "0.1.0";
  j["config"] = nlohmann::json::parse(config_to_json(cfg));
  j["master_seed"] = cfg.master_seed;
  std::vector<std::uint64_t> drop_seeds;
  for (int d = 0; d < cfg.n_drops; ++d) drop_seeds.push_back(derive_seed(cfg.master_seed, d));
  j["drop_seeds"] = drop_seeds;
  nlohmann::json sweeps = nlohmann::json::array();
  for (const auto& sweep : result.sweeps) {
    nlohmann::json s;
    s["sbs_override"] = sweep.sbs_override;
    s["sbs_count"] = sweep.drops.empty() ? -1 : sweep.drops[0].sbs_count;
    std::vector<std::uint64_t> seeds;
    for (const auto& d : sweep.drops) seeds.push_back(d.drop_seed);
    s["drop_seeds"] = seeds;
    sweeps.push_back(std::move(s));
  }
  j["sweeps"] = std::move(sweeps);
  j["outputs"] = {"summary.csv", "drops.csv", "manifest.json"};
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void emit_plots(const ExperimentConfig& cfg, const ExperimentResult& result,
                const std::filesystem::path& dir) {
  struct Plot {
    const char* file;
    const char* title;
    const char* y_label;
    double (*get)(const SchemeDropMetrics&);
  };
  const Plot plots[] = {
      {"ul_latency_vs_sbs.svg", "Sum UL transmission latency", "sum UL latency [s]",
       [](const SchemeDropMetrics& r) { return r.metrics.sum_ul_latency_s; }},
      {"total_latency_vs_sbs.svg", "Sum total latency", "sum latency [s]",
       [](const SchemeDropMetrics& r) { return r.metrics.sum_latency_s; }},
      {"exe_latency_vs_sbs.svg", "Sum execution latency", "sum execution latency [s]",
       [](const SchemeDropMetrics& r) { return r.metrics.sum_exe_latency_s; }},
      {"ee_vs_sbs.svg", "Uplink energy efficiency", "energy efficiency [bit/s/W]",
       [](const SchemeDropMetrics& r) { return r.metrics.energy_efficiency_bps_per_w; }},
      {"jain_ul_vs_sbs.svg", "Jain index of UL latency", "Jain index",
       [](const SchemeDropMetrics& r) { return r.metrics.jain_ul; }},
      {"jain_exe_vs_sbs.svg", "Jain index of execution latency", "Jain index",
       [](const SchemeDropMetrics& r) { return r.metrics.jain_exe; }},
  };
  for (const auto& plot : plots) {
    std::vector<Series> series;
    for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
      Series s;
      s.label = to_string(cfg.schemes[si]);
      for (const auto& sweep : result.sweeps) {
        if (sweep.drops.empty()) continue;
        s.x.push_back(sweep.drops[0].sbs_count);
        s.y.push_back(mean_std(column(sweep, si, plot.get)).mean);
      }
      series.push_back(std::move(s));
    }
    write_file_atomic((dir / plot.file).string(),
                      line_chart(plot.title, "number of SBSs", plot.y_label, series));
  }
}

}  // namespace

void emit_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  write_file_atomic((dir / "summary.csv").string(), summary_csv(cfg, result));
  write_file_atomic((dir / "drops.csv").string(), drops_csv(cfg, result));
  write_file_atomic((dir / "manifest.json").string(), manifest_json(cfg, result));
  if (cfg.plots) {
    const std::filesystem::path plot_dir = dir / "plots";
    std::filesystem::create_directories(plot_dir);
    emit_plots(cfg, result, plot_dir);
  }
}

}  // namespace dudemec
