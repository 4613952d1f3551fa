// dvlnav: simulate, replay, compare, mc, validate-config.
//
// Exit codes: 0 success, 2 invalid configuration/log/usage, 3 filter failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dvlnav/config.hpp"
#include "dvlnav/experiment.hpp"
#include "dvlnav/io.hpp"

namespace fs = std::filesystem;
using namespace dvlnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitFilter = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string variants;
  std::string lever;
};

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Overrides beat config values. --duration sets the navigation window after
// the alignment; the profile is cut at the new end or extended with a
// straight segment.
void apply_overrides(ScenarioConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.duration) {
    if (!(*o.duration > 0.0)) throw InvalidInput("--duration must be positive");
    cfg.duration = cfg.align_duration + *o.duration;
    cfg.profile = extend_profile(cfg.profile, *o.duration);
  }
  if (!o.variants.empty()) {
    cfg.variants.clear();
    for (const std::string& name : split(o.variants, ',')) {
      const auto v = parse_variant(name);
      if (!v) throw InvalidInput("--variants: unknown variant '" + name + "'");
      for (VariantId seen : cfg.variants) {
        if (seen == *v) throw InvalidInput("--variants: duplicate variant '" + name + "'");
      }
      cfg.variants.push_back(*v);
    }
    if (cfg.variants.empty()) throw InvalidInput("--variants: empty list");
  }
  if (!o.lever.empty()) {
    const std::vector<std::string> parts = split(o.lever, ',');
    if (parts.size() != 3) throw InvalidInput("--lever expects x,y,z in metres");
    for (int i = 0; i < 3; ++i) {
      const auto d = parse_double(parts[static_cast<std::size_t>(i)]);
      if (!d) throw InvalidInput("--lever: '" + parts[static_cast<std::size_t>(i)] + "' is not a number");
      cfg.lever[i] = *d;
    }
  }
}

std::string fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// Table II layout: one row per method, magnitude RMSE/max per quantity.
void print_table(std::ostream& os, const std::vector<SummaryRow>& rows) {
  std::vector<std::string> variants;
  for (const SummaryRow& r : rows) {
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) {
      variants.push_back(r.variant);
    }
  }
  os << "Method      Pos RMSE[m]  Pos Max[m]  Vel RMSE[m/s]  Vel Max[m/s]  Att RMSE[deg]  "
        "Att Max[deg]\n";
  for (const std::string& v : variants) {
    char line[256];
    auto get = [&](const char* m) -> const SummaryRow& { return find_row(rows, v, m); };
    std::snprintf(line, sizeof line, "%-10s  %11s  %10s  %13s  %12s  %13s  %12s\n", v.c_str(),
                  fixed(get("pos").rmse, 2).c_str(), fixed(get("pos").max, 2).c_str(),
                  fixed(get("vel").rmse, 4).c_str(), fixed(get("vel").max, 4).c_str(),
                  fixed(get("att").rmse, 3).c_str(), fixed(get("att").max, 3).c_str());
    os << line;
  }
}

void print_improvement(std::ostream& os, const std::vector<SummaryRow>& rows) {
  const bool has_base = std::any_of(rows.begin(), rows.end(),
                                    [](const SummaryRow& r) { return r.variant == "BASELINE"; });
  if (!has_base) return;
  os << "Improvement over BASELINE (RMSE):\n";
  for (const SummaryRow& r : rows) {
    if (r.axis != "norm" || r.variant == "BASELINE") continue;
    const double base = find_row(rows, "BASELINE", r.metric).rmse;
    if (base <= 0.0) continue;
    os << "  " << r.variant << " " << r.metric << ": " << fixed(100.0 * (1.0 - r.rmse / base), 1)
       << "%\n";
  }
}

ScenarioConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = load_scenario(path);
  apply_overrides(cfg, o);
  return cfg;
}

int cmd_simulate(const std::string& config, const std::string& out, const Overrides& o,
                 bool quiet) {
  const ScenarioConfig cfg = load_with_overrides(config, o);
  const std::vector<TruthSample> truth = generate_truth(cfg);
  const SensorStreams sensors = synthesize_sensors(cfg, truth);
  const ScenarioResult result = run_scenario(cfg, truth, sensors);

  write_log(out, sensors, &truth);
  write_errors(fs::path(out) / "errors.csv", result.variants);
  write_estimates(fs::path(out) / "estimates.csv", result.variants);
  const std::vector<SummaryRow> summary = summarize(result.variants);
  write_summary(fs::path(out) / "summary.csv", summary);
  if (!quiet) print_table(std::cout, summary);
  return kExitOk;
}

int cmd_replay(const std::string& logs, const std::string& config, const std::string& out,
               const Overrides& o, bool quiet) {
  ScenarioConfig cfg = load_with_overrides(config, o);
  const SensorLog log = read_log(logs);
  if (log.sensors.imu.empty()) throw InvalidInput(logs + "/imu.csv: no samples");
  cfg.duration = log.sensors.imu.back().time;

  ScenarioResult result;
  if (log.truth) {
    result = run_scenario(cfg, *log.truth, log.sensors);
  } else {
    if (!cfg.initial_state) {
      throw InvalidInput("no truth.csv in " + logs + " and no [initial_state] in the config");
    }
    for (VariantId v : cfg.variants) {
      result.variants.push_back(run_variant(v, cfg, log.sensors, nullptr));
    }
  }

  fs::create_directories(out);
  write_estimates(fs::path(out) / "estimates.csv", result.variants);
  std::vector<SummaryRow> summary;
  if (log.truth) {
    write_errors(fs::path(out) / "errors.csv", result.variants);
    summary = summarize(result.variants);
  } else {
    std::cerr << "warning: no truth.csv; metrics skipped, estimates written\n";
  }
  write_summary(fs::path(out) / "summary.csv", summary);
  if (!quiet && !summary.empty()) print_table(std::cout, summary);
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& inputs, bool quiet) {
  (void)quiet;
  for (const std::string& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) p /= "summary.csv";
    const std::vector<SummaryRow> rows = read_summary(p);
    std::cout << p.string() << "\n";
    if (rows.empty()) {
      std::cout << "  (no metrics)\n";
      continue;
    }
    print_table(std::cout, rows);
    print_improvement(std::cout, rows);
  }
  return kExitOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split(spec, ',')) {
    const std::size_t dash = part.find('-', 1);
    try {
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const std::uint64_t a = std::stoull(part.substr(0, dash));
        const std::uint64_t b = std::stoull(part.substr(dash + 1));
        if (b < a) throw InvalidInput("--seeds: descending range '" + part + "'");
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw InvalidInput("--seeds: cannot parse '" + part + "'");
    }
  }
  return seeds;
}

int cmd_mc(const std::string& config, const std::string& out, const std::string& seed_spec,
           unsigned threads, const Overrides& o, bool quiet) {
  const ScenarioConfig cfg = load_with_overrides(config, o);
  const std::vector<std::uint64_t> seeds = parse_seeds(seed_spec);
  if (seeds.size() < 2) throw InvalidInput("mc needs at least 2 seeds");

  const std::vector<TruthSample> truth = generate_truth(cfg);
  const std::vector<MonteCarloRun> runs = run_monte_carlo(cfg, truth, seeds, threads);

  // Single collector: all files are written here, in seed order.
  fs::create_directories(out);
  std::vector<std::vector<SummaryRow>> per_seed;
  for (const MonteCarloRun& run : runs) {
    per_seed.push_back(summarize(run.result.variants));
    const fs::path dir = fs::path(out) / ("seed_" + std::to_string(run.seed));
    fs::create_directories(dir);
    write_summary(dir / "summary.csv", per_seed.back());
  }
  const std::vector<SummaryRow> mean = mean_summary(per_seed);
  write_summary(fs::path(out) / "summary.csv", mean);
  write_boxstats(fs::path(out) / "boxstats.csv", position_box_stats(runs));
  if (!quiet) {
    std::cout << "Mean over " << seeds.size() << " seeds\n";
    print_table(std::cout, mean);
  }
  return kExitOk;
}

int cmd_validate(const std::vector<std::string>& configs, bool quiet) {
  int status = kExitOk;
  for (const std::string& c : configs) {
    try {
      (void)load_scenario(c);
      if (!quiet) std::cout << c << ": ok\n";
    } catch (const ConfigError& e) {
      std::cerr << c << ": " << e.what() << "\n";
      status = kExitInvalid;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DVL-aided strapdown navigation: simulation, replay and evaluation"};
  app.require_subcommand(1);

  Overrides o;
  bool quiet = false;
  std::string config, out;
  auto add_common = [&](CLI::App* sub, bool need_out) {
    sub->add_option("--config", config, "scenario configuration file")->required();
    auto* opt_out = sub->add_option("--out", out, "output directory");
    if (need_out) opt_out->required();
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--duration", o.duration, "navigation window after alignment [s]");
    sub->add_option("--variants", o.variants, "comma list of BASELINE,AE,CP,AE_CP");
    sub->add_option("--lever", o.lever, "lever arm x,y,z [m], body frame");
    sub->add_flag("--quiet", quiet, "suppress the summary table");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize sensors and run all variants");
  add_common(simulate, true);

  CLI::App* replay = app.add_subcommand("replay", "run the filters on recorded logs");
  std::string logs;
  replay->add_option("log_dir", logs, "directory with imu.csv, dvl.csv [, truth.csv]")
      ->required();
  add_common(replay, true);

  CLI::App* compare = app.add_subcommand("compare", "print summaries side by side");
  std::vector<std::string> summaries;
  compare->add_option("summary", summaries, "summary.csv files or result directories")
      ->required();
  compare->add_flag("--quiet", quiet);

  CLI::App* mc = app.add_subcommand("mc", "multi-seed Monte Carlo");
  std::string seeds = "1-20";
  unsigned threads = 0;
  add_common(mc, true);
  mc->add_option("--seeds", seeds, "seed list, e.g. 1-20 or 1,5,9")->capture_default_str();
  mc->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI::App* validate = app.add_subcommand("validate-config", "check configuration files");
  std::vector<std::string> configs;
  validate->add_option("configs", configs, "configuration files")->required();
  validate->add_flag("--quiet", quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(config, out, o, quiet);
    if (*replay) return cmd_replay(logs, config, out, o, quiet);
    if (*compare) return cmd_compare(summaries, quiet);
    if (*mc) return cmd_mc(config, out, seeds, threads, o, quiet);
    if (*validate) return cmd_validate(configs, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SchemaViolation& e) {
    std::cerr << "schema violation: " << e.file() << ":" << e.line() << ": " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NonMonotonicTime& e) {
    std::cerr << "schema violation: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const FilterFailure& e) {
    std::cerr << "filter failure at t=" << e.epoch() << " s: " << e.what() << "\n";
    return kExitFilter;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
