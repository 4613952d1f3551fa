#include "dvlnav/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace dvlnav {

namespace {

constexpr std::array<std::string_view, 3> kMetrics{"pos", "vel", "att"};
constexpr std::array<std::string_view, 3> kNedAxes{"N", "E", "D"};
constexpr std::array<std::string_view, 3> kEulerAxes{"roll", "pitch", "yaw"};

const std::vector<Vec3>& series_for(const ErrorSeries& e, std::size_t metric) {
  return metric == 0 ? e.pos : metric == 1 ? e.vel : e.att;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<VariantResult>& results) {
  std::vector<SummaryRow> rows;
  for (const VariantResult& r : results) {
    if (r.errors.size() == 0) continue;
    const std::string name(variant_name(r.variant));
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      const std::vector<Vec3>& s = series_for(r.errors, m);
      const ErrorStats mag = rmse(s, NormMode::kMagnitude);
      rows.push_back({name, std::string(kMetrics[m]), "norm", mag.magnitude_rmse(),
                      mag.magnitude_max()});
      const ErrorStats comp = rmse(s, NormMode::kComponent);
      const auto& axes = m == 2 ? kEulerAxes : kNedAxes;
      for (int a = 0; a < 3; ++a) {
        rows.push_back({name, std::string(kMetrics[m]), std::string(axes[a]), comp.rmse[a],
                        comp.max[a]});
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> mean_summary(const std::vector<std::vector<SummaryRow>>& per_seed) {
  if (per_seed.empty()) return {};
  std::vector<SummaryRow> out = per_seed.front();
  for (SummaryRow& r : out) r.rmse = r.max = 0.0;
  for (const auto& rows : per_seed) {
    if (rows.size() != out.size()) throw std::invalid_argument("mean_summary: shape mismatch");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i].rmse += rows[i].rmse;
      out[i].max += rows[i].max;
    }
  }
  const double n = static_cast<double>(per_seed.size());
  for (SummaryRow& r : out) {
    r.rmse /= n;
    r.max /= n;
  }
  return out;
}

const SummaryRow& find_row(const std::vector<SummaryRow>& rows, std::string_view variant,
                           std::string_view metric, std::string_view axis) {
  for (const SummaryRow& r : rows) {
    if (r.variant == variant && r.metric == metric && r.axis == axis) return r;
  }
  throw std::out_of_range("summary row not found: " + std::string(variant) + "/" +
                          std::string(metric) + "/" + std::string(axis));
}

std::vector<MonteCarloRun> run_monte_carlo(const ScenarioConfig& base,
                                           const std::vector<TruthSample>& truth,
                                           std::span<const std::uint64_t> seeds,
                                           unsigned threads) {
  std::vector<MonteCarloRun> runs(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        ScenarioConfig cfg = base;
        cfg.seed = seeds[i];
        const SensorStreams sensors = synthesize_sensors(cfg, truth);
        runs[i].seed = seeds[i];
        runs[i].result = run_scenario(cfg, truth, sensors);
        for (VariantResult& v : runs[i].result.variants) v.estimates.clear();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = seeds.size();
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return runs;
}

std::vector<BoxRow> position_box_stats(const std::vector<MonteCarloRun>& runs) {
  std::vector<BoxRow> rows;
  if (runs.empty()) return rows;
  const std::size_t nvar = runs.front().result.variants.size();
  for (std::size_t v = 0; v < nvar; ++v) {
    std::vector<double> pooled;
    for (const MonteCarloRun& run : runs) {
      const std::vector<double> m = magnitudes(run.result.variants.at(v).errors.pos);
      pooled.insert(pooled.end(), m.begin(), m.end());
    }
    rows.push_back({std::string(variant_name(runs.front().result.variants[v].variant)), "pos",
                    box_stats(pooled)});
  }
  return rows;
}

}  // namespace dvlnav
