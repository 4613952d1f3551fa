// Summaries and multi-seed Monte Carlo runs.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dvlnav/io.hpp"

namespace dvlnav {

/// Per variant and metric (pos, vel, att): one magnitude row (axis "norm")
/// followed by three per-axis rows. Variants without errors are skipped.
std::vector<SummaryRow> summarize(const std::vector<VariantResult>& results);

/// Element-wise mean of equally shaped summaries.
std::vector<SummaryRow> mean_summary(const std::vector<std::vector<SummaryRow>>& per_seed);

/// Looks up one row; throws std::out_of_range if absent.
const SummaryRow& find_row(const std::vector<SummaryRow>& rows, std::string_view variant,
                           std::string_view metric, std::string_view axis = "norm");

struct MonteCarloRun {
  std::uint64_t seed = 0;
  ScenarioResult result;
};

/// Runs `base` once per seed on the shared truth. Work is spread over
/// `threads` workers (0 = hardware concurrency); results come back in seed
/// order. Estimates are dropped to bound memory.
std::vector<MonteCarloRun> run_monte_carlo(const ScenarioConfig& base,
                                           const std::vector<TruthSample>& truth,
                                           std::span<const std::uint64_t> seeds,
                                           unsigned threads = 0);

/// Box statistics of per-epoch position-error magnitudes pooled over runs,
/// one row per variant.
std::vector<BoxRow> position_box_stats(const std::vector<MonteCarloRun>& runs);

}  // namespace dvlnav
