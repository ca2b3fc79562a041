#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbench/engine.hpp"
#include "fbench/oracle.hpp"
#include "fbench/webgraph.hpp"

namespace fbench {

// All metrics re-derive relevance through the oracle and snapshot rather than
// trusting the `relevant` flag stored in the trace, so a stored trace can be
// re-scored under a different oracle.

struct HarvestPoint {
  std::uint64_t step = 0;
  std::uint64_t relevant = 0;

  bool operator==(const HarvestPoint&) const = default;
};

// Cumulative relevant, non-duplicate visits after each step.
std::vector<HarvestPoint> harvest_curve(const CrawlTrace& trace, const RelevanceOracle& oracle,
                                        const GraphSnapshot& snapshot);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;  // relevant / retrieved, same as precision
  std::uint64_t relevant_retrieved = 0;
  std::uint64_t unique_retrieved = 0;
  bool empty_trace = false;
};

Prf prf(const CrawlTrace& trace, const RelevanceOracle& oracle, const GraphSnapshot& snapshot);

struct TimeMetrics {
  std::optional<std::int64_t> time_to_n_ms;
  std::uint64_t pages_in_budget = 0;
};

TimeMetrics time_metrics(const CrawlTrace& trace, std::uint64_t n, std::int64_t budget_ms);

// Bytes charged per queued frontier entry: score (8) + inherited score (8) +
// sequence number (8) + URL handle (8) + depth (4).
inline constexpr std::uint64_t kFrontierEntryBytes = 36;

struct MemoryMetrics {
  std::uint64_t peak_frontier = 0;
  std::uint64_t peak_visited = 0;
  // peak_frontier * kFrontierEntryBytes + floor(peak_visited * mean visited URL length)
  std::uint64_t est_bytes = 0;
};

MemoryMetrics memory_metrics(const CrawlTrace& trace);

inline constexpr std::uint64_t kHarvestWindow = 1000;
inline constexpr std::int64_t kOneHourMs = 3'600'000;

struct MetricRow {
  StrategyKind strategy = StrategyKind::Bfs;
  std::uint64_t pages_visited = 0;
  std::uint64_t relevant_retrieved = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double harvest_at_1000 = 0.0;
  std::optional<std::int64_t> time_to_1000_ms;
  std::uint64_t pages_in_3600s = 0;
  std::uint64_t peak_frontier = 0;
  std::uint64_t peak_visited = 0;
  std::uint64_t est_bytes = 0;

  bool operator==(const MetricRow&) const = default;
};

MetricRow metric_row(const CrawlTrace& trace, const RelevanceOracle& oracle, const GraphSnapshot& snapshot);

struct BenchReport {
  std::string snapshot_id;
  std::vector<MetricRow> rows;
  std::vector<StrategyKind> ranking;

  bool operator==(const BenchReport&) const = default;
};

// Rows follow the order of `traces`; the ranking sorts by f1, then
// harvest_at_1000 (both descending), then strategy name.
BenchReport compare(const std::vector<CrawlTrace>& traces, const RelevanceOracle& oracle,
                    const GraphSnapshot& snapshot);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(std::string_view name);
std::string render_report(const BenchReport& report, ReportFormat format);
std::string ranking_line(const BenchReport& report);

// "step,relevant" series for external plotting.
std::string render_harvest_csv(const std::vector<HarvestPoint>& curve);

}  // namespace fbench
