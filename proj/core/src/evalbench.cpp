#include "fbench/evalbench.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "fbench/error.hpp"

namespace fbench {

namespace {

bool visit_is_relevant(const VisitRecord& v, const RelevanceOracle& oracle, const GraphSnapshot& snapshot) {
  const PageRecord* page = snapshot.find(v.url);
  if (page == nullptr) throw ValidationError("trace visits " + v.url + ", which is not in the snapshot");
  return oracle_label(oracle, v.url, *page);
}

}  // namespace

std::vector<HarvestPoint> harvest_curve(const CrawlTrace& trace, const RelevanceOracle& oracle,
                                        const GraphSnapshot& snapshot) {
  std::vector<HarvestPoint> curve;
  curve.reserve(trace.visits.size());
  std::uint64_t count = 0;
  for (const auto& v : trace.visits) {
    if (!v.duplicate_content && visit_is_relevant(v, oracle, snapshot)) ++count;
    curve.push_back({v.step, count});
  }
  return curve;
}

Prf prf(const CrawlTrace& trace, const RelevanceOracle& oracle, const GraphSnapshot& snapshot) {
  Prf out;
  if (trace.visits.empty()) {
    out.empty_trace = true;
    return out;
  }
  for (const auto& v : trace.visits) {
    if (v.duplicate_content) continue;
    ++out.unique_retrieved;
    if (visit_is_relevant(v, oracle, snapshot)) ++out.relevant_retrieved;
  }
  std::size_t total_relevant = count_relevant(oracle, snapshot);
  if (out.unique_retrieved > 0) {
    out.precision = static_cast<double>(out.relevant_retrieved) / static_cast<double>(out.unique_retrieved);
  }
  if (total_relevant > 0) {
    out.recall = std::min(1.0, static_cast<double>(out.relevant_retrieved) / static_cast<double>(total_relevant));
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  out.accuracy = out.precision;
  return out;
}

TimeMetrics time_metrics(const CrawlTrace& trace, std::uint64_t n, std::int64_t budget_ms) {
  if (n < 1) throw ConfigError("time_metrics: n must be >= 1");
  TimeMetrics out;
  if (trace.visits.size() >= n) out.time_to_n_ms = trace.visits[n - 1].virtual_time_ms;
  for (const auto& v : trace.visits) {
    if (v.virtual_time_ms <= budget_ms) ++out.pages_in_budget;
  }
  return out;
}

MemoryMetrics memory_metrics(const CrawlTrace& trace) {
  MemoryMetrics out;
  std::uint64_t url_bytes = 0;
  for (const auto& v : trace.visits) {
    out.peak_frontier = std::max(out.peak_frontier, v.frontier_size);
    out.peak_visited = std::max(out.peak_visited, v.visited_size);
    url_bytes += v.url.size();
  }
  out.est_bytes = out.peak_frontier * kFrontierEntryBytes;
  if (!trace.visits.empty()) out.est_bytes += out.peak_visited * url_bytes / trace.visits.size();
  return out;
}

MetricRow metric_row(const CrawlTrace& trace, const RelevanceOracle& oracle, const GraphSnapshot& snapshot) {
  MetricRow row;
  row.strategy = trace.config.strategy;
  row.pages_visited = trace.visits.size();
  auto p = prf(trace, oracle, snapshot);
  row.relevant_retrieved = p.relevant_retrieved;
  row.precision = p.precision;
  row.recall = p.recall;
  row.f1 = p.f1;
  auto curve = harvest_curve(trace, oracle, snapshot);
  std::uint64_t window = std::min<std::uint64_t>(kHarvestWindow, curve.size());
  if (window > 0) row.harvest_at_1000 = static_cast<double>(curve[window - 1].relevant) / static_cast<double>(window);
  auto t = time_metrics(trace, kHarvestWindow, kOneHourMs);
  row.time_to_1000_ms = t.time_to_n_ms;
  row.pages_in_3600s = t.pages_in_budget;
  auto m = memory_metrics(trace);
  row.peak_frontier = m.peak_frontier;
  row.peak_visited = m.peak_visited;
  row.est_bytes = m.est_bytes;
  return row;
}

BenchReport compare(const std::vector<CrawlTrace>& traces, const RelevanceOracle& oracle,
                    const GraphSnapshot& snapshot) {
  BenchReport report;
  report.snapshot_id = snapshot_id(snapshot);
  for (const auto& t : traces) {
    if (t.snapshot_id != report.snapshot_id) {
      throw ValidationError("trace for strategy " + std::string(to_string(t.config.strategy)) +
                            " was recorded on snapshot " + t.snapshot_id + ", expected " + report.snapshot_id);
    }
    report.rows.push_back(metric_row(t, oracle, snapshot));
  }
  std::vector<const MetricRow*> order;
  for (const auto& r : report.rows) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const MetricRow* a, const MetricRow* b) {
    if (a->f1 != b->f1) return a->f1 > b->f1;
    if (a->harvest_at_1000 != b->harvest_at_1000) return a->harvest_at_1000 > b->harvest_at_1000;
    return to_string(a->strategy) < to_string(b->strategy);
  });
  for (const auto* r : order) report.ranking.push_back(r->strategy);
  return report;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("report format must be csv or json");
}

namespace {

std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

std::string render_report(const BenchReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out =
        "strategy,pages_visited,relevant_retrieved,precision,recall,f1,harvest_at_1000,time_to_1000_ms,"
        "pages_in_3600s,peak_frontier,peak_visited,est_bytes\n";
    for (const auto& r : report.rows) {
      out += std::string(to_string(r.strategy)) + ',' + std::to_string(r.pages_visited) + ',' +
             std::to_string(r.relevant_retrieved) + ',' + fixed6(r.precision) + ',' + fixed6(r.recall) + ',' +
             fixed6(r.f1) + ',' + fixed6(r.harvest_at_1000) + ',' +
             (r.time_to_1000_ms ? std::to_string(*r.time_to_1000_ms) : std::string()) + ',' +
             std::to_string(r.pages_in_3600s) + ',' + std::to_string(r.peak_frontier) + ',' +
             std::to_string(r.peak_visited) + ',' + std::to_string(r.est_bytes) + '\n';
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["snapshot_id"] = report.snapshot_id;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json o;
    o["strategy"] = std::string(to_string(r.strategy));
    o["pages_visited"] = r.pages_visited;
    o["relevant_retrieved"] = r.relevant_retrieved;
    o["precision"] = r.precision;
    o["recall"] = r.recall;
    o["f1"] = r.f1;
    o["harvest_at_1000"] = r.harvest_at_1000;
    if (r.time_to_1000_ms) {
      o["time_to_1000_ms"] = *r.time_to_1000_ms;
    } else {
      o["time_to_1000_ms"] = nullptr;
    }
    o["pages_in_3600s"] = r.pages_in_3600s;
    o["peak_frontier"] = r.peak_frontier;
    o["peak_visited"] = r.peak_visited;
    o["est_bytes"] = r.est_bytes;
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  auto ranking = nlohmann::ordered_json::array();
  for (auto k : report.ranking) ranking.push_back(std::string(to_string(k)));
  j["ranking"] = std::move(ranking);
  return j.dump(2) + "\n";
}

std::string ranking_line(const BenchReport& report) {
  std::string out = "ranking:";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    out += (i == 0 ? " " : " > ");
    out += to_string(report.ranking[i]);
  }
  return out;
}

std::string render_harvest_csv(const std::vector<HarvestPoint>& curve) {
  std::string out = "step,relevant\n";
  for (const auto& p : curve) out += std::to_string(p.step) + ',' + std::to_string(p.relevant) + '\n';
  return out;
}

}  // namespace fbench
