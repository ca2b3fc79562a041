#include <benchmark/benchmark.h>

#include <map>
#include <optional>

#include "fbench/engine.hpp"
#include "fbench/evalbench.hpp"
#include "fbench/extract.hpp"
#include "fbench/webgraph.hpp"

namespace {

using namespace fbench;

const GraphSnapshot& snapshot(std::size_t pages) {
  static std::map<std::size_t, GraphSnapshot> cache;
  auto it = cache.find(pages);
  if (it == cache.end()) it = cache.emplace(pages, synth_graph(SynthParams::with_default_density(42, pages, 0.2))).first;
  return it->second;
}

void BM_Crawl(benchmark::State& state) {
  const auto kind = static_cast<StrategyKind>(state.range(0));
  const auto& snap = snapshot(static_cast<std::size_t>(state.range(1)));
  const auto oracle = RelevanceOracle::labels();
  const auto digest = snapshot_id(snap);
  CrawlConfig config;
  config.strategy = kind;
  std::optional<NBModel> model;
  if (kind == StrategyKind::Nb) model = train_bootstrap_model(snap, config, oracle);
  std::size_t visits = 0;
  for (auto _ : state) {
    auto trace = crawl(snap, config, oracle, model ? &*model : nullptr, digest);
    visits = trace.visits.size();
    benchmark::DoNotOptimize(trace);
  }
  state.SetLabel(std::string(to_string(kind)));
  state.counters["visits"] = static_cast<double>(visits);
  state.counters["pages_per_s"] =
      benchmark::Counter(static_cast<double>(visits), benchmark::Counter::kIsIterationInvariantRate);
}

void crawl_args(benchmark::internal::Benchmark* b) {
  for (auto kind : kAllStrategies) {
    for (std::int64_t pages : {1000, 10000}) b->Args({static_cast<std::int64_t>(kind), pages});
  }
}

BENCHMARK(BM_Crawl)->Apply(crawl_args)->Unit(benchmark::kMillisecond);

void BM_ParseLinks(benchmark::State& state) {
  const auto& snap = snapshot(1000);
  std::size_t bytes = 0;
  for (const auto& [url, page] : snap.pages) bytes += page.html.size();
  for (auto _ : state) {
    std::size_t links = 0;
    for (const auto& [url, page] : snap.pages) links += parse_links(page.html, url, 0).size();
    benchmark::DoNotOptimize(links);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(bytes));
}

BENCHMARK(BM_ParseLinks)->Unit(benchmark::kMillisecond);

void BM_Report(benchmark::State& state) {
  const auto& snap = snapshot(10000);
  const auto oracle = RelevanceOracle::labels();
  const auto digest = snapshot_id(snap);
  std::vector<CrawlTrace> traces;
  for (auto kind : {StrategyKind::Bfs, StrategyKind::Dfs, StrategyKind::Shark, StrategyKind::Priority}) {
    CrawlConfig config;
    config.strategy = kind;
    traces.push_back(crawl(snap, config, oracle, nullptr, digest));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compare(traces, oracle, snap));
}

BENCHMARK(BM_Report)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
