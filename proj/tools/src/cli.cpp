#include "cli.hpp"

#include <CLI11.hpp>

#include <future>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fbench/engine.hpp"
#include "fbench/error.hpp"
#include "fbench/evalbench.hpp"
#include "fbench/io.hpp"
#include "fbench/livefetch.hpp"
#include "fbench/webgraph.hpp"

namespace fbench::cli {

namespace {

// Raised while turning flags into configuration; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CrawlFlags {
  std::string snapshot;
  std::string query;
  std::size_t max_pages = kDefaultMaxPages;
  std::int64_t time_budget_ms = kDefaultTimeBudgetMs;
  std::uint32_t max_depth = kDefaultMaxDepth;
  double delta = SharkParams{}.delta;
  double gamma = SharkParams{}.gamma;
  double beta = SharkParams{}.beta;
  double parent_weight = PriorityWeights{}.parent;
  double anchor_weight = PriorityWeights{}.anchor;
  double nb_threshold = kDefaultNbThreshold;
  std::size_t context_window = kDefaultContextWindow;
  std::int64_t miss_penalty_ms = 0;
  std::string model;
  std::string oracle = "auto";
};

void add_crawl_flags(CLI::App* cmd, CrawlFlags& f) {
  cmd->add_option("--snapshot", f.snapshot, "Snapshot file")->required();
  cmd->add_option("--query", f.query, "Topic query (default: the snapshot's)");
  cmd->add_option("--max-pages", f.max_pages, "Page budget")->capture_default_str();
  cmd->add_option("--time-budget-ms", f.time_budget_ms, "Virtual time budget")->capture_default_str();
  cmd->add_option("--max-depth", f.max_depth, "Link depth limit")->capture_default_str();
  cmd->add_option("--delta", f.delta, "Shark decay factor")->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "Shark inherited/neighbourhood mix")->capture_default_str();
  cmd->add_option("--beta", f.beta, "Shark anchor/context mix")->capture_default_str();
  cmd->add_option("--parent-weight", f.parent_weight, "Priority weight of parent similarity")->capture_default_str();
  cmd->add_option("--anchor-weight", f.anchor_weight, "Priority weight of anchor similarity")->capture_default_str();
  cmd->add_option("--nb-threshold", f.nb_threshold, "Naive-Bayes admit threshold")->capture_default_str();
  cmd->add_option("--context-window", f.context_window, "Tokens of anchor context per side")->capture_default_str();
  cmd->add_option("--miss-penalty-ms", f.miss_penalty_ms, "Virtual cost of a dead link")->capture_default_str();
  cmd->add_option("--model", f.model, "Trained naive-Bayes model (default: train on seeds)");
  cmd->add_option("--oracle", f.oracle, "labels | url_rule:<substring> | auto")->capture_default_str();
}

CrawlConfig make_config(const CrawlFlags& f, StrategyKind strategy) {
  CrawlConfig c;
  c.strategy = strategy;
  c.max_pages = f.max_pages;
  c.time_budget_ms = f.time_budget_ms;
  c.max_depth = f.max_depth;
  c.shark = {f.delta, f.gamma, f.beta};
  c.priority = {f.parent_weight, f.anchor_weight};
  c.nb_threshold = f.nb_threshold;
  c.context_window = f.context_window;
  c.query = tokenize_plain(f.query);
  c.miss_penalty_ms = f.miss_penalty_ms;
  c.validate();
  c.shark.validate();
  return c;
}

std::optional<RelevanceOracle> parse_oracle_flag(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return RelevanceOracle::parse(text);
}

RelevanceOracle resolve_oracle(const std::optional<RelevanceOracle>& flag, const GraphSnapshot& snapshot) {
  return flag ? *flag : default_oracle_for(snapshot);
}

std::optional<NBModel> model_for(const CrawlFlags& f, const GraphSnapshot& snapshot, const CrawlConfig& config,
                                 const RelevanceOracle& oracle) {
  if (!f.model.empty()) return load_nb_model(f.model);
  try {
    return train_bootstrap_model(snapshot, config, oracle);
  } catch (const Error& e) {
    throw Error(std::string("cannot train the naive-Bayes model from the seed pages: ") + e.what());
  }
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthFlags {
  std::size_t pages = 1000;
  double relevant_fraction = 0.2;
  std::uint64_t rng_seed = 42;
  std::int64_t latency_ms = kDefaultLatencyMs;
  std::optional<double> intra_prob;
  std::optional<double> cross_prob;
  std::string out;
};

int do_synth(const SynthFlags& f, std::ostream& out) {
  SynthParams p = SynthParams::with_default_density(f.rng_seed, f.pages, f.relevant_fraction, f.latency_ms);
  if (f.intra_prob) p.intra_cluster_link_prob = *f.intra_prob;
  if (f.cross_prob) p.cross_link_prob = *f.cross_prob;
  GraphSnapshot snap;
  try {
    snap = synth_graph(p);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  save_snapshot(snap, f.out);
  out << "pages: " << snap.pages.size() << "\n"
      << "relevant: " << count_relevant(RelevanceOracle::labels(), snap) << "\n"
      << "snapshot_id: " << snapshot_id(snap) << "\n";
  return kExitOk;
}

struct IngestFlags {
  std::vector<std::string> seeds;
  std::size_t max_pages = 1000;
  std::string out;
  std::string query;
  std::int64_t delay_ms = FetchPolicy{}.per_host_delay_ms;
  std::int64_t timeout_ms = FetchPolicy{}.timeout_ms;
  std::uint32_t retries = FetchPolicy{}.max_retries;
  std::string user_agent;
  bool ignore_robots = false;
};

int do_ingest(const IngestFlags& f, std::ostream& out) {
  FetchPolicy policy = FetchPolicy{}.with_env_overrides();
  if (!f.user_agent.empty()) policy.user_agent = f.user_agent;
  policy.per_host_delay_ms = f.delay_ms;
  policy.timeout_ms = f.timeout_ms;
  policy.max_retries = f.retries;
  policy.obey_robots = !f.ignore_robots;
  IngestConfig config;
  config.max_pages = f.max_pages;
  config.topic_query = tokenize_plain(f.query);
  for (const auto& s : f.seeds) {
    if (!normalize_url(s)) throw UsageError("seed is not an absolute http(s) URL: " + s);
    config.seeds.push_back(s);
  }
  if (config.max_pages < 1) throw UsageError("--max-pages must be >= 1");
  std::optional<Fetcher> fetcher;
  try {
    fetcher.emplace(policy);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  auto snap = run_live_crawl(*fetcher, config, f.out);
  out << "pages: " << snap.pages.size() << "\n"
      << "snapshot_id: " << snapshot_id(snap) << "\n";
  return kExitOk;
}

struct CrawlCmdFlags {
  CrawlFlags crawl;
  std::string strategy;
  std::string out;
  std::string save_model;
};

int do_crawl(const CrawlCmdFlags& f, std::ostream& out) {
  CrawlConfig config;
  std::optional<RelevanceOracle> oracle_flag;
  try {
    config = make_config(f.crawl, parse_strategy(f.strategy));
    oracle_flag = parse_oracle_flag(f.crawl.oracle);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  auto snapshot = load_snapshot(f.crawl.snapshot);
  auto oracle = resolve_oracle(oracle_flag, snapshot);
  std::optional<NBModel> model;
  if (config.strategy == StrategyKind::Nb) {
    model = model_for(f.crawl, snapshot, config, oracle);
    if (!f.save_model.empty()) save_nb_model(*model, f.save_model);
  }
  auto trace = crawl(snapshot, config, oracle, model ? &*model : nullptr);
  save_trace(trace, f.out);
  std::uint64_t relevant = 0;
  for (const auto& v : trace.visits) relevant += (v.relevant && !v.duplicate_content) ? 1 : 0;
  out << "visited: " << trace.visits.size() << "\n"
      << "relevant: " << relevant << "\n"
      << "stop_reason: " << to_string(trace.stop_reason) << "\n";
  return kExitOk;
}

struct BenchFlags {
  CrawlFlags crawl;
  std::vector<std::string> strategies = {"bfs", "dfs", "shark", "priority", "nb"};
  std::string report;
  std::string format = "csv";
  std::string traces_dir;
};

int do_bench(const BenchFlags& f, std::ostream& out) {
  std::vector<CrawlConfig> configs;
  std::optional<RelevanceOracle> oracle_flag;
  ReportFormat format;
  try {
    std::set<StrategyKind> seen;
    for (const auto& name : f.strategies) {
      auto kind = parse_strategy(name);
      if (!seen.insert(kind).second) throw ConfigError("strategy listed twice: " + name);
      configs.push_back(make_config(f.crawl, kind));
    }
    if (configs.empty()) throw ConfigError("--strategies must name at least one strategy");
    oracle_flag = parse_oracle_flag(f.crawl.oracle);
    format = parse_report_format(f.format);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  auto snapshot = load_snapshot(f.crawl.snapshot);
  auto oracle = resolve_oracle(oracle_flag, snapshot);
  const std::string digest = snapshot_id(snapshot);
  std::optional<NBModel> model;
  for (const auto& c : configs) {
    if (c.strategy == StrategyKind::Nb) model = model_for(f.crawl, snapshot, c, oracle);
  }

  // Crawls share only read-only inputs, so they run concurrently.
  std::vector<std::future<CrawlTrace>> jobs;
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&, c] {
      return crawl(snapshot, c, oracle, model ? &*model : nullptr, digest);
    }));
  }
  std::vector<CrawlTrace> traces;
  for (auto& j : jobs) traces.push_back(j.get());

  auto report = compare(traces, oracle, snapshot);
  if (!f.traces_dir.empty()) {
    std::filesystem::create_directories(f.traces_dir);
    for (const auto& t : traces) {
      save_trace(t, std::filesystem::path(f.traces_dir) / (std::string(to_string(t.config.strategy)) + ".trace"));
    }
  }
  auto rendered = render_report(report, format);
  if (f.report.empty()) {
    out << rendered;
  } else {
    write_file_atomic(f.report, rendered);
  }
  for (const auto& r : report.rows) {
    out << to_string(r.strategy) << ": visited " << r.pages_visited << ", relevant " << r.relevant_retrieved
        << ", f1 " << fixed(r.f1, 4) << "\n";
  }
  out << ranking_line(report) << "\n";
  return kExitOk;
}

struct ReportFlags {
  std::vector<std::string> traces;
  std::string snapshot;
  std::string oracle = "auto";
  std::string out;
  std::string format = "csv";
};

int do_report(const ReportFlags& f, std::ostream& out) {
  std::optional<RelevanceOracle> oracle_flag;
  ReportFormat format;
  try {
    oracle_flag = parse_oracle_flag(f.oracle);
    format = parse_report_format(f.format);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  auto snapshot = load_snapshot(f.snapshot);
  auto oracle = resolve_oracle(oracle_flag, snapshot);
  std::vector<CrawlTrace> traces;
  for (const auto& path : f.traces) traces.push_back(load_trace(path));
  auto report = compare(traces, oracle, snapshot);
  auto rendered = render_report(report, format);
  if (f.out.empty()) {
    out << rendered;
  } else {
    write_file_atomic(f.out, rendered);
  }
  out << ranking_line(report) << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Offline benchmark for web-crawler frontier strategies", "frontier-bench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "frontier-bench 1.0");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic snapshot with a planted relevant cluster");
  synth_cmd->add_option("--pages", synth.pages, "Number of pages")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--relevant-fraction", synth.relevant_fraction, "Fraction of relevant pages")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--rng-seed", synth.rng_seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--latency-ms", synth.latency_ms, "Latency of every page")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--intra-prob", synth.intra_prob, "Link probability inside the cluster")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--cross-prob", synth.cross_prob, "Link probability between other page pairs")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--out", synth.out, "Output snapshot")->required();

  IngestFlags ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Fetch live pages breadth-first into a snapshot");
  ingest_cmd->add_option("--seed-url", ingest.seeds, "Seed URL (repeatable)")->required();
  ingest_cmd->add_option("--max-pages", ingest.max_pages, "Page cap")->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Output snapshot")->required();
  ingest_cmd->add_option("--query", ingest.query, "Topic query stored in the snapshot");
  ingest_cmd->add_option("--delay-ms", ingest.delay_ms, "Minimum gap between requests to one host")
      ->capture_default_str();
  ingest_cmd->add_option("--timeout-ms", ingest.timeout_ms, "Per-request timeout")->capture_default_str();
  ingest_cmd->add_option("--retries", ingest.retries, "Retries after a failed attempt")->capture_default_str();
  ingest_cmd->add_option("--user-agent", ingest.user_agent, "User-Agent (default: $FRONTIER_BENCH_UA)");
  ingest_cmd->add_flag("--ignore-robots", ingest.ignore_robots, "Do not consult robots.txt");

  CrawlCmdFlags crawl_flags;
  auto* crawl_cmd = app.add_subcommand("crawl", "Run one strategy over a snapshot and write its trace");
  add_crawl_flags(crawl_cmd, crawl_flags.crawl);
  crawl_cmd->add_option("--strategy", crawl_flags.strategy, "bfs | dfs | shark | priority | nb")->required();
  crawl_cmd->add_option("--out", crawl_flags.out, "Output trace")->required();
  crawl_cmd->add_option("--save-model", crawl_flags.save_model, "Write the naive-Bayes model used");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run several strategies under one config and compare them");
  add_crawl_flags(bench_cmd, bench.crawl);
  bench_cmd->add_option("--strategies", bench.strategies, "Comma-separated strategy list")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--report", bench.report, "Report path (default: stdout)");
  bench_cmd->add_option("--format", bench.format, "csv | json")->capture_default_str();
  bench_cmd->add_option("--traces-dir", bench.traces_dir, "Also store each strategy's trace here");

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("report", "Recompute metrics from stored traces");
  report_cmd->add_option("--trace", report.traces, "Trace file (repeatable)")->required()->expected(1, -1);
  report_cmd->add_option("--snapshot", report.snapshot, "Snapshot the traces were recorded on")->required();
  report_cmd->add_option("--oracle", report.oracle, "labels | url_rule:<substring> | auto")->capture_default_str();
  report_cmd->add_option("--out", report.out, "Report path (default: stdout)");
  report_cmd->add_option("--format", report.format, "csv | json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return do_synth(synth, out);
    if (*ingest_cmd) return do_ingest(ingest, out);
    if (*crawl_cmd) return do_crawl(crawl_flags, out);
    if (*bench_cmd) return do_bench(bench, out);
    if (*report_cmd) return do_report(report, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fbench::cli
