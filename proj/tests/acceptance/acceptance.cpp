// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <future>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bayes_oracle.hpp"
#include "cli.hpp"
#include "fbench/engine.hpp"
#include "fbench/evalbench.hpp"
#include "fbench/io.hpp"
#include "fbench/relevance.hpp"
#include "fbench/webgraph.hpp"
#include "graphs.hpp"
#include "reference_crawler.hpp"

namespace fbench {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

const RelevanceOracle kLabels = RelevanceOracle::labels();

std::vector<std::string> visit_urls(const CrawlTrace& t) {
  std::vector<std::string> out;
  for (const auto& v : t.visits) out.push_back(v.url);
  return out;
}

// Textbook breadth-first traversal: mark on discovery, expand to depth cap.
std::vector<std::string> textbook_bfs(const testing::Adjacency& adj, std::uint32_t max_depth) {
  std::vector<bool> seen(adj.size(), false);
  std::deque<std::pair<std::size_t, std::uint32_t>> q{{0, 0}};
  seen[0] = true;
  std::vector<std::string> order;
  while (!q.empty()) {
    auto [n, d] = q.front();
    q.pop_front();
    order.push_back(testing::node_url(n));
    if (d >= max_depth) continue;
    for (auto c : adj[n]) {
      if (!seen[c]) {
        seen[c] = true;
        q.push_back({c, d + 1});
      }
    }
  }
  return order;
}

// Explicit stack model of the depth-first crawl: links to unvisited pages are
// pushed, the most recent push is popped, already-visited pops are skipped.
// Returns (visit order, stack size after each visit's pushes).
std::pair<std::vector<std::string>, std::vector<std::uint64_t>> stack_dfs(const testing::Adjacency& adj,
                                                                            std::uint32_t max_depth) {
  std::vector<std::pair<std::size_t, std::uint32_t>> stack{{0, 0}};
  std::vector<bool> visited(adj.size(), false);
  std::vector<std::string> order;
  std::vector<std::uint64_t> sizes;
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    if (visited[n]) continue;
    visited[n] = true;
    order.push_back(testing::node_url(n));
    if (d < max_depth) {
      for (auto c : adj[n]) {
        if (!visited[c]) stack.push_back({c, d + 1});
      }
    }
    sizes.push_back(stack.size());
  }
  return {order, sizes};
}

Outcome frontier_order() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  for (int g = 0; g < 100 && o.pass; ++g) {
    std::size_t n = 1 + rng() % 50;
    double p = 0.02 + static_cast<double>(rng() % 1000) / 1000.0 * 0.18;
    auto adj = testing::random_adjacency(rng, n, p);
    auto snap = testing::graph_snapshot(adj);
    CrawlConfig c;
    c.strategy = StrategyKind::Bfs;
    if (visit_urls(crawl(snap, c, kLabels)) != textbook_bfs(adj, c.max_depth)) {
      o.fail("bfs order differs on graph " + std::to_string(g));
    }
    c.strategy = StrategyKind::Dfs;
    auto t = crawl(snap, c, kLabels);
    auto [order, sizes] = stack_dfs(adj, c.max_depth);
    if (visit_urls(t) != order) o.fail("dfs order differs on graph " + std::to_string(g));
    for (std::size_t i = 0; o.pass && i < t.visits.size(); ++i) {
      if (t.visits[i].frontier_size != sizes[i]) o.fail("dfs stack size differs on graph " + std::to_string(g));
    }
  }
  double secs = seconds_since(t0);
  if (secs >= 5.0) o.fail("took " + fmt("%.2f", secs) + " s");
  if (o.pass) o.detail = "100 graphs, " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome shark_decay() {
  Outcome o;
  const double s = 0.8;
  SharkParams p;  // delta 0.5
  // Six-node chain: the head has similarity s, every node below has 0.
  std::vector<double> sim = {s, 0, 0, 0, 0, 0};
  double inherited = 0.0;
  double worst = 0.0;
  for (std::size_t k = 1; k <= 5; ++k) {
    inherited = shark_score(sim[k - 1], inherited, 0.0, 0.0, p).child_inherited;
    double err = std::abs(inherited - std::pow(0.5, static_cast<double>(k)) * s);
    worst = std::max(worst, err);
    if (err > 1e-12) o.fail("depth " + std::to_string(k) + " off by " + fmt("%.3g", err));
  }
  if (o.pass) o.detail = "max error " + fmt("%.3g", worst);
  return o;
}

Outcome nb_equivalence() {
  Outcome o;
  std::mt19937_64 rng(777);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    std::size_t terms = 1 + rng() % 8;
    std::size_t ndocs = 2 + rng() % 4;
    std::vector<LabeledDoc> docs;
    std::vector<Tokens> corpus;
    for (std::size_t d = 0; d < ndocs; ++d) {
      Tokens t;
      std::size_t len = 1 + rng() % 6;
      for (std::size_t i = 0; i < len; ++i) t.push_back("t" + std::to_string(rng() % terms));
      corpus.push_back(t);
      docs.push_back({t, d == 0 ? true : d == 1 ? false : (rng() & 1) != 0});
    }
    auto model = nb_train(docs, 1.0, vocab_fit(corpus));
    auto brute = testing::brute_train(docs, 1.0);
    for (int q = 0; q < 10; ++q) {
      Tokens query;
      std::size_t len = rng() % 6;
      for (std::size_t i = 0; i < len; ++i) query.push_back("t" + std::to_string(rng() % (terms + 2)));
      double err = std::abs(nb_posterior(model, query) - testing::brute_posterior(brute, query));
      worst = std::max(worst, err);
      if (err > 1e-9) o.fail("corpus " + std::to_string(c) + " off by " + fmt("%.3g", err));
    }
  }
  std::vector<LabeledDoc> two = {{{"ai", "ml"}, true}, {{"shoe"}, false}};
  double worked = nb_posterior(nb_train(two, 1.0, vocab_fit({{"ai", "ml"}, {"shoe"}})), {"ai"});
  if (std::abs(worked - 0.61538) > 1e-5) o.fail("worked example gave " + fmt("%.6f", worked));
  if (o.pass) o.detail = "20 corpora, max error " + fmt("%.3g", worst) + ", worked example " + fmt("%.5f", worked);
  return o;
}

std::map<StrategyKind, CrawlTrace> run_all(const GraphSnapshot& snap, const CrawlConfig& base) {
  const std::string digest = snapshot_id(snap);
  std::optional<NBModel> model;
  auto nb_cfg = base;
  nb_cfg.strategy = StrategyKind::Nb;
  model = train_bootstrap_model(snap, nb_cfg, kLabels);
  std::map<StrategyKind, std::future<CrawlTrace>> jobs;
  for (auto k : kAllStrategies) {
    auto c = base;
    c.strategy = k;
    jobs[k] = std::async(std::launch::async, [&, c] { return crawl(snap, c, kLabels, &*model, digest); });
  }
  std::map<StrategyKind, CrawlTrace> out;
  for (auto& [k, j] : jobs) out[k] = j.get();
  return out;
}

std::uint64_t relevant_at(const CrawlTrace& t, const GraphSnapshot& snap, std::size_t step) {
  auto curve = harvest_curve(t, kLabels, snap);
  if (curve.empty()) return 0;
  return curve[std::min(step, curve.size()) - 1].relevant;
}

Outcome focused_beats_blind() {
  Outcome o;
  auto t0 = Clock::now();
  int wins = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto snap = synth_graph(SynthParams::with_default_density(seed, 1000, 0.2));
    auto traces = run_all(snap, CrawlConfig{});
    std::map<StrategyKind, std::uint64_t> at;
    for (const auto& [k, t] : traces) at[k] = relevant_at(t, snap, 500);
    auto blind = std::max(at[StrategyKind::Bfs], at[StrategyKind::Dfs]);
    bool win = at[StrategyKind::Shark] > blind && at[StrategyKind::Priority] > blind && at[StrategyKind::Nb] > blind;
    wins += win ? 1 : 0;
    per_seed << (seed > 1 ? " " : "") << seed << (win ? "+" : "-");
  }
  double secs = seconds_since(t0);
  if (wins < 9) o.fail("focused won on " + std::to_string(wins) + "/10 seeds (" + per_seed.str() + ")");
  if (secs >= 60.0) o.fail("took " + fmt("%.1f", secs) + " s");
  if (o.pass) o.detail = std::to_string(wins) + "/10 seeds, " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome budget_alignment() {
  Outcome o;
  testing::GraphOptions opt;
  opt.latency_ms = 3600;
  auto snap = testing::graph_snapshot(testing::kary_tree(10, 3), opt);  // 1111 pages, all reachable
  for (auto k : {StrategyKind::Bfs, StrategyKind::Dfs, StrategyKind::Shark, StrategyKind::Priority}) {
    CrawlConfig c;
    c.strategy = k;
    auto row = metric_row(crawl(snap, c, kLabels), kLabels, snap);
    if (row.time_to_1000_ms != std::optional<std::int64_t>(3600000)) {
      o.fail(std::string(to_string(k)) + ": time_to_1000_ms " +
             (row.time_to_1000_ms ? std::to_string(*row.time_to_1000_ms) : "none"));
    }
    if (row.pages_in_3600s != 1000) {
      o.fail(std::string(to_string(k)) + ": pages_in_3600s " + std::to_string(row.pages_in_3600s));
    }
  }
  if (o.pass) o.detail = "time_to_1000_ms 3600000, pages_in_3600s 1000";
  return o;
}

struct CliRun {
  int code;
  std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "frontier-bench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, err.str()};
}

Outcome determinism(const testing::TempDir& dir) {
  Outcome o;
  auto snap = (dir / "det.snap").string();
  if (cli_run({"synth", "--pages", "1000", "--rng-seed", "42", "--out", snap}).code != 0) {
    o.fail("synth failed");
    return o;
  }
  for (auto fmt_name : {"csv", "json"}) {
    auto a = (dir / (std::string("a.") + fmt_name)).string();
    auto b = (dir / (std::string("b.") + fmt_name)).string();
    auto ra = cli_run({"bench", "--snapshot", snap, "--report", a, "--format", fmt_name});
    auto rb = cli_run({"bench", "--snapshot", snap, "--report", b, "--format", fmt_name});
    if (ra.code != 0 || rb.code != 0) o.fail("bench failed: " + ra.err + rb.err);
    else if (read_file(a) != read_file(b)) o.fail(std::string("bench ") + fmt_name + " reports differ");
  }
  for (auto k : kAllStrategies) {
    std::string s(to_string(k));
    auto a = (dir / (s + ".1.trace")).string();
    auto b = (dir / (s + ".2.trace")).string();
    auto ra = cli_run({"crawl", "--snapshot", snap, "--strategy", s, "--out", a});
    auto rb = cli_run({"crawl", "--snapshot", snap, "--strategy", s, "--out", b});
    if (ra.code != 0 || rb.code != 0) o.fail("crawl " + s + " failed: " + ra.err + rb.err);
    else if (read_file(a) != read_file(b)) o.fail("crawl " + s + " traces differ");
  }
  if (o.pass) o.detail = "2 bench reports and 5 crawl traces byte-identical on rerun";
  return o;
}

Outcome replay_soundness(const testing::TempDir& dir) {
  Outcome o;
  auto snap_path = (dir / "replay.snap").string();
  auto traces_dir = dir / "replay-traces";
  auto report = (dir / "replay.json").string();
  if (cli_run({"synth", "--pages", "1000", "--rng-seed", "42", "--out", snap_path}).code != 0 ||
      cli_run({"bench", "--snapshot", snap_path, "--report", report, "--format", "json", "--traces-dir",
               traces_dir.string()})
              .code != 0) {
    o.fail("bench failed");
    return o;
  }
  auto snap = load_snapshot(snap_path);
  std::size_t steps = 0;
  for (auto k : kAllStrategies) {
    std::string name(to_string(k));
    auto trace = load_trace(traces_dir / (name + ".trace"));
    std::optional<NBModel> model;
    if (k == StrategyKind::Nb) model = train_bootstrap_model(snap, trace.config, kLabels);
    auto ref = testing::reference_crawl(snap, trace.config, kLabels, model ? &*model : nullptr);
    if (ref.visits.size() != trace.visits.size()) {
      o.fail(name + ": replay visits " + std::to_string(ref.visits.size()) + " vs " +
             std::to_string(trace.visits.size()));
      continue;
    }
    for (std::size_t i = 0; i < ref.visits.size(); ++i) {
      const auto& r = ref.visits[i];
      const auto& t = trace.visits[i];
      if (r.url != t.url || r.frontier_size != t.frontier_size || r.visited_size != t.visited_size) {
        o.fail(name + ": step " + std::to_string(i + 1) + " differs on replay");
        break;
      }
    }
    std::uint64_t peak_f = 0, peak_v = 0, url_bytes = 0;
    for (const auto& v : ref.visits) {
      peak_f = std::max(peak_f, v.frontier_size);
      peak_v = std::max(peak_v, v.visited_size);
      url_bytes += v.url.size();
    }
    std::uint64_t est = peak_f * 36 + (ref.visits.empty() ? 0 : peak_v * url_bytes / ref.visits.size());
    auto row = metric_row(trace, kLabels, snap);
    if (row.est_bytes != est || row.peak_frontier != peak_f || row.peak_visited != peak_v) {
      o.fail(name + ": est_bytes " + std::to_string(row.est_bytes) + " vs replay " + std::to_string(est));
    }
    steps += ref.visits.size();
  }
  if (o.pass) o.detail = "5 bench traces, " + std::to_string(steps) + " steps replayed";
  return o;
}

Outcome dedup_guarantee() {
  Outcome o;
  // Seed 0 links to 1 and 2; pages 1 and 2 are byte-identical mirrors.
  testing::GraphOptions opt;
  opt.labels = {true, true, true};
  auto snap = testing::graph_snapshot({{1, 2}, {}, {}}, opt);
  auto mirror = snap.pages.at(testing::node_url(1)).html;
  snap.pages.at(testing::node_url(2)).html = mirror;
  CrawlConfig c;
  auto t = crawl(snap, c, kLabels);
  if (t.visits.size() != 3) {
    o.fail("expected 3 visits, got " + std::to_string(t.visits.size()));
    return o;
  }
  if (t.visits[1].duplicate_content) o.fail("first copy flagged duplicate");
  if (!t.visits[2].duplicate_content) o.fail("second copy not flagged duplicate");
  auto curve = harvest_curve(t, kLabels, snap);
  if (curve.back().relevant != 2) o.fail("harvest counted " + std::to_string(curve.back().relevant));
  if (curve[2].relevant != curve[1].relevant) o.fail("duplicate visit incremented harvest");
  if (o.pass) o.detail = "second copy flagged, harvest 2 of 3 visits";
  return o;
}

Outcome metric_bounds() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::size_t zero_cases = 0;
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    std::size_t n = 1 + rng() % 80;
    testing::GraphOptions opt;
    for (std::size_t i = 0; i < n; ++i) opt.labels.push_back(rng() % 4 == 0);
    auto snap = testing::graph_snapshot(testing::Adjacency(n), opt);
    CrawlTrace t;
    t.snapshot_id = snapshot_id(snap);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(rng() % (n + 1));
    std::int64_t now = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      VisitRecord v;
      v.step = i + 1;
      v.url = testing::node_url(order[i]);
      now += static_cast<std::int64_t>(rng() % 8000);
      v.virtual_time_ms = now;
      v.relevant = *opt.labels[order[i]];
      v.duplicate_content = rng() % 6 == 0;
      v.frontier_size = rng() % 200;
      v.visited_size = i + 1;
      t.visits.push_back(v);
    }
    auto row = metric_row(t, kLabels, snap);
    for (double x : {row.precision, row.recall, row.f1, row.harvest_at_1000}) {
      if (!(x >= 0.0 && x <= 1.0)) o.fail("ratio out of range in trial " + std::to_string(trial));
    }
    if (row.relevant_retrieved == 0) {
      ++zero_cases;
      if (row.f1 != 0.0) o.fail("f1 nonzero without relevant pages in trial " + std::to_string(trial));
    }
  }
  if (o.pass) o.detail = "1000 traces, " + std::to_string(zero_cases) + " with no relevant page";
  return o;
}

Outcome performance(const testing::TempDir& dir) {
  Outcome o;
  auto snap = (dir / "big.snap").string();
  if (cli_run({"synth", "--pages", "10000", "--rng-seed", "42", "--out", snap}).code != 0) {
    o.fail("synth failed");
    return o;
  }
  auto t0 = Clock::now();
  auto r = cli_run({"bench", "--snapshot", snap, "--report", (dir / "big.csv").string()});
  double secs = seconds_since(t0);
  if (r.code != 0) o.fail("bench failed: " + r.err);
  if (secs >= 60.0) o.fail("took " + fmt("%.1f", secs) + " s");
  if (o.pass) o.detail = "10000 pages, five strategies, " + fmt("%.2f", secs) + " s";
  return o;
}

}  // namespace
}  // namespace fbench

int main() {
  using namespace fbench;
  testing::TempDir dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"frontier-order", frontier_order},
      {"shark-decay", shark_decay},
      {"nb-brute-force", nb_equivalence},
      {"focused-beats-blind", focused_beats_blind},
      {"budget-alignment", budget_alignment},
      {"determinism", [&] { return determinism(dir); }},
      {"replay-soundness", [&] { return replay_soundness(dir); }},
      {"dedup", dedup_guarantee},
      {"metric-bounds", metric_bounds},
      {"performance", [&] { return performance(dir); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
