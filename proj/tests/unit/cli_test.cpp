#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fbench/engine.hpp"
#include "fbench/evalbench.hpp"
#include "fbench/io.hpp"
#include "fbench/webgraph.hpp"
#include "graphs.hpp"

namespace fbench {
namespace {

using testing::TempDir;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "frontier-bench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

std::string synth(const TempDir& dir, const std::string& name, std::size_t pages = 300, std::uint64_t seed = 42) {
  auto path = (dir / name).string();
  auto r = run({"synth", "--pages", std::to_string(pages), "--rng-seed", std::to_string(seed), "--out", path});
  EXPECT_EQ(r.code, 0) << r.err;
  return path;
}

// --- General --------------------------------------------------------------

TEST(Cli, NoCommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, UnknownFlagRejected) {
  TempDir dir;
  auto r = run({"synth", "--pages", "10", "--colour", "red", "--out", (dir / "x.snap").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(std::filesystem::exists(dir / "x.snap"));
}

// --- synth ----------------------------------------------------------------

TEST(CliSynth, RelevantCountMatchesFraction) {
  TempDir dir;
  auto path = (dir / "s.snap").string();
  auto r = run({"synth", "--pages", "1000", "--relevant-fraction", "0.2", "--rng-seed", "42", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  auto snap = load_snapshot(path);
  std::size_t labelled = 0;
  for (const auto& [url, page] : snap.pages) labelled += page.label.value_or(false) ? 1 : 0;
  EXPECT_EQ(snap.pages.size(), 1000u);
  EXPECT_EQ(labelled, 200u);
  EXPECT_NE(r.out.find("pages: 1000\n"), std::string::npos);
  EXPECT_NE(r.out.find("relevant: 200\n"), std::string::npos);
  EXPECT_NE(r.out.find("snapshot_id: " + snapshot_id(snap)), std::string::npos);
}

TEST(CliSynth, ZeroPagesIsUsageError) {
  TempDir dir;
  auto r = run({"synth", "--pages", "0", "--out", (dir / "z.snap").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(std::filesystem::exists(dir / "z.snap"));
}

TEST(CliSynth, BadFractionIsUsageError) {
  TempDir dir;
  EXPECT_EQ(run({"synth", "--relevant-fraction", "1.5", "--out", (dir / "f.snap").string()}).code, 1);
  EXPECT_EQ(run({"synth", "--pages", "20"}).code, 1);
}

TEST(CliSynth, Deterministic) {
  TempDir dir;
  auto a = synth(dir, "a.snap", 500, 7);
  auto b = synth(dir, "b.snap", 500, 7);
  auto c = synth(dir, "c.snap", 500, 8);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
}

TEST(CliSynth, UnwritableOutputIsRuntimeError) {
  TempDir dir;
  auto r = run({"synth", "--pages", "10", "--out", (dir / "missing" / "deeper" / "x.snap").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

// --- ingest ---------------------------------------------------------------

TEST(CliIngest, MissingOutIsUsageError) {
  EXPECT_EQ(run({"ingest", "--seed-url", "https://en.wikipedia.org/wiki/Main_Page"}).code, 1);
}

TEST(CliIngest, BadSeedIsUsageError) {
  TempDir dir;
  EXPECT_EQ(run({"ingest", "--seed-url", "ftp://x/", "--out", (dir / "i.snap").string()}).code, 1);
}

TEST(CliIngest, LocalServerSnapshotEqualsServedBytes) {
  std::map<std::string, std::string> pages = {
      {"/wiki/A", R"(<p>alpha</p><a href="/wiki/B">b</a><a href="/wiki/C">c</a>)"},
      {"/wiki/B", R"(<p>beta</p><a href="/wiki/A">a</a>)"},
      {"/wiki/C", R"(<p>gamma</p>)"},
  };
  httplib::Server server;
  std::string seen_ua;
  std::mutex m;
  for (const auto& [path, html] : pages) {
    const std::string body = html;
    server.Get(path, [&, body](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard<std::mutex> g(m);
        seen_ua = req.get_header_value("User-Agent");
      }
      res.set_content(body, "text/html");
    });
  }
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  TempDir dir;
  auto out = (dir / "live.snap").string();
  ::setenv("FRONTIER_BENCH_UA", "env-agent/9", 1);
  auto r = run({"ingest", "--seed-url", base + "/wiki/A", "--max-pages", "30", "--delay-ms", "0", "--out", out,
                "--query", "alpha beta"});
  ::unsetenv("FRONTIER_BENCH_UA");
  server.stop();
  t.join();

  ASSERT_EQ(r.code, 0) << r.err;
  auto snap = load_snapshot(out);
  ASSERT_EQ(snap.pages.size(), 3u);
  for (const auto& [path, html] : pages) EXPECT_EQ(snap.pages.at(base + path).html, html);
  EXPECT_EQ(snap.topic_query, (Tokens{"alpha", "beta"}));
  EXPECT_EQ(seen_ua, "env-agent/9");
}

// --- crawl ----------------------------------------------------------------

std::string chain_snapshot(const TempDir& dir, std::optional<bool> labels) {
  testing::GraphOptions o;
  if (labels) o.labels = {*labels, *labels, *labels, *labels};
  auto snap = testing::graph_snapshot({{1}, {2}, {3}, {}}, o);
  if (!labels) {
    for (auto& [url, page] : snap.pages) page.label.reset();
  }
  auto path = (dir / "chain.snap").string();
  save_snapshot(snap, path);
  return path;
}

TEST(CliCrawl, BfsChainOrder) {
  TempDir dir;
  auto snap = chain_snapshot(dir, true);
  auto trace_path = (dir / "bfs.trace").string();
  auto r = run({"crawl", "--snapshot", snap, "--strategy", "bfs", "--out", trace_path});
  ASSERT_EQ(r.code, 0) << r.err;
  auto trace = load_trace(trace_path);
  std::vector<std::string> order;
  for (const auto& v : trace.visits) order.push_back(v.url);
  EXPECT_EQ(order, (std::vector<std::string>{testing::node_url(0), testing::node_url(1), testing::node_url(2),
                                             testing::node_url(3)}));
  EXPECT_EQ(r.out, "visited: 4\nrelevant: 4\nstop_reason: frontier_exhausted\n");
}

TEST(CliCrawl, DefaultsFromTheCommandLine) {
  TempDir dir;
  auto snap = chain_snapshot(dir, true);
  auto trace_path = (dir / "t.trace").string();
  ASSERT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "dfs", "--out", trace_path}).code, 0);
  auto trace = load_trace(trace_path);
  EXPECT_EQ(trace.config.max_pages, 1000u);
  EXPECT_EQ(trace.config.time_budget_ms, 3600000);
  EXPECT_EQ(trace.config.max_depth, 3u);
}

TEST(CliCrawl, NbWithoutLabelsOrModelFails) {
  TempDir dir;
  auto snap = chain_snapshot(dir, std::nullopt);
  auto trace_path = dir / "nb.trace";
  auto r = run({"crawl", "--snapshot", snap, "--strategy", "nb", "--oracle", "url_rule:wiki", "--out",
                trace_path.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("naive-Bayes"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(trace_path));
}

TEST(CliCrawl, NbModelRoundTrip) {
  TempDir dir;
  auto snap = synth(dir, "s.snap");
  auto model = (dir / "nb.model").string();
  auto t1 = (dir / "a.trace").string();
  auto t2 = (dir / "b.trace").string();
  ASSERT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "nb", "--out", t1, "--save-model", model}).code, 0);
  ASSERT_TRUE(std::filesystem::exists(model));
  ASSERT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "nb", "--out", t2, "--model", model}).code, 0);
  EXPECT_EQ(slurp(t1), slurp(t2));
}

TEST(CliCrawl, Deterministic) {
  TempDir dir;
  auto snap = synth(dir, "s.snap");
  for (auto s : {"bfs", "dfs", "shark", "priority", "nb"}) {
    auto a = (dir / (std::string(s) + "1.trace")).string();
    auto b = (dir / (std::string(s) + "2.trace")).string();
    ASSERT_EQ(run({"crawl", "--snapshot", snap, "--strategy", s, "--out", a}).code, 0);
    ASSERT_EQ(run({"crawl", "--snapshot", snap, "--strategy", s, "--out", b}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b)) << s;
  }
}

TEST(CliCrawl, UsageErrors) {
  TempDir dir;
  auto snap = synth(dir, "s.snap", 50);
  auto out = (dir / "x.trace").string();
  EXPECT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "random", "--out", out}).code, 1);
  EXPECT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "shark", "--delta", "2", "--out", out}).code, 1);
  EXPECT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "bfs", "--max-pages", "0", "--out", out}).code, 1);
  EXPECT_EQ(run({"crawl", "--snapshot", snap, "--strategy", "bfs"}).code, 1);
  EXPECT_FALSE(std::filesystem::exists(out));
  EXPECT_EQ(run({"crawl", "--snapshot", (dir / "nope.snap").string(), "--strategy", "bfs", "--out", out}).code, 2);
}

// --- bench and report -----------------------------------------------------

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(CliBench, FiveRowsAndRanking) {
  TempDir dir;
  auto snap = synth(dir, "s.snap", 1000, 42);
  auto report = (dir / "r.csv").string();
  auto r = run({"bench", "--snapshot", snap, "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = lines(slurp(report));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].rfind("strategy,", 0), 0u);
  std::set<std::string> names;
  for (std::size_t i = 1; i < rows.size(); ++i) names.insert(rows[i].substr(0, rows[i].find(',')));
  EXPECT_EQ(names, (std::set<std::string>{"bfs", "dfs", "shark", "priority", "nb"}));
  auto out = lines(r.out);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out.back().rfind("ranking: ", 0), 0u);
}

TEST(CliBench, SingleStrategy) {
  TempDir dir;
  auto snap = synth(dir, "s.snap");
  auto r = run({"bench", "--snapshot", snap, "--strategies", "bfs"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto out = lines(r.out);
  // CSV header, one row, the summary line, the ranking.
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[1].rfind("bfs,", 0), 0u);
  EXPECT_EQ(out[3], "ranking: bfs");
}

TEST(CliBench, ByteIdenticalReruns) {
  TempDir dir;
  auto snap = synth(dir, "s.snap", 800, 3);
  auto a = (dir / "a.json").string();
  auto b = (dir / "b.json").string();
  ASSERT_EQ(run({"bench", "--snapshot", snap, "--report", a, "--format", "json"}).code, 0);
  ASSERT_EQ(run({"bench", "--snapshot", snap, "--report", b, "--format", "json"}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  auto j = nlohmann::json::parse(slurp(a));
  EXPECT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["ranking"].size(), 5u);
}

TEST(CliBench, UsageErrors) {
  TempDir dir;
  auto snap = synth(dir, "s.snap", 50);
  auto report = dir / "r.csv";
  EXPECT_EQ(run({"bench", "--snapshot", snap, "--strategies", "bfs,bfs", "--report", report.string()}).code, 1);
  EXPECT_EQ(run({"bench", "--snapshot", snap, "--strategies", "bfs,astar", "--report", report.string()}).code, 1);
  EXPECT_EQ(run({"bench", "--snapshot", snap, "--format", "xml", "--report", report.string()}).code, 1);
  EXPECT_FALSE(std::filesystem::exists(report));
}

TEST(CliReport, MatchesBenchRow) {
  TempDir dir;
  auto snap = synth(dir, "s.snap", 600, 11);
  auto traces = (dir / "traces").string();
  auto bench_csv = (dir / "bench.csv").string();
  ASSERT_EQ(run({"bench", "--snapshot", snap, "--report", bench_csv, "--traces-dir", traces}).code, 0);
  auto bench_rows = lines(slurp(bench_csv));

  for (auto s : {"bfs", "dfs", "shark", "priority", "nb"}) {
    auto trace = (std::filesystem::path(traces) / (std::string(s) + ".trace")).string();
    auto r = run({"report", "--trace", trace, "--snapshot", snap});
    ASSERT_EQ(r.code, 0) << r.err;
    auto out = lines(r.out);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], bench_rows[0]);
    auto it = std::find_if(bench_rows.begin(), bench_rows.end(),
                           [&](const std::string& l) { return l.rfind(std::string(s) + ",", 0) == 0; });
    ASSERT_NE(it, bench_rows.end());
    EXPECT_EQ(out[1], *it);
  }
}

TEST(CliReport, MixedSnapshotsRejected) {
  TempDir dir;
  auto s1 = synth(dir, "s1.snap", 100, 1);
  auto s2 = synth(dir, "s2.snap", 100, 2);
  auto t1 = (dir / "t1.trace").string();
  auto t2 = (dir / "t2.trace").string();
  ASSERT_EQ(run({"crawl", "--snapshot", s1, "--strategy", "bfs", "--out", t1}).code, 0);
  ASSERT_EQ(run({"crawl", "--snapshot", s2, "--strategy", "dfs", "--out", t2}).code, 0);
  auto r = run({"report", "--trace", t1, "--trace", t2, "--snapshot", s1});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliReport, UrlRuleOracle) {
  TempDir dir;
  testing::GraphOptions o;
  auto snap = testing::graph_snapshot({{1, 2}, {}, {}}, o);
  // Rewrite URLs so that only some contain the substring.
  GraphSnapshot wiki;
  wiki.topic_query = snap.topic_query;
  const std::vector<std::string> urls = {"https://en.example.org/wiki/Root", "https://en.example.org/WIKI/Leaf",
                                         "https://en.example.org/shop/Item"};
  wiki.seeds = {urls[0]};
  for (std::size_t i = 0; i < urls.size(); ++i) {
    PageRecord p;
    p.url = urls[i];
    p.latency_ms = 10;
    p.html = i == 0 ? R"(<p>solar</p><a href="/WIKI/Leaf">a</a><a href="/shop/Item">b</a>)" : "<p>solar " + std::to_string(i) + "</p>";
    wiki.pages.emplace(p.url, p);
  }
  auto snap_path = (dir / "w.snap").string();
  save_snapshot(wiki, snap_path);
  auto trace = (dir / "w.trace").string();
  ASSERT_EQ(run({"crawl", "--snapshot", snap_path, "--strategy", "bfs", "--oracle", "url_rule:wiki", "--out", trace})
                .code,
            0);
  auto r = run({"report", "--trace", trace, "--snapshot", snap_path, "--oracle", "url_rule:wiki"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto row = lines(r.out)[1];
  // 3 visited, 2 of them relevant, both relevant pages retrieved.
  EXPECT_EQ(row.rfind("bfs,3,2,0.666667,1.000000,", 0), 0u) << row;
  // The labels oracle cannot be used on an unlabelled snapshot.
  EXPECT_EQ(run({"report", "--trace", trace, "--snapshot", snap_path, "--oracle", "labels"}).code, 2);
}

}  // namespace
}  // namespace fbench
