#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fbench/extract.hpp"
#include "fbench/frontiers.hpp"
#include "fbench/oracle.hpp"
#include "fbench/relevance.hpp"
#include "fbench/webgraph.hpp"

namespace fbench {

inline constexpr std::size_t kDefaultMaxPages = 1000;
inline constexpr std::int64_t kDefaultTimeBudgetMs = 3'600'000;
inline constexpr std::uint32_t kDefaultMaxDepth = 3;

struct CrawlConfig {
  StrategyKind strategy = StrategyKind::Bfs;
  std::size_t max_pages = kDefaultMaxPages;
  std::int64_t time_budget_ms = kDefaultTimeBudgetMs;
  std::uint32_t max_depth = kDefaultMaxDepth;
  SharkParams shark;
  PriorityWeights priority;
  double nb_threshold = kDefaultNbThreshold;
  std::size_t context_window = kDefaultContextWindow;
  Tokens query;  // empty: use the snapshot's topic query
  std::int64_t miss_penalty_ms = 0;

  void validate() const;
  bool operator==(const CrawlConfig& o) const;
};

enum class StopReason { PageBudget, TimeBudget, FrontierExhausted };

std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view text);

struct VisitRecord {
  std::uint64_t step = 0;
  std::string url;
  std::int64_t virtual_time_ms = 0;
  bool relevant = false;
  bool duplicate_content = false;
  std::uint64_t frontier_size = 0;  // after this step's pushes
  std::uint64_t visited_size = 0;   // URLs fetched so far, dead links included

  bool operator==(const VisitRecord&) const = default;
};

struct CrawlTrace {
  CrawlConfig config;
  std::string snapshot_id;
  std::vector<VisitRecord> visits;
  StopReason stop_reason = StopReason::FrontierExhausted;

  bool operator==(const CrawlTrace&) const = default;
};

// Query the crawl scores against: the config override, else the snapshot's.
Tokens effective_query(const GraphSnapshot& snapshot, const CrawlConfig& config);

// Seed pages and the pages they link to, in discovery order, read straight
// from the snapshot (no clock). This is the labelled set the naive-Bayes
// model trains on and the corpus the similarity vocabulary is fitted to.
std::vector<Document> bootstrap_documents(const GraphSnapshot& snapshot, const CrawlConfig& config);

SimilarityEngine make_similarity_engine(const GraphSnapshot& snapshot, const CrawlConfig& config);

NBModel train_bootstrap_model(const GraphSnapshot& snapshot, const CrawlConfig& config,
                              const RelevanceOracle& oracle, double alpha = kDefaultAlpha);

// Runs one crawl. `nb_model` is required for the nb strategy and ignored
// otherwise. `snapshot_digest` may be passed when the caller already has it.
CrawlTrace crawl(const GraphSnapshot& snapshot, const CrawlConfig& config, const RelevanceOracle& oracle,
                 const NBModel* nb_model = nullptr, std::string snapshot_digest = {});

std::string serialize_trace(const CrawlTrace& trace);
CrawlTrace parse_trace(std::string_view text);
void save_trace(const CrawlTrace& trace, const std::filesystem::path& path);
CrawlTrace load_trace(const std::filesystem::path& path);

}  // namespace fbench
