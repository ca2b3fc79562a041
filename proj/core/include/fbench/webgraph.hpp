#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbench/extract.hpp"

namespace fbench {

struct PageRecord {
  std::string url;
  std::string html;
  std::int64_t latency_ms = 0;
  std::optional<bool> label;

  bool operator==(const PageRecord&) const = default;
};

inline constexpr int kSnapshotFormatVersion = 1;

// A frozen corpus. Immutable once built; share it freely across crawl runs.
struct GraphSnapshot {
  int format_version = kSnapshotFormatVersion;
  Tokens topic_query;
  std::map<std::string, PageRecord> pages;  // keyed by normalized URL
  std::vector<std::string> seeds;

  const PageRecord* find(std::string_view url) const;

  // Throws ValidationError if a seed is missing, a key disagrees with its
  // record, a URL is not normalized, or a latency is negative.
  void validate() const;

  bool operator==(const GraphSnapshot&) const = default;
};

// Simulated time. Only sim_fetch moves it forward.
class VirtualClock {
 public:
  std::int64_t now_ms() const noexcept { return now_ms_; }

 private:
  friend const PageRecord* sim_fetch(const GraphSnapshot&, std::string_view, VirtualClock&, std::int64_t);
  std::int64_t now_ms_ = 0;
};

// Serves `url` from the snapshot and charges its latency to the clock. A URL
// the snapshot does not hold is a dead link: the clock is charged
// `miss_penalty_ms` and nullptr is returned.
const PageRecord* sim_fetch(const GraphSnapshot& snapshot, std::string_view url, VirtualClock& clock,
                            std::int64_t miss_penalty_ms = 0);

std::string serialize_snapshot(const GraphSnapshot& snapshot);
GraphSnapshot parse_snapshot(std::string_view text);

GraphSnapshot load_snapshot(const std::filesystem::path& path);
void save_snapshot(const GraphSnapshot& snapshot, const std::filesystem::path& path);

// Hex FNV-1a digest of the canonical serialization.
std::string snapshot_id(const GraphSnapshot& snapshot);

inline constexpr std::int64_t kDefaultLatencyMs = 3600;

struct SynthParams {
  std::uint64_t rng_seed = 42;
  std::size_t n_pages = 1000;
  double relevant_fraction = 0.2;
  // Per ordered pair link probability between two cluster (relevant) pages.
  double intra_cluster_link_prob = 0.0;
  // Per ordered pair link probability for every other pair of pages.
  double cross_link_prob = 0.0;
  std::int64_t latency_ms = kDefaultLatencyMs;

  // Probabilities that give cluster pages about ten intra-cluster links and
  // every page about six other links, independent of corpus size.
  static SynthParams with_default_density(std::uint64_t seed, std::size_t n_pages, double relevant_fraction,
                                          std::int64_t latency_ms = kDefaultLatencyMs);
};

std::size_t relevant_page_count(std::size_t n_pages, double relevant_fraction);

// Planted-cluster corpus: the first seed is a cluster page, cluster pages talk
// about the topic query and link densely among themselves, links into the
// cluster carry query terms in their anchor text, and a spanning backbone
// keeps every page reachable from the seed.
GraphSnapshot synth_graph(const SynthParams& params);

}  // namespace fbench
