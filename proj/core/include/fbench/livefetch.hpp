#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbench/error.hpp"
#include "fbench/extract.hpp"
#include "fbench/webgraph.hpp"

namespace fbench {

// Environment variable that overrides FetchPolicy::user_agent.
inline constexpr const char* kUserAgentEnv = "FRONTIER_BENCH_UA";

struct FetchPolicy {
  std::string user_agent = "frontier-bench/1.0";
  std::int64_t per_host_delay_ms = 1000;
  std::int64_t timeout_ms = 10000;
  std::uint32_t max_retries = 2;
  bool obey_robots = true;

  void validate() const;
  // Copy of this policy with the FRONTIER_BENCH_UA override applied.
  FetchPolicy with_env_overrides() const;
};

struct FetchResult {
  int status = 0;
  std::string body;
  std::int64_t elapsed_ms = 0;
};

class FetchError : public Error {
 public:
  enum class Kind { Timeout, Connection, TooManyRetries };

  FetchError(Kind kind, std::uint32_t attempts, const std::string& what)
      : Error(what), kind_(kind), attempts_(attempts) {}

  Kind kind() const noexcept { return kind_; }
  std::uint32_t attempts() const noexcept { return attempts_; }

 private:
  Kind kind_;
  std::uint32_t attempts_;
};

// Robots exclusion check: the most specific matching user-agent group (falling
// back to "*") decides by longest matching Allow/Disallow path, Allow winning
// ties. An empty or unparseable file allows everything.
bool robots_allowed(std::string_view url, std::string_view robots_body, std::string_view user_agent);

// Polite HTTP client for snapshot ingestion. Requests to one host are
// serialized and spaced at least per_host_delay_ms apart; different hosts
// may be fetched from different threads concurrently.
class Fetcher {
 public:
  explicit Fetcher(FetchPolicy policy);

  const FetchPolicy& policy() const noexcept { return policy_; }

  // GET with retries on transport failures and 5xx replies.
  FetchResult fetch(const std::string& url);

  // Robots decision for `url`, fetching and caching the host's robots file on
  // first use. Always true when the policy does not obey robots.
  bool allowed(const std::string& url);

 private:
  struct HostState {
    std::mutex lock;
    std::optional<std::chrono::steady_clock::time_point> last_request;
    std::optional<std::string> robots;
  };

  HostState& host_state(const std::string& origin);
  FetchResult fetch_locked(HostState& host, const std::string& url);

  FetchPolicy policy_;
  std::mutex hosts_lock_;
  std::map<std::string, std::unique_ptr<HostState>> hosts_;
};

struct IngestConfig {
  std::vector<std::string> seeds;
  std::size_t max_pages = 1000;
  Tokens topic_query;
};

// Breadth-first ingestion of live pages into a snapshot written to `out`.
// Only 200 responses are stored; failing and robots-excluded URLs are skipped.
// Throws IoError without touching `out` when no seed could be fetched.
GraphSnapshot run_live_crawl(Fetcher& fetcher, const IngestConfig& config, const std::filesystem::path& out);

}  // namespace fbench
