#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "fbench/livefetch.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <thread>
#include <unordered_set>

#include "fbench/io.hpp"

namespace fbench {

void FetchPolicy::validate() const {
  if (timeout_ms <= 0) throw ConfigError("timeout_ms must be > 0");
  if (per_host_delay_ms < 0) throw ConfigError("per_host_delay_ms must be >= 0");
  if (user_agent.empty()) throw ConfigError("user_agent must not be empty");
}

FetchPolicy FetchPolicy::with_env_overrides() const {
  FetchPolicy p = *this;
  if (const char* ua = std::getenv(kUserAgentEnv); ua != nullptr && *ua != '\0') p.user_agent = ua;
  return p;
}

// ---------------------------------------------------------------------------
// robots.txt

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; });
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Pattern match with '*' wildcards and an optional trailing '$' anchor.
bool robots_match(std::string_view pattern, std::string_view path) {
  bool anchored = !pattern.empty() && pattern.back() == '$';
  if (anchored) pattern.remove_suffix(1);
  // Classic two-pointer glob with backtracking over the last '*'.
  std::size_t p = 0, s = 0, star = std::string_view::npos, mark = 0;
  while (s < path.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = s;
    } else if (p < pattern.size() && pattern[p] == path[s]) {
      ++p;
      ++s;
    } else if (p == pattern.size() && !anchored) {
      return true;  // prefix match
    } else if (star != std::string_view::npos) {
      p = star + 1;
      s = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

struct RobotsRule {
  bool allow;
  std::string path;
};

struct RobotsGroup {
  std::vector<std::string> agents;
  std::vector<RobotsRule> rules;
};

std::vector<RobotsGroup> parse_robots(std::string_view body) {
  std::vector<RobotsGroup> groups;
  bool collecting_agents = false;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(pos, end - pos);
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    std::string key = lower(strip(line.substr(0, colon)));
    std::string_view value = strip(line.substr(colon + 1));
    if (key == "user-agent") {
      if (!collecting_agents) groups.emplace_back();
      groups.back().agents.push_back(lower(value));
      collecting_agents = true;
    } else if (key == "allow" || key == "disallow") {
      collecting_agents = false;
      if (groups.empty() || value.empty()) continue;
      groups.back().rules.push_back({key == "allow", std::string(value)});
    } else {
      collecting_agents = false;
    }
    if (end == body.size()) break;
  }
  return groups;
}

}  // namespace

bool robots_allowed(std::string_view url, std::string_view robots_body, std::string_view user_agent) {
  auto groups = parse_robots(robots_body);
  std::string ua = lower(user_agent);

  // Most specific named group wins; "*" only when nothing names us.
  std::vector<const RobotsGroup*> chosen;
  std::size_t best = 0;
  for (const auto& g : groups) {
    for (const auto& agent : g.agents) {
      if (agent == "*" || agent.empty() || ua.find(agent) == std::string::npos) continue;
      if (agent.size() > best) {
        best = agent.size();
        chosen.assign(1, &g);
      } else if (agent.size() == best) {
        chosen.push_back(&g);
      }
    }
  }
  if (chosen.empty()) {
    for (const auto& g : groups) {
      if (std::find(g.agents.begin(), g.agents.end(), "*") != g.agents.end()) chosen.push_back(&g);
    }
  }

  std::string path = url_path(url);
  std::size_t best_len = 0;
  bool verdict = true;
  bool matched = false;
  for (const auto* g : chosen) {
    for (const auto& rule : g->rules) {
      if (!robots_match(rule.path, path)) continue;
      std::size_t len = rule.path.size();
      if (!matched || len > best_len || (len == best_len && rule.allow)) {
        best_len = len;
        verdict = rule.allow;
        matched = true;
      }
    }
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Fetcher

Fetcher::Fetcher(FetchPolicy policy) : policy_(std::move(policy)) { policy_.validate(); }

Fetcher::HostState& Fetcher::host_state(const std::string& origin) {
  std::lock_guard<std::mutex> guard(hosts_lock_);
  auto& slot = hosts_[origin];
  if (!slot) slot = std::make_unique<HostState>();
  return *slot;
}

FetchResult Fetcher::fetch(const std::string& url) {
  HostState& host = host_state(url_origin(url));
  std::lock_guard<std::mutex> guard(host.lock);
  return fetch_locked(host, url);
}

FetchResult Fetcher::fetch_locked(HostState& host, const std::string& url) {
  using Clock = std::chrono::steady_clock;
  const std::string origin = url_origin(url);
  if (origin.empty()) throw ConfigError("not an absolute URL: " + url);
  const auto timeout = std::chrono::milliseconds(policy_.timeout_ms);
  const auto delay = std::chrono::milliseconds(policy_.per_host_delay_ms);

  FetchError::Kind last_kind = FetchError::Kind::Connection;
  std::string last_message;
  const std::uint32_t attempts = policy_.max_retries + 1;
  for (std::uint32_t attempt = 1; attempt <= attempts; ++attempt) {
    if (host.last_request) {
      auto ready = *host.last_request + delay;
      if (Clock::now() < ready) std::this_thread::sleep_until(ready);
    }
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_follow_location(true);
    httplib::Headers headers = {{"User-Agent", policy_.user_agent}};

    auto start = Clock::now();
    auto res = client.Get(url_path(url), headers);
    auto finish = Clock::now();
    // Pacing counts from the end of the exchange, so the next request to this
    // host cannot arrive sooner than `delay` after this one was served.
    host.last_request = finish;
    auto elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(finish - start).count();

    if (res) {
      if (res->status >= 500 && attempt < attempts) {
        last_kind = FetchError::Kind::TooManyRetries;
        continue;
      }
      if (res->status >= 500) {
        throw FetchError(FetchError::Kind::TooManyRetries, attempt,
                         url + ": server error " + std::to_string(res->status) + " after " +
                             std::to_string(attempt) + " attempts");
      }
      FetchResult out;
      out.status = res->status;
      out.body = std::move(res->body);
      out.elapsed_ms = std::max<std::int64_t>(1, (elapsed_us + 999) / 1000);
      return out;
    }
    auto err = res.error();
    bool timed_out = err == httplib::Error::ConnectionTimeout ||
                     ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                      finish - start >= timeout - std::chrono::milliseconds(50));
    last_kind = timed_out ? FetchError::Kind::Timeout : FetchError::Kind::Connection;
    last_message = httplib::to_string(err);
  }
  throw FetchError(last_kind, attempts,
                   url + ": " + (last_kind == FetchError::Kind::Timeout ? "timed out" : last_message) + " after " +
                       std::to_string(attempts) + " attempts");
}

bool Fetcher::allowed(const std::string& url) {
  if (!policy_.obey_robots) return true;
  const std::string origin = url_origin(url);
  HostState& host = host_state(origin);
  std::lock_guard<std::mutex> guard(host.lock);
  if (!host.robots) {
    try {
      auto res = fetch_locked(host, origin + "/robots.txt");
      if (res.status == 200) {
        host.robots = std::move(res.body);
      } else if (res.status >= 400 && res.status < 500) {
        host.robots = std::string();
      } else {
        host.robots = std::string("User-agent: *\nDisallow: /\n");
      }
    } catch (const FetchError&) {
      // An unreachable robots file means the host may not be crawled at all.
      host.robots = std::string("User-agent: *\nDisallow: /\n");
    }
  }
  return robots_allowed(url, *host.robots, policy_.user_agent);
}

// ---------------------------------------------------------------------------
// Ingestion

GraphSnapshot run_live_crawl(Fetcher& fetcher, const IngestConfig& config, const std::filesystem::path& out) {
  if (config.max_pages < 1) throw ConfigError("max_pages must be >= 1");
  if (config.seeds.empty()) throw ConfigError("at least one seed URL is required");

  GraphSnapshot snap;
  snap.topic_query = config.topic_query;
  std::deque<std::string> queue;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> seed_set;
  for (const auto& raw : config.seeds) {
    auto seed = normalize_url(raw);
    if (!seed) throw ConfigError("seed is not an absolute http(s) URL: " + raw);
    if (seen.insert(*seed).second) {
      queue.push_back(*seed);
      seed_set.insert(*seed);
    }
  }

  std::string last_error;
  while (!queue.empty() && snap.pages.size() < config.max_pages) {
    std::string url = std::move(queue.front());
    queue.pop_front();
    if (!fetcher.allowed(url)) continue;
    FetchResult res;
    try {
      res = fetcher.fetch(url);
    } catch (const FetchError& e) {
      last_error = e.what();
      continue;
    }
    if (res.status != 200) {
      last_error = url + ": HTTP " + std::to_string(res.status);
      continue;
    }
    for (const auto& link : parse_links(res.body, url, 0)) {
      if (seen.insert(link.target).second) queue.push_back(link.target);
    }
    PageRecord page;
    page.url = url;
    page.html = std::move(res.body);
    page.latency_ms = res.elapsed_ms;
    if (seed_set.contains(url)) snap.seeds.push_back(url);
    snap.pages.emplace(url, std::move(page));
  }

  if (snap.seeds.empty()) {
    throw IoError("no seed page could be fetched" + (last_error.empty() ? std::string() : " (" + last_error + ")"));
  }
  save_snapshot(snap, out);
  return snap;
}

}  // namespace fbench
