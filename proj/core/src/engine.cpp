#include "fbench/engine.hpp"

#include <optional>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fbench/io.hpp"
#include "fbench/error.hpp"

namespace fbench {

using ordered_json = nlohmann::ordered_json;

void CrawlConfig::validate() const {
  if (max_pages < 1) throw ConfigError("max_pages must be >= 1");
  if (time_budget_ms < 0) throw ConfigError("time_budget_ms must be >= 0");
  if (!(nb_threshold >= 0.0 && nb_threshold <= 1.0)) throw ConfigError("nb_threshold must be in [0,1]");
  if (miss_penalty_ms < 0) throw ConfigError("miss_penalty_ms must be >= 0");
  if (priority.parent < 0.0 || priority.anchor < 0.0 || priority.parent + priority.anchor > 1.0 + 1e-12) {
    throw ConfigError("priority weights must be non-negative and sum to at most 1");
  }
  shark.validate();
}

bool CrawlConfig::operator==(const CrawlConfig& o) const {
  return strategy == o.strategy && max_pages == o.max_pages && time_budget_ms == o.time_budget_ms &&
         max_depth == o.max_depth && shark.delta == o.shark.delta && shark.gamma == o.shark.gamma &&
         shark.beta == o.shark.beta && priority.parent == o.priority.parent &&
         priority.anchor == o.priority.anchor && nb_threshold == o.nb_threshold &&
         context_window == o.context_window && query == o.query && miss_penalty_ms == o.miss_penalty_ms;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::PageBudget: return "page_budget";
    case StopReason::TimeBudget: return "time_budget";
    case StopReason::FrontierExhausted: return "frontier_exhausted";
  }
  return "?";
}

StopReason parse_stop_reason(std::string_view text) {
  for (auto r : {StopReason::PageBudget, StopReason::TimeBudget, StopReason::FrontierExhausted}) {
    if (to_string(r) == text) return r;
  }
  throw ParseError("unknown stop_reason '" + std::string(text) + "'");
}

namespace {

std::string join(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

Tokens effective_query(const GraphSnapshot& snapshot, const CrawlConfig& config) {
  return tokenize_plain(join(config.query.empty() ? snapshot.topic_query : config.query));
}

std::vector<Document> bootstrap_documents(const GraphSnapshot& snapshot, const CrawlConfig& config) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::vector<const PageRecord*> seeds;
  for (const auto& url : snapshot.seeds) {
    const PageRecord* page = snapshot.find(url);
    if (page && seen.insert(url).second) {
      seeds.push_back(page);
      docs.push_back(make_document(url, page->html));
    }
  }
  for (const PageRecord* seed : seeds) {
    for (const auto& link : parse_links(seed->html, seed->url, config.context_window)) {
      const PageRecord* child = snapshot.find(link.target);
      if (child && seen.insert(link.target).second) docs.push_back(make_document(link.target, child->html));
    }
  }
  return docs;
}

namespace {

SimilarityEngine similarity_from(const std::vector<Document>& docs, Tokens query) {
  std::vector<Tokens> corpus;
  corpus.reserve(docs.size() + 1);
  corpus.push_back(query);
  for (const auto& d : docs) corpus.push_back(d.tokens);
  return SimilarityEngine(vocab_fit(corpus), std::move(query));
}

}  // namespace

SimilarityEngine make_similarity_engine(const GraphSnapshot& snapshot, const CrawlConfig& config) {
  return similarity_from(bootstrap_documents(snapshot, config), effective_query(snapshot, config));
}

NBModel train_bootstrap_model(const GraphSnapshot& snapshot, const CrawlConfig& config,
                              const RelevanceOracle& oracle, double alpha) {
  auto docs = bootstrap_documents(snapshot, config);
  std::vector<LabeledDoc> labeled;
  std::vector<Tokens> corpus;
  for (const auto& d : docs) {
    labeled.push_back({d.tokens, oracle_label(oracle, d.url, *snapshot.find(d.url))});
    corpus.push_back(d.tokens);
  }
  if (corpus.empty()) throw ConfigError("nb strategy: snapshot has no seed pages to train on");
  try {
    return nb_train(labeled, alpha, vocab_fit(corpus));
  } catch (const ValidationError&) {
    throw ConfigError(
        "nb strategy: the seed pages and their children must include both relevant and irrelevant pages "
        "to train the classifier (or pass a trained model)");
  }
}

namespace {

// Turns a fetched page's outlinks into frontier entries according to the
// strategy's scoring rule.
class LinkScorer {
 public:
  LinkScorer(const GraphSnapshot& snapshot, const CrawlConfig& config, const NBModel* model)
      : config_(config), model_(model) {
    if (config.strategy == StrategyKind::Shark || config.strategy == StrategyKind::Priority) {
      engine_.emplace(make_similarity_engine(snapshot, config));
    }
  }

  // Appends entries for `links`; returns without pushing anything when the
  // strategy declines to follow the page.
  void score(const FrontierEntry& parent, const Tokens& parent_tokens, const std::vector<LinkCandidate>& links,
             const std::unordered_set<std::string>& visited, std::vector<FrontierEntry>& out) const {
    double parent_value = 0.0;
    switch (config_.strategy) {
      case StrategyKind::Shark:
      case StrategyKind::Priority:
        parent_value = engine_->similarity(parent_tokens);
        break;
      case StrategyKind::Nb: {
        auto decision = nb_link_admit(nb_posterior(*model_, parent_tokens), config_.nb_threshold);
        if (!decision.admit) return;
        parent_value = decision.score;
        break;
      }
      default:
        break;
    }
    for (const auto& link : links) {
      if (visited.contains(link.target)) continue;
      FrontierEntry e;
      e.target = link.target;
      e.depth = link.depth;
      switch (config_.strategy) {
        case StrategyKind::Shark: {
          double anchor = engine_->similarity(link.anchor_text);
          double context = anchor > 0.0 ? 0.0 : engine_->similarity(link.context);
          auto s = shark_score(parent_value, parent.inherited, anchor, context, config_.shark);
          e.score = s.potential;
          e.inherited = s.child_inherited;
          break;
        }
        case StrategyKind::Priority:
          e.score = priority_score(parent_value, engine_->similarity(link.anchor_text), config_.priority);
          break;
        case StrategyKind::Nb:
          e.score = parent_value;
          break;
        default:
          break;
      }
      out.push_back(std::move(e));
    }
  }

 private:
  const CrawlConfig& config_;
  const NBModel* model_;
  std::optional<SimilarityEngine> engine_;
};

}  // namespace

CrawlTrace crawl(const GraphSnapshot& snapshot, const CrawlConfig& config, const RelevanceOracle& oracle,
                 const NBModel* nb_model, std::string snapshot_digest) {
  config.validate();
  if (snapshot.seeds.empty()) throw ConfigError("snapshot has no seed URLs");
  if (config.strategy == StrategyKind::Nb && nb_model == nullptr) {
    throw ConfigError("nb strategy requires a trained naive-Bayes model");
  }
  if ((config.strategy == StrategyKind::Shark || config.strategy == StrategyKind::Priority) &&
      effective_query(snapshot, config).empty()) {
    throw ConfigError("strategy " + std::string(to_string(config.strategy)) + " requires a topic query");
  }

  CrawlTrace trace;
  trace.config = config;
  trace.snapshot_id = snapshot_digest.empty() ? snapshot_id(snapshot) : std::move(snapshot_digest);

  LinkScorer scorer(snapshot, config, nb_model);
  Frontier frontier(config.strategy);
  VirtualClock clock;
  std::unordered_set<std::string> visited;
  std::unordered_set<std::uint64_t> seen_content;

  {
    std::unordered_set<std::string> seeded;
    for (const auto& seed : snapshot.seeds) {
      if (!seeded.insert(seed).second) continue;
      FrontierEntry e;
      e.target = seed;
      e.score = 1.0;
      frontier.push(std::move(e));
    }
  }

  std::vector<FrontierEntry> batch;
  while (true) {
    if (trace.visits.size() >= config.max_pages) {
      trace.stop_reason = StopReason::PageBudget;
      break;
    }
    auto entry = frontier.pop();
    if (!entry) {
      trace.stop_reason = StopReason::FrontierExhausted;
      break;
    }
    if (visited.contains(entry->target)) continue;

    const PageRecord* known = snapshot.find(entry->target);
    std::int64_t cost = known ? known->latency_ms : config.miss_penalty_ms;
    if (clock.now_ms() + cost > config.time_budget_ms) {
      trace.stop_reason = StopReason::TimeBudget;
      break;
    }
    visited.insert(entry->target);
    const PageRecord* page = sim_fetch(snapshot, entry->target, clock, config.miss_penalty_ms);
    if (page == nullptr) continue;  // dead link

    VisitRecord visit;
    visit.step = trace.visits.size() + 1;
    visit.url = page->url;
    visit.virtual_time_ms = clock.now_ms();
    visit.duplicate_content = !seen_content.insert(content_checksum(page->html)).second;
    visit.relevant = oracle_label(oracle, page->url, *page);

    if (entry->depth < config.max_depth) {
      auto links = parse_links(page->html, page->url, config.context_window, entry->depth);
      Tokens tokens;
      if (config.strategy != StrategyKind::Bfs && config.strategy != StrategyKind::Dfs) {
        tokens = normalize_text(page->html);
      }
      batch.clear();
      scorer.score(*entry, tokens, links, visited, batch);
      frontier.push(batch);
    }
    visit.frontier_size = frontier.size();
    visit.visited_size = visited.size();
    trace.visits.push_back(std::move(visit));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Trace file

namespace {

ordered_json config_json(const CrawlConfig& c) {
  ordered_json j;
  j["strategy"] = std::string(to_string(c.strategy));
  j["max_pages"] = c.max_pages;
  j["time_budget_ms"] = c.time_budget_ms;
  j["max_depth"] = c.max_depth;
  j["shark"] = ordered_json{{"delta", c.shark.delta}, {"gamma", c.shark.gamma}, {"beta", c.shark.beta}};
  j["priority"] = ordered_json{{"parent", c.priority.parent}, {"anchor", c.priority.anchor}};
  j["nb_threshold"] = c.nb_threshold;
  j["context_window"] = c.context_window;
  j["query"] = join(c.query);
  j["miss_penalty_ms"] = c.miss_penalty_ms;
  return j;
}

template <typename T>
T field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field \"") + key + "\" has the wrong type", line);
  }
}

CrawlConfig config_from_json(const nlohmann::json& j, std::size_t line) {
  CrawlConfig c;
  try {
    c.strategy = parse_strategy(field<std::string>(j, "strategy", line));
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line);
  }
  c.max_pages = field<std::size_t>(j, "max_pages", line);
  c.time_budget_ms = field<std::int64_t>(j, "time_budget_ms", line);
  c.max_depth = field<std::uint32_t>(j, "max_depth", line);
  auto shark = field<nlohmann::json>(j, "shark", line);
  c.shark.delta = field<double>(shark, "delta", line);
  c.shark.gamma = field<double>(shark, "gamma", line);
  c.shark.beta = field<double>(shark, "beta", line);
  auto prio = field<nlohmann::json>(j, "priority", line);
  c.priority.parent = field<double>(prio, "parent", line);
  c.priority.anchor = field<double>(prio, "anchor", line);
  c.nb_threshold = field<double>(j, "nb_threshold", line);
  c.context_window = field<std::size_t>(j, "context_window", line);
  c.query = tokenize_plain(field<std::string>(j, "query", line));
  c.miss_penalty_ms = field<std::int64_t>(j, "miss_penalty_ms", line);
  return c;
}

}  // namespace

std::string serialize_trace(const CrawlTrace& trace) {
  ordered_json header;
  header["config"] = config_json(trace.config);
  header["snapshot_id"] = trace.snapshot_id;
  header["stop_reason"] = std::string(to_string(trace.stop_reason));
  std::string out = header.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  out += '\n';
  for (const auto& v : trace.visits) {
    ordered_json rec;
    rec["step"] = v.step;
    rec["url"] = v.url;
    rec["virtual_time_ms"] = v.virtual_time_ms;
    rec["relevant"] = v.relevant;
    rec["duplicate_content"] = v.duplicate_content;
    rec["frontier_size"] = v.frontier_size;
    rec["visited_size"] = v.visited_size;
    out += rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

CrawlTrace parse_trace(std::string_view text) {
  CrawlTrace trace;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!header) {
      trace.config = config_from_json(field<nlohmann::json>(obj, "config", line_no), line_no);
      trace.snapshot_id = field<std::string>(obj, "snapshot_id", line_no);
      try {
        trace.stop_reason = parse_stop_reason(field<std::string>(obj, "stop_reason", line_no));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
      header = true;
      continue;
    }
    VisitRecord v;
    v.step = field<std::uint64_t>(obj, "step", line_no);
    v.url = field<std::string>(obj, "url", line_no);
    v.virtual_time_ms = field<std::int64_t>(obj, "virtual_time_ms", line_no);
    v.relevant = field<bool>(obj, "relevant", line_no);
    v.duplicate_content = field<bool>(obj, "duplicate_content", line_no);
    v.frontier_size = field<std::uint64_t>(obj, "frontier_size", line_no);
    v.visited_size = field<std::uint64_t>(obj, "visited_size", line_no);
    if (v.step != trace.visits.size() + 1) throw ParseError("steps must be consecutive from 1", line_no);
    if (!trace.visits.empty() && v.virtual_time_ms < trace.visits.back().virtual_time_ms) {
      throw ParseError("virtual_time_ms decreased", line_no);
    }
    trace.visits.push_back(std::move(v));
  }
  if (!header) throw ParseError("missing header line", 1);
  return trace;
}

void save_trace(const CrawlTrace& trace, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_trace(trace));
}

CrawlTrace load_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

}  // namespace fbench
