#include "fbench/oracle.hpp"

#include <algorithm>

#include "fbench/error.hpp"

namespace fbench {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; });
  return out;
}

}  // namespace

RelevanceOracle RelevanceOracle::url_rule(std::string substring) {
  RelevanceOracle o;
  o.mode = Mode::UrlRule;
  o.rule_substring = std::move(substring);
  return o;
}

RelevanceOracle RelevanceOracle::parse(std::string_view text) {
  if (text == "labels") return labels();
  constexpr std::string_view kPrefix = "url_rule:";
  if (text.starts_with(kPrefix) && text.size() > kPrefix.size()) {
    return url_rule(std::string(text.substr(kPrefix.size())));
  }
  throw ConfigError("oracle must be 'labels' or 'url_rule:<substring>', got '" + std::string(text) + "'");
}

std::string RelevanceOracle::to_string() const {
  return mode == Mode::Labels ? "labels" : "url_rule:" + rule_substring;
}

bool oracle_label(const RelevanceOracle& oracle, std::string_view url, const PageRecord& record) {
  if (oracle.mode == RelevanceOracle::Mode::UrlRule) {
    return lowercase(url).find(lowercase(oracle.rule_substring)) != std::string::npos;
  }
  if (!record.label) throw ValidationError("no relevance label for " + std::string(url));
  return *record.label;
}

std::size_t count_relevant(const RelevanceOracle& oracle, const GraphSnapshot& snapshot) {
  std::size_t n = 0;
  for (const auto& [url, page] : snapshot.pages) {
    if (oracle.mode == RelevanceOracle::Mode::Labels) {
      n += page.label.value_or(false) ? 1 : 0;
    } else {
      n += oracle_label(oracle, url, page) ? 1 : 0;
    }
  }
  return n;
}

RelevanceOracle default_oracle_for(const GraphSnapshot& snapshot) {
  bool all_labeled = !snapshot.pages.empty() &&
                     std::all_of(snapshot.pages.begin(), snapshot.pages.end(),
                                 [](const auto& kv) { return kv.second.label.has_value(); });
  return all_labeled ? RelevanceOracle::labels() : RelevanceOracle::url_rule("wiki");
}

}  // namespace fbench
