#pragma once

#include <string>
#include <string_view>

#include "fbench/webgraph.hpp"

namespace fbench {

// Ground truth for "is this page relevant?". Either the snapshot's stored
// labels, or a case-insensitive substring test on the URL.
struct RelevanceOracle {
  enum class Mode { Labels, UrlRule };

  Mode mode = Mode::Labels;
  std::string rule_substring;

  static RelevanceOracle labels() { return {}; }
  static RelevanceOracle url_rule(std::string substring);

  // "labels" or "url_rule:<substring>".
  static RelevanceOracle parse(std::string_view text);
  std::string to_string() const;
};

// Throws ValidationError naming the URL when labels mode meets an unlabeled page.
bool oracle_label(const RelevanceOracle& oracle, std::string_view url, const PageRecord& record);

// Number of snapshot pages the oracle calls relevant.
std::size_t count_relevant(const RelevanceOracle& oracle, const GraphSnapshot& snapshot);

// Labels when every page carries one, otherwise the "wiki" URL rule.
RelevanceOracle default_oracle_for(const GraphSnapshot& snapshot);

}  // namespace fbench
