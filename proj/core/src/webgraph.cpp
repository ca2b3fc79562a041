#include "fbench/webgraph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "fbench/io.hpp"
#include "base64.hpp"
#include "fbench/error.hpp"
#include "rng.hpp"

namespace fbench {

using ordered_json = nlohmann::ordered_json;

const PageRecord* GraphSnapshot::find(std::string_view url) const {
  auto it = pages.find(std::string(url));
  return it == pages.end() ? nullptr : &it->second;
}

void GraphSnapshot::validate() const {
  for (const auto& [key, page] : pages) {
    if (key != page.url) throw ValidationError("page key " + key + " does not match record URL " + page.url);
    if (!is_normalized_url(key)) throw ValidationError("URL is not normalized: " + key);
    if (page.latency_ms < 0) throw ValidationError("negative latency for " + key);
  }
  for (const auto& seed : seeds) {
    if (!pages.contains(seed)) throw ValidationError("seed not in snapshot: " + seed);
  }
}

const PageRecord* sim_fetch(const GraphSnapshot& snapshot, std::string_view url, VirtualClock& clock,
                            std::int64_t miss_penalty_ms) {
  const PageRecord* page = snapshot.find(url);
  clock.now_ms_ += page ? page->latency_ms : std::max<std::int64_t>(0, miss_penalty_ms);
  return page;
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

Tokens split_spaces(std::string_view s) {
  Tokens out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

template <typename T>
T require(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field \"") + key + "\" has the wrong type", line);
  }
}

}  // namespace

std::string serialize_snapshot(const GraphSnapshot& snapshot) {
  ordered_json header;
  header["format_version"] = snapshot.format_version;
  header["topic_query"] = join(snapshot.topic_query);
  header["seeds"] = snapshot.seeds;
  std::string out = dump_line(header);
  out += '\n';
  // std::map iteration is already sorted by URL.
  for (const auto& [url, page] : snapshot.pages) {
    ordered_json rec;
    rec["url"] = page.url;
    rec["latency_ms"] = page.latency_ms;
    if (page.label) {
      rec["label"] = *page.label;
    } else {
      rec["label"] = nullptr;
    }
    rec["html_b64"] = detail::base64_encode(page.html);
    out += dump_line(rec);
    out += '\n';
  }
  return out;
}

GraphSnapshot parse_snapshot(std::string_view text) {
  GraphSnapshot snap;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);

    if (!have_header) {
      snap.format_version = require<int>(obj, "format_version", line_no);
      if (snap.format_version != kSnapshotFormatVersion) {
        throw ParseError("unsupported format_version " + std::to_string(snap.format_version), line_no);
      }
      snap.topic_query = split_spaces(require<std::string>(obj, "topic_query", line_no));
      snap.seeds = require<std::vector<std::string>>(obj, "seeds", line_no);
      have_header = true;
      continue;
    }

    PageRecord page;
    page.url = require<std::string>(obj, "url", line_no);
    page.latency_ms = require<std::int64_t>(obj, "latency_ms", line_no);
    auto label = obj.find("label");
    if (label == obj.end()) throw ParseError("missing field \"label\"", line_no);
    if (label->is_boolean()) {
      page.label = label->get<bool>();
    } else if (!label->is_null()) {
      throw ParseError("field \"label\" must be true, false or null", line_no);
    }
    auto html = detail::base64_decode(require<std::string>(obj, "html_b64", line_no));
    if (!html) throw ParseError("field \"html_b64\" is not valid base64", line_no);
    page.html = std::move(*html);

    if (!is_normalized_url(page.url)) throw ParseError("URL is not normalized absolute: " + page.url, line_no);
    if (page.latency_ms < 0) throw ParseError("negative latency_ms", line_no);
    if (snap.pages.contains(page.url)) throw ValidationError("line " + std::to_string(line_no) + ": duplicate URL " + page.url);
    std::string key = page.url;
    snap.pages.emplace(std::move(key), std::move(page));
  }
  if (!have_header) throw ParseError("missing header line", 1);
  for (const auto& seed : snap.seeds) {
    if (!snap.pages.contains(seed)) throw ValidationError("seed not in snapshot: " + seed);
  }
  return snap;
}

GraphSnapshot load_snapshot(const std::filesystem::path& path) { return parse_snapshot(read_file(path)); }

void save_snapshot(const GraphSnapshot& snapshot, const std::filesystem::path& path) {
  snapshot.validate();
  write_file_atomic(path, serialize_snapshot(snapshot));
}

std::string snapshot_id(const GraphSnapshot& snapshot) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(content_checksum(serialize_snapshot(snapshot))));
  return buf;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

std::size_t relevant_page_count(std::size_t n_pages, double relevant_fraction) {
  double exact = relevant_fraction * static_cast<double>(n_pages);
  double nearest = std::round(exact);
  // Absorb representation error so 0.7 * 10 counts as 7, not 8.
  double count = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
  return std::min(n_pages, static_cast<std::size_t>(count));
}

SynthParams SynthParams::with_default_density(std::uint64_t seed, std::size_t n_pages, double relevant_fraction,
                                              std::int64_t latency_ms) {
  SynthParams p;
  p.rng_seed = seed;
  p.n_pages = n_pages;
  p.relevant_fraction = relevant_fraction;
  p.latency_ms = latency_ms;
  std::size_t cluster = relevant_page_count(n_pages, relevant_fraction);
  p.intra_cluster_link_prob = cluster > 1 ? std::min(1.0, 10.0 / static_cast<double>(cluster - 1)) : 0.0;
  p.cross_link_prob = n_pages > 1 ? std::min(1.0, 6.0 / static_cast<double>(n_pages - 1)) : 0.0;
  return p;
}

namespace {

constexpr std::array<std::string_view, 3> kQueryTerms = {"solar", "energy", "storage"};
constexpr std::array<std::string_view, 16> kTopicTerms = {
    "battery", "photovoltaic", "inverter", "grid",    "panel",   "turbine", "renewable", "wind",
    "charge",  "voltage",      "kilowatt", "silicon", "thermal", "hydrogen", "lithium",  "capacity"};

// Pronounceable filler words built from a fixed syllable table.
std::vector<std::string> filler_vocabulary() {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::vector<std::string> words;
  for (std::size_t i = 0; words.size() < 400; ++i) {
    std::size_t x = i;
    std::string w;
    for (int s = 0; s < 3; ++s) {
      w += kOnsets[x % kOnsets.size()];
      x /= kOnsets.size();
      w += kVowels[(x + static_cast<std::size_t>(s)) % kVowels.size()];
    }
    if (!is_stop_word(w)) words.push_back(std::move(w));
  }
  return words;
}

class PageWriter {
 public:
  PageWriter(detail::Rng& rng, const std::vector<std::string>& filler) : rng_(rng), filler_(filler) {}

  std::string_view filler() { return filler_[rng_.below(filler_.size())]; }
  std::string_view topic() { return kTopicTerms[rng_.below(kTopicTerms.size())]; }
  std::string_view query() { return kQueryTerms[rng_.below(kQueryTerms.size())]; }

  std::string_view body_word(bool cluster) {
    double u = rng_.uniform();
    if (cluster) {
      if (u < 0.15) return query();
      if (u < 0.35) return topic();
      return filler();
    }
    if (u < 0.01) return query();
    if (u < 0.03) return topic();
    return filler();
  }

  void words(std::string& out, std::size_t n, bool cluster) {
    for (std::size_t i = 0; i < n; ++i) {
      out += ' ';
      out += body_word(cluster);
    }
  }

 private:
  detail::Rng& rng_;
  const std::vector<std::string>& filler_;
};

std::string page_path(std::size_t index, int width) {
  std::string digits = std::to_string(index);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return "/p/" + digits;
}

// Appends each target of `group` (skipping `self`) independently with
// probability p, using geometric skips instead of one draw per pair.
void sample_links(detail::Rng& rng, const std::vector<std::uint32_t>& group, double p, std::uint32_t self,
                  std::vector<std::uint32_t>& out) {
  if (p <= 0.0 || group.empty()) return;
  std::uint64_t i = rng.geometric_skip(p);
  while (i < group.size()) {
    if (group[i] != self) out.push_back(group[i]);
    i += 1 + rng.geometric_skip(p);
  }
}

}  // namespace

GraphSnapshot synth_graph(const SynthParams& params) {
  if (params.n_pages < 1) throw ConfigError("synth_graph: n_pages must be >= 1");
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(params.relevant_fraction)) throw ConfigError("synth_graph: relevant_fraction must be in [0,1]");
  if (!in_unit(params.intra_cluster_link_prob) || !in_unit(params.cross_link_prob)) {
    throw ConfigError("synth_graph: link probabilities must be in [0,1]");
  }
  if (params.latency_ms < 0) throw ConfigError("synth_graph: latency_ms must be >= 0");
  if (params.n_pages > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("synth_graph: too many pages");

  const std::size_t n = params.n_pages;
  const std::size_t cluster_size = relevant_page_count(n, params.relevant_fraction);
  detail::Rng rng(params.rng_seed);

  // Page 0 is the seed and belongs to the cluster whenever the cluster is
  // non-empty; the rest of the cluster is a uniform sample.
  std::vector<bool> relevant(n, false);
  {
    std::vector<std::uint32_t> rest;
    for (std::uint32_t i = 1; i < n; ++i) rest.push_back(i);
    for (std::size_t k = 0; k + 1 < cluster_size; ++k) {
      std::size_t j = k + rng.below(rest.size() - k);
      std::swap(rest[k], rest[j]);
      relevant[rest[k]] = true;
    }
    if (cluster_size > 0) relevant[0] = true;
  }
  std::vector<std::uint32_t> cluster;
  std::vector<std::uint32_t> everyone;
  std::vector<std::uint32_t> background;
  for (std::uint32_t i = 0; i < n; ++i) {
    everyone.push_back(i);
    (relevant[i] ? cluster : background).push_back(i);
  }

  std::vector<std::vector<std::uint32_t>> links(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (relevant[s]) {
      sample_links(rng, cluster, params.intra_cluster_link_prob, s, links[s]);
      sample_links(rng, background, params.cross_link_prob, s, links[s]);
    } else {
      sample_links(rng, everyone, params.cross_link_prob, s, links[s]);
    }
  }

  // Spanning backbone: attach every page to an already placed page of its own
  // class. The first background page hangs off the seed so the seed always
  // has at least one off-topic child.
  {
    std::vector<std::uint32_t> order(everyone.begin() + 1, everyone.end());
    rng.shuffle(order.begin(), order.end());
    std::vector<std::uint32_t> placed_cluster;
    std::vector<std::uint32_t> placed_background;
    (relevant[0] ? placed_cluster : placed_background).push_back(0);
    for (std::uint32_t v : order) {
      std::uint32_t parent;
      if (relevant[v]) {
        parent = placed_cluster[rng.below(placed_cluster.size())];
        placed_cluster.push_back(v);
      } else {
        parent = placed_background.empty() ? 0 : placed_background[rng.below(placed_background.size())];
        placed_background.push_back(v);
      }
      links[parent].push_back(v);
    }
  }

  const auto filler = filler_vocabulary();
  PageWriter writer(rng, filler);
  int width = 4;
  for (std::size_t x = n; x >= 10000; x /= 10) ++width;
  const std::string origin = "https://synth.example";

  GraphSnapshot snap;
  snap.topic_query.assign(kQueryTerms.begin(), kQueryTerms.end());
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& out = links[i];
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    rng.shuffle(out.begin(), out.end());

    const bool on_topic = relevant[i];
    std::string html = "<!DOCTYPE html>\n<html><head><title>Page " + std::to_string(i);
    writer.words(html, 3, on_topic);
    html += "</title></head>\n<body>\n<p>";
    writer.words(html, 40, on_topic);
    html += "</p>\n";
    for (std::uint32_t target : out) {
      html += "<p>";
      writer.words(html, 3, on_topic);
      html += " <a href=\"" + page_path(target, width) + "\">";
      if (relevant[target]) {
        html += writer.query();
        html += ' ';
        html += writer.topic();
      } else {
        html += writer.filler();
        html += ' ';
        html += writer.filler();
      }
      html += "</a>";
      writer.words(html, 3, on_topic);
      html += "</p>\n";
    }
    html += "</body></html>\n";

    PageRecord page;
    page.url = origin + page_path(i, width);
    page.html = std::move(html);
    page.latency_ms = params.latency_ms;
    page.label = on_topic;
    std::string key = page.url;
    snap.pages.emplace(std::move(key), std::move(page));
  }
  snap.seeds.push_back(origin + page_path(0, width));
  return snap;
}

}  // namespace fbench
