#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbench {

using Tokens = std::vector<std::string>;

// An outlink found on a fetched page.
struct LinkCandidate {
  std::string target;  // normalized absolute URL
  Tokens anchor_text;
  Tokens context;      // tokens on both sides of the anchor, anchor excluded
  std::string source;
  std::uint32_t depth = 1;

  bool operator==(const LinkCandidate&) const = default;
};

struct Document {
  std::string url;
  Tokens tokens;
  std::uint64_t checksum = 0;
};

inline constexpr std::size_t kDefaultContextWindow = 8;

// Version tag of the embedded stop-word list. Bump whenever the list changes,
// since tokenization output depends on it.
inline constexpr std::string_view kStopWordsVersion = "en-318-v1";

bool is_stop_word(std::string_view token);

// Canonical form of an absolute http(s) URL: lowercase scheme and host,
// default port removed, dot segments removed, fragment dropped, "/" for an
// empty path. Returns nullopt for anything that is not an absolute http(s)
// URL with a host.
std::optional<std::string> normalize_url(std::string_view url);

bool is_normalized_url(std::string_view url);

// Resolves an href found on `base`. Accepts absolute http(s) hrefs,
// scheme-relative ("//host/x") and root-relative ("/x") references. Bare
// fragments, other schemes and path-relative references yield nullopt.
std::optional<std::string> resolve_url(std::string_view base, std::string_view href);

// Scheme plus authority of a normalized URL, e.g. "https://host:8080".
std::string url_origin(std::string_view url);
std::string url_host(std::string_view url);
// Path plus query, e.g. "/a/b?x=1".
std::string url_path(std::string_view url);

// Markup stripped, split on non-alphabetic runs, lowercased, stop-words removed.
Tokens normalize_text(std::string_view html);

// Same tokenization applied to plain text (no markup handling).
Tokens tokenize_plain(std::string_view text);

std::vector<LinkCandidate> parse_links(std::string_view html, std::string_view base,
                                       std::size_t context_window = kDefaultContextWindow,
                                       std::uint32_t source_depth = 0);

// 64-bit FNV-1a over the raw bytes.
std::uint64_t content_checksum(std::string_view bytes);

inline constexpr std::uint64_t kEmptyChecksum = 0xcbf29ce484222325ULL;

Document make_document(std::string url, std::string_view html);

}  // namespace fbench
