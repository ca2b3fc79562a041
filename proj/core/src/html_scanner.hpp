#pragma once

// Lenient, allocation-light HTML event scanner. Good enough for link and text
// extraction on real-world markup; it never fails, it only skips what it
// cannot make sense of.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fbench::detail {

struct HtmlEvent {
  enum class Kind { Text, StartTag, EndTag };

  Kind kind = Kind::Text;
  std::string text;  // decoded text for Kind::Text
  std::string name;  // lowercase tag name for tag events
  std::vector<std::pair<std::string, std::string>> attributes;
  bool self_closing = false;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

std::string decode_entities(std::string_view raw);

template <typename Sink>
void scan_html(std::string_view html, Sink&& sink);

// ---------------------------------------------------------------------------

namespace scanner_impl {

inline char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

inline bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() && lower(hay[i + j]) == needle[j]) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

// Parses "<name attrs...>" starting at html[pos] == '<'. Returns index past '>'.
inline std::size_t parse_tag(std::string_view html, std::size_t pos, HtmlEvent& ev) {
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    ev.kind = HtmlEvent::Kind::EndTag;
    ++i;
  } else {
    ev.kind = HtmlEvent::Kind::StartTag;
  }
  while (i < html.size() && !is_space(html[i]) && html[i] != '>' && html[i] != '/') {
    ev.name.push_back(lower(html[i]));
    ++i;
  }
  while (i < html.size()) {
    while (i < html.size() && is_space(html[i])) ++i;
    if (i >= html.size()) break;
    if (html[i] == '>') return i + 1;
    if (html[i] == '/') {
      if (i + 1 < html.size() && html[i + 1] == '>') {
        ev.self_closing = true;
        return i + 2;
      }
      ++i;
      continue;
    }
    std::string key;
    while (i < html.size() && !is_space(html[i]) && html[i] != '=' && html[i] != '>' &&
           !(html[i] == '/' && i + 1 < html.size() && html[i + 1] == '>')) {
      key.push_back(lower(html[i]));
      ++i;
    }
    while (i < html.size() && is_space(html[i])) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && is_space(html[i])) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        char quote = html[i++];
        std::size_t end = html.find(quote, i);
        if (end == std::string_view::npos) end = html.size();
        value = decode_entities(html.substr(i, end - i));
        i = end < html.size() ? end + 1 : end;
      } else {
        std::size_t start = i;
        while (i < html.size() && !is_space(html[i]) && html[i] != '>') ++i;
        value = decode_entities(html.substr(start, i - start));
      }
    }
    if (!key.empty()) ev.attributes.emplace_back(std::move(key), std::move(value));
  }
  return html.size();
}

}  // namespace scanner_impl

template <typename Sink>
void scan_html(std::string_view html, Sink&& sink) {
  using namespace scanner_impl;
  std::size_t i = 0;
  std::string pending;

  auto flush_text = [&] {
    if (pending.empty()) return;
    HtmlEvent ev;
    ev.kind = HtmlEvent::Kind::Text;
    ev.text = decode_entities(pending);
    pending.clear();
    sink(ev);
  };

  while (i < html.size()) {
    char c = html[i];
    if (c != '<' || i + 1 >= html.size()) {
      pending.push_back(c);
      ++i;
      continue;
    }
    char next = html[i + 1];
    if (html.substr(i, 4) == "<!--") {
      flush_text();
      std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
    } else if (next == '!' || next == '?') {
      flush_text();
      std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
    } else if (is_name_start(next) || (next == '/' && i + 2 < html.size() && is_name_start(html[i + 2]))) {
      flush_text();
      HtmlEvent ev;
      i = parse_tag(html, i, ev);
      bool raw = ev.kind == HtmlEvent::Kind::StartTag && !ev.self_closing &&
                 (ev.name == "script" || ev.name == "style");
      std::string name = ev.name;
      sink(ev);
      if (raw) {
        // Raw-text elements: skip to the matching close tag.
        std::size_t end = find_ci(html, "</" + name, i);
        if (end == std::string_view::npos) {
          i = html.size();
        } else {
          std::size_t close = html.find('>', end);
          i = close == std::string_view::npos ? html.size() : close + 1;
          HtmlEvent close_ev;
          close_ev.kind = HtmlEvent::Kind::EndTag;
          close_ev.name = name;
          sink(close_ev);
        }
      }
    } else {
      pending.push_back(c);
      ++i;
    }
  }
  flush_text();
}

}  // namespace fbench::detail
