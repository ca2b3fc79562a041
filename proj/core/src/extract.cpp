#include "fbench/extract.hpp"

#include <algorithm>

#include "html_scanner.hpp"

namespace fbench {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return to_lower(x) == to_lower(y); });
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// RFC 3986 remove_dot_segments.
std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.starts_with("../")) {
      in.erase(0, 3);
    } else if (in.starts_with("./")) {
      in.erase(0, 2);
    } else if (in.starts_with("/./")) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.starts_with("/../")) {
      in.replace(0, 4, "/");
      auto pos = out.rfind('/');
      out.erase(pos == std::string::npos ? 0 : pos);
    } else if (in == "/..") {
      in = "/";
      auto pos = out.rfind('/');
      out.erase(pos == std::string::npos ? 0 : pos);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = in.front() == '/' ? 1 : 0;
      std::size_t next = in.find('/', start);
      if (next == std::string::npos) next = in.size();
      out.append(in, 0, next);
      in.erase(0, next);
    }
  }
  return out;
}

// Control bytes and spaces are not valid inside a URL; percent-encode them so
// normalization stays total and idempotent.
std::string escape_controls(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c == 0x7f) {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

struct UrlParts {
  std::string scheme;
  std::string authority;
  std::string path;
  std::string query;  // includes leading '?' when present
};

std::optional<UrlParts> split_absolute(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  UrlParts parts;
  parts.scheme = lowercase(url.substr(0, sep));
  if (parts.scheme != "http" && parts.scheme != "https") return std::nullopt;
  std::string_view rest = url.substr(sep + 3);
  auto auth_end = rest.find_first_of("/?#");
  if (auth_end == std::string_view::npos) auth_end = rest.size();
  parts.authority = std::string(rest.substr(0, auth_end));
  rest.remove_prefix(auth_end);
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  auto q = rest.find('?');
  if (q != std::string_view::npos) {
    parts.query = std::string(rest.substr(q));
    rest = rest.substr(0, q);
  }
  parts.path = std::string(rest);
  return parts;
}

// RFC 3986 reg-name: unreserved, percent-encoded and sub-delims.
bool is_host_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         std::string_view("-._~%!$&'()*+,;=").find(c) != std::string_view::npos;
}

std::optional<std::string> normalize_authority(std::string_view authority, std::string_view scheme) {
  std::string userinfo;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    userinfo = std::string(authority.substr(0, at + 1));
    authority.remove_prefix(at + 1);
  }
  std::string_view host = authority;
  std::string_view port;
  if (!host.empty() && host.front() == '[') {
    auto close = host.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    if (close + 1 < host.size()) {
      if (host[close + 1] != ':') return std::nullopt;
      port = host.substr(close + 2);
    }
    host = host.substr(0, close + 1);
  } else if (auto colon = host.rfind(':'); colon != std::string_view::npos) {
    port = host.substr(colon + 1);
    host = host.substr(0, colon);
  }
  if (host.empty()) return std::nullopt;
  if (host.front() != '[' && !std::all_of(host.begin(), host.end(), is_host_char)) return std::nullopt;
  if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  while (port.size() > 1 && port.front() == '0') port.remove_prefix(1);
  bool default_port = (scheme == "http" && port == "80") || (scheme == "https" && port == "443");
  std::string out = userinfo + lowercase(host);
  if (!port.empty() && !default_port) {
    out += ':';
    out += port;
  }
  return out;
}

void append_tokens(std::string_view text, Tokens& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_alpha(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && is_alpha(text[i])) ++i;
    if (i > start) {
      std::string token = lowercase(text.substr(start, i - start));
      if (!is_stop_word(token)) out.push_back(std::move(token));
    }
  }
}

}  // namespace

std::optional<std::string> normalize_url(std::string_view url) {
  auto parts = split_absolute(trim(url));
  if (!parts) return std::nullopt;
  auto authority = normalize_authority(parts->authority, parts->scheme);
  if (!authority) return std::nullopt;
  std::string path = remove_dot_segments(parts->path);
  if (path.empty() || path.front() != '/') path.insert(path.begin(), '/');
  return escape_controls(parts->scheme + "://" + *authority + path + parts->query);
}

bool is_normalized_url(std::string_view url) {
  auto n = normalize_url(url);
  return n && *n == url;
}

std::optional<std::string> resolve_url(std::string_view base, std::string_view href) {
  href = trim(href);
  if (href.empty() || href.front() == '#') return std::nullopt;
  if (href.starts_with("//")) {
    auto sep = base.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    return normalize_url(std::string(base.substr(0, sep)) + ":" + std::string(href));
  }
  if (href.front() == '/') {
    std::string origin = url_origin(base);
    if (origin.empty()) return std::nullopt;
    return normalize_url(origin + std::string(href));
  }
  auto colon = href.find(':');
  auto delim = href.find_first_of("/?#");
  if (colon == std::string_view::npos || (delim != std::string_view::npos && delim < colon)) {
    return std::nullopt;  // path-relative
  }
  std::string_view scheme = href.substr(0, colon);
  if (!iequals(scheme, "http") && !iequals(scheme, "https")) return std::nullopt;
  return normalize_url(href);
}

std::string url_origin(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return {};
  auto end = url.find_first_of("/?#", sep + 3);
  return std::string(url.substr(0, end == std::string_view::npos ? url.size() : end));
}

std::string url_host(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return {};
  std::string_view auth = url.substr(sep + 3);
  auth = auth.substr(0, std::min(auth.find_first_of("/?#"), auth.size()));
  if (auto at = auth.rfind('@'); at != std::string_view::npos) auth.remove_prefix(at + 1);
  if (!auth.empty() && auth.front() == '[') return std::string(auth.substr(0, auth.find(']') + 1));
  return std::string(auth.substr(0, std::min(auth.rfind(':'), auth.size())));
}

std::string url_path(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return "/";
  auto start = url.find_first_of("/?#", sep + 3);
  if (start == std::string_view::npos) return "/";
  std::string_view rest = url.substr(start);
  rest = rest.substr(0, std::min(rest.find('#'), rest.size()));
  std::string out(rest);
  if (out.empty() || out.front() != '/') out.insert(out.begin(), '/');
  return out;
}

Tokens tokenize_plain(std::string_view text) {
  Tokens out;
  append_tokens(text, out);
  return out;
}

Tokens normalize_text(std::string_view html) {
  Tokens out;
  detail::scan_html(html, [&](const detail::HtmlEvent& ev) {
    if (ev.kind == detail::HtmlEvent::Kind::Text) append_tokens(ev.text, out);
  });
  return out;
}

std::vector<LinkCandidate> parse_links(std::string_view html, std::string_view base,
                                       std::size_t context_window, std::uint32_t source_depth) {
  struct Span {
    std::string target;
    std::size_t begin;
    std::size_t end;
  };
  Tokens flow;
  std::vector<Span> spans;
  bool open = false;

  auto close_anchor = [&] {
    if (open) spans.back().end = flow.size();
    open = false;
  };

  detail::scan_html(html, [&](const detail::HtmlEvent& ev) {
    using Kind = detail::HtmlEvent::Kind;
    if (ev.kind == Kind::Text) {
      append_tokens(ev.text, flow);
    } else if (ev.name == "a") {
      // Anchors do not nest; a new <a> implicitly closes the open one.
      close_anchor();
      if (ev.kind != Kind::StartTag) return;
      const std::string* href = ev.attribute("href");
      if (!href) return;
      auto target = resolve_url(base, *href);
      if (!target) return;
      spans.push_back({std::move(*target), flow.size(), flow.size()});
      open = !ev.self_closing;
    }
  });
  close_anchor();

  std::vector<LinkCandidate> out;
  out.reserve(spans.size());
  for (const auto& span : spans) {
    LinkCandidate link;
    link.target = span.target;
    link.source = std::string(base);
    link.depth = source_depth + 1;
    link.anchor_text.assign(flow.begin() + static_cast<std::ptrdiff_t>(span.begin),
                            flow.begin() + static_cast<std::ptrdiff_t>(span.end));
    std::size_t before = span.begin >= context_window ? span.begin - context_window : 0;
    std::size_t after = std::min(flow.size(), span.end + context_window);
    link.context.assign(flow.begin() + static_cast<std::ptrdiff_t>(before),
                        flow.begin() + static_cast<std::ptrdiff_t>(span.begin));
    link.context.insert(link.context.end(), flow.begin() + static_cast<std::ptrdiff_t>(span.end),
                        flow.begin() + static_cast<std::ptrdiff_t>(after));
    out.push_back(std::move(link));
  }
  return out;
}

std::uint64_t content_checksum(std::string_view bytes) {
  std::uint64_t hash = kEmptyChecksum;
  for (char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Document make_document(std::string url, std::string_view html) {
  Document doc;
  doc.url = std::move(url);
  doc.tokens = normalize_text(html);
  doc.checksum = content_checksum(html);
  return doc;
}

}  // namespace fbench
