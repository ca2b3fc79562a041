#include "fbench/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>

#include "fbench/io.hpp"
#include "fbench/error.hpp"

namespace fbench {

Vocabulary::Vocabulary(std::vector<std::string> sorted_terms, std::vector<std::uint32_t> document_frequency,
                       std::uint32_t n_docs)
    : terms_(std::move(sorted_terms)), df_(std::move(document_frequency)), n_docs_(n_docs) {
  if (df_.size() != terms_.size()) throw ValidationError("vocabulary: df size does not match term count");
  index_.reserve(terms_.size());
  for (std::uint32_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) throw ValidationError("vocabulary: terms must be sorted and unique");
    index_.emplace(terms_[i], i);
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary vocab_fit(const std::vector<Tokens>& corpus) {
  if (corpus.empty()) throw ValidationError("vocab_fit: empty corpus");
  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string_view> distinct(doc.begin(), doc.end());
    for (auto term : distinct) ++df[std::string(term)];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> counts;
  terms.reserve(df.size());
  counts.reserve(df.size());
  for (auto& [term, count] : df) {
    terms.push_back(term);
    counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(counts), static_cast<std::uint32_t>(corpus.size()));
}

TermVector build_vector(const Tokens& tokens, const Vocabulary& vocab, Weighting weighting) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    if (auto idx = vocab.index_of(t)) counts[*idx] += 1.0;
  }
  TermVector v;
  v.entries.reserve(counts.size());
  const double n = static_cast<double>(vocab.n_docs());
  for (auto [idx, tf] : counts) {
    double w = tf;
    if (weighting == Weighting::TfIdf) {
      double df = static_cast<double>(vocab.document_frequency(idx));
      w = tf * std::log((1.0 + n) / (1.0 + df)) + tf;
    }
    if (w > 0.0) v.entries.emplace_back(idx, w);
  }
  return v;
}

double cosine_sim(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  auto norm = [](const TermVector& v) {
    double s = 0.0;
    for (const auto& [i, w] : v.entries) s += w * w;
    return std::sqrt(s);
  };
  double denom = norm(a) * norm(b);
  if (denom <= 0.0) return 0.0;
  return std::clamp(dot / denom, 0.0, 1.0);
}

SimilarityEngine::SimilarityEngine(Vocabulary vocab, Tokens query) : vocab_(std::move(vocab)) {
  if (query.empty()) throw ConfigError("topic query must contain at least one token");
  query_.tokens = std::move(query);
  query_.vector = build_vector(query_.tokens, vocab_, Weighting::TfIdf);
}

double SimilarityEngine::similarity(const Tokens& tokens) const {
  return cosine_sim(build_vector(tokens, vocab_, Weighting::TfIdf), query_.vector);
}

NBModel nb_train(const std::vector<LabeledDoc>& docs, double alpha, const Vocabulary& vocab) {
  if (!(alpha > 0.0)) throw ConfigError("nb_train: alpha must be > 0");
  std::array<std::size_t, 2> doc_count{};
  std::array<std::vector<double>, 2> term_count;
  std::array<double, 2> total{};
  for (auto& c : term_count) c.assign(vocab.size(), 0.0);

  for (const auto& doc : docs) {
    std::size_t c = doc.relevant ? 0 : 1;
    ++doc_count[c];
    for (const auto& t : doc.tokens) {
      if (auto idx = vocab.index_of(t)) {
        term_count[c][*idx] += 1.0;
        total[c] += 1.0;
      }
    }
  }
  if (doc_count[0] == 0 || doc_count[1] == 0) {
    throw ValidationError("nb_train: training data must contain both relevant and irrelevant documents");
  }

  NBModel model;
  model.alpha = alpha;
  model.vocabulary = vocab;
  const double n_docs = static_cast<double>(docs.size());
  const double v = static_cast<double>(vocab.size());
  for (std::size_t c = 0; c < 2; ++c) {
    model.class_log_prior[c] = std::log(static_cast<double>(doc_count[c]) / n_docs);
    double denom = std::log(total[c] + alpha * v);
    auto& ll = model.term_log_likelihood[c];
    ll.resize(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) ll[i] = std::log(term_count[c][i] + alpha) - denom;
  }
  return model;
}

double nb_posterior(const NBModel& model, const Tokens& tokens) {
  double rel = model.log_prior(Label::Relevant);
  double irr = model.log_prior(Label::Irrelevant);
  for (const auto& t : tokens) {
    if (auto idx = model.vocabulary.index_of(t)) {
      rel += model.log_likelihood(Label::Relevant, *idx);
      irr += model.log_likelihood(Label::Irrelevant, *idx);
    }
  }
  // Two-class softmax; exp of a non-positive argument cannot overflow.
  double hi = std::max(rel, irr);
  double er = std::exp(rel - hi);
  double ei = std::exp(irr - hi);
  return er / (er + ei);
}

// Model file: tab-separated lines.
//   nbmodel  1  <alpha>  <log prior relevant>  <log prior irrelevant>
//   <term>  <log P(term|relevant)>  <log P(term|irrelevant)>
// Terms in vocabulary order; numbers carry 17 significant digits so they
// round-trip exactly.

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  std::string tmp(s);
  char* end = nullptr;
  double x = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(x)) {
    throw ParseError("not a finite number: " + tmp, line);
  }
  return x;
}

}  // namespace

std::string serialize_nb_model(const NBModel& model) {
  std::string out = "nbmodel\t1\t" + fmt_double(model.alpha) + "\t" + fmt_double(model.class_log_prior[0]) + "\t" +
                    fmt_double(model.class_log_prior[1]) + "\n";
  for (std::uint32_t i = 0; i < model.vocabulary.size(); ++i) {
    out += model.vocabulary.term(i);
    out += '\t';
    out += fmt_double(model.term_log_likelihood[0][i]);
    out += '\t';
    out += fmt_double(model.term_log_likelihood[1][i]);
    out += '\n';
  }
  return out;
}

NBModel parse_nb_model(std::string_view text) {
  NBModel model;
  std::vector<std::string> terms;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (!header) {
      if (fields.size() != 5 || fields[0] != "nbmodel" || fields[1] != "1") {
        throw ParseError("expected header 'nbmodel\\t1\\t<alpha>\\t<prior>\\t<prior>'", line_no);
      }
      model.alpha = parse_double(fields[2], line_no);
      if (!(model.alpha > 0.0)) throw ParseError("alpha must be > 0", line_no);
      model.class_log_prior = {parse_double(fields[3], line_no), parse_double(fields[4], line_no)};
      header = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty()) throw ParseError("expected '<term>\\t<ll>\\t<ll>'", line_no);
    if (!terms.empty() && !(terms.back() < fields[0])) throw ParseError("terms must be sorted and unique", line_no);
    terms.emplace_back(fields[0]);
    model.term_log_likelihood[0].push_back(parse_double(fields[1], line_no));
    model.term_log_likelihood[1].push_back(parse_double(fields[2], line_no));
  }
  if (!header) throw ParseError("missing header line", 1);
  std::vector<std::uint32_t> df(terms.size(), 0);
  model.vocabulary = Vocabulary(std::move(terms), std::move(df), 0);
  return model;
}

void save_nb_model(const NBModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_nb_model(model));
}

NBModel load_nb_model(const std::filesystem::path& path) { return parse_nb_model(read_file(path)); }

}  // namespace fbench
