#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fbench/extract.hpp"

namespace fbench {

// Term dictionary with document frequencies. Indices follow lexicographic
// term order so every fit over the same corpus is bit-identical.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> sorted_terms, std::vector<std::uint32_t> document_frequency,
             std::uint32_t n_docs);

  std::optional<std::uint32_t> index_of(std::string_view term) const;
  const std::string& term(std::uint32_t index) const { return terms_[index]; }
  std::uint32_t document_frequency(std::uint32_t index) const { return df_[index]; }
  std::uint32_t n_docs() const noexcept { return n_docs_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::uint32_t n_docs_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

Vocabulary vocab_fit(const std::vector<Tokens>& corpus);

enum class Weighting { Tf, TfIdf };

// Sparse non-negative vector, entries sorted by term index, no zeros stored.
struct TermVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const noexcept { return entries.empty(); }
  bool operator==(const TermVector&) const = default;
};

TermVector build_vector(const Tokens& tokens, const Vocabulary& vocab, Weighting weighting);

// Cosine of two non-negative vectors, clamped to [0, 1]; 0 when either is empty.
double cosine_sim(const TermVector& a, const TermVector& b);

struct TopicQuery {
  Tokens tokens;
  TermVector vector;
};

// Scores token sequences against a topic query with tf-idf cosine.
class SimilarityEngine {
 public:
  SimilarityEngine(Vocabulary vocab, Tokens query);

  double similarity(const Tokens& tokens) const;
  const TopicQuery& query() const noexcept { return query_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }

 private:
  Vocabulary vocab_;
  TopicQuery query_;
};

enum class Label : std::size_t { Relevant = 0, Irrelevant = 1 };

struct LabeledDoc {
  Tokens tokens;
  bool relevant = false;
};

inline constexpr double kDefaultAlpha = 1.0;

// Two-class multinomial naive Bayes.
struct NBModel {
  std::array<double, 2> class_log_prior{};
  std::array<std::vector<double>, 2> term_log_likelihood;
  double alpha = kDefaultAlpha;
  Vocabulary vocabulary;

  double log_prior(Label c) const { return class_log_prior[static_cast<std::size_t>(c)]; }
  double log_likelihood(Label c, std::uint32_t term) const {
    return term_log_likelihood[static_cast<std::size_t>(c)][term];
  }
};

NBModel nb_train(const std::vector<LabeledDoc>& docs, double alpha, const Vocabulary& vocab);

// P(relevant | tokens). Out-of-vocabulary tokens are ignored, so an empty or
// all-OOV input returns the relevant-class prior.
double nb_posterior(const NBModel& model, const Tokens& tokens);

std::string serialize_nb_model(const NBModel& model);
NBModel parse_nb_model(std::string_view text);
void save_nb_model(const NBModel& model, const std::filesystem::path& path);
NBModel load_nb_model(const std::filesystem::path& path);

}  // namespace fbench
