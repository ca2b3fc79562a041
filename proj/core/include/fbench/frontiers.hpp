#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fbench {

enum class StrategyKind { Bfs, Dfs, Shark, Priority, Nb };

inline constexpr StrategyKind kAllStrategies[] = {StrategyKind::Bfs, StrategyKind::Dfs, StrategyKind::Shark,
                                                  StrategyKind::Priority, StrategyKind::Nb};

std::string_view to_string(StrategyKind kind);
// Accepts "bfs", "dfs", "shark", "priority", "nb". Throws ConfigError otherwise.
StrategyKind parse_strategy(std::string_view name);

struct FrontierEntry {
  std::string target;
  double score = 0.0;
  std::uint32_t depth = 0;
  std::uint64_t seq = 0;  // assigned by the frontier on push
  double inherited = 0.0;

  bool operator==(const FrontierEntry&) const = default;
};

struct SharkParams {
  double delta = 0.5;  // decay along the descendant chain
  double gamma = 0.5;  // inherited vs. neighbourhood mix
  double beta = 0.8;   // anchor vs. context mix

  void validate() const;
};

struct SharkScore {
  double potential = 0.0;
  double child_inherited = 0.0;
};

SharkScore shark_score(double parent_sim, double parent_inherited, double anchor_sim, double context_sim,
                       const SharkParams& params = {});

struct PriorityWeights {
  double parent = 0.5;
  double anchor = 0.5;
};

double priority_score(double parent_sim, double anchor_sim, const PriorityWeights& weights = {});

struct NbAdmission {
  bool admit = false;
  double score = 0.0;
};

inline constexpr double kDefaultNbThreshold = 0.5;

NbAdmission nb_link_admit(double parent_posterior, double threshold = kDefaultNbThreshold);

// URL frontier. The pop discipline is fixed by the strategy:
//   bfs       FIFO by insertion sequence
//   dfs       LIFO by insertion sequence
//   shark/nb  highest score first, ties to the earliest insertion; a URL
//             already waiting keeps its first-seen entry
//   priority  as above, but a re-discovered URL has its score raised to the
//             maximum of old and new
// bfs and dfs accept repeated URLs; the crawler filters visited ones on pop.
class Frontier {
 public:
  explicit Frontier(StrategyKind kind);

  StrategyKind kind() const noexcept { return kind_; }

  void push(FrontierEntry entry);
  void push(std::span<const FrontierEntry> entries);
  std::optional<FrontierEntry> pop();

  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  std::size_t peak_size() const noexcept { return peak_; }

  // Entry currently queued for `url`, scored strategies only.
  const FrontierEntry* find(std::string_view url) const;

 private:
  struct Key {
    double score;
    std::uint64_t seq;
    bool operator<(const Key& o) const {
      if (score != o.score) return score > o.score;
      return seq < o.seq;
    }
  };

  StrategyKind kind_;
  std::uint64_t next_seq_ = 0;
  std::size_t peak_ = 0;
  std::deque<FrontierEntry> sequence_;  // bfs / dfs
  std::set<Key> order_;                 // scored strategies
  std::unordered_map<std::uint64_t, FrontierEntry> by_seq_;
  std::unordered_map<std::string, std::uint64_t> seq_by_url_;
};

}  // namespace fbench
