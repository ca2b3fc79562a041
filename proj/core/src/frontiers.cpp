#include "fbench/frontiers.hpp"

#include <algorithm>

#include "fbench/error.hpp"

namespace fbench {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Bfs: return "bfs";
    case StrategyKind::Dfs: return "dfs";
    case StrategyKind::Shark: return "shark";
    case StrategyKind::Priority: return "priority";
    case StrategyKind::Nb: return "nb";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto kind : kAllStrategies) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected bfs, dfs, shark, priority or nb)");
}

void SharkParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("shark delta must be in (0,1)");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("shark gamma must be in [0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("shark beta must be in [0,1]");
}

SharkScore shark_score(double parent_sim, double parent_inherited, double anchor_sim, double context_sim,
                       const SharkParams& params) {
  SharkScore out;
  out.child_inherited = params.delta * (parent_sim > 0.0 ? parent_sim : parent_inherited);
  double context = anchor_sim > 0.0 ? 1.0 : context_sim;
  double neighbourhood = params.beta * anchor_sim + (1.0 - params.beta) * context;
  out.potential = params.gamma * out.child_inherited + (1.0 - params.gamma) * neighbourhood;
  return out;
}

double priority_score(double parent_sim, double anchor_sim, const PriorityWeights& weights) {
  return weights.parent * parent_sim + weights.anchor * anchor_sim;
}

NbAdmission nb_link_admit(double parent_posterior, double threshold) {
  return {parent_posterior >= threshold, parent_posterior};
}

Frontier::Frontier(StrategyKind kind) : kind_(kind) {}

std::size_t Frontier::size() const noexcept {
  return (kind_ == StrategyKind::Bfs || kind_ == StrategyKind::Dfs) ? sequence_.size() : order_.size();
}

void Frontier::push(std::span<const FrontierEntry> entries) {
  for (const auto& e : entries) push(e);
}

void Frontier::push(FrontierEntry entry) {
  if (kind_ == StrategyKind::Bfs || kind_ == StrategyKind::Dfs) {
    entry.seq = next_seq_++;
    sequence_.push_back(std::move(entry));
  } else if (auto it = seq_by_url_.find(entry.target); it != seq_by_url_.end()) {
    FrontierEntry& queued = by_seq_.at(it->second);
    if (kind_ == StrategyKind::Priority && entry.score > queued.score) {
      order_.erase(Key{queued.score, queued.seq});
      queued.score = entry.score;
      order_.insert(Key{queued.score, queued.seq});
    }
  } else {
    entry.seq = next_seq_++;
    order_.insert(Key{entry.score, entry.seq});
    seq_by_url_.emplace(entry.target, entry.seq);
    by_seq_.emplace(entry.seq, std::move(entry));
  }
  peak_ = std::max(peak_, size());
}

std::optional<FrontierEntry> Frontier::pop() {
  if (kind_ == StrategyKind::Bfs || kind_ == StrategyKind::Dfs) {
    if (sequence_.empty()) return std::nullopt;
    FrontierEntry e;
    if (kind_ == StrategyKind::Bfs) {
      e = std::move(sequence_.front());
      sequence_.pop_front();
    } else {
      e = std::move(sequence_.back());
      sequence_.pop_back();
    }
    return e;
  }
  if (order_.empty()) return std::nullopt;
  Key top = *order_.begin();
  order_.erase(order_.begin());
  auto node = by_seq_.extract(top.seq);
  FrontierEntry e = std::move(node.mapped());
  seq_by_url_.erase(e.target);
  return e;
}

const FrontierEntry* Frontier::find(std::string_view url) const {
  auto it = seq_by_url_.find(std::string(url));
  if (it == seq_by_url_.end()) return nullptr;
  return &by_seq_.at(it->second);
}

}  // namespace fbench
