#ifndef OFESI_SPLIT_SEARCH_HPP
#define OFESI_SPLIT_SEARCH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ofesi/distribution.hpp"
#include "ofesi/trace_store.hpp"

namespace ofesi {

/// History sequences leading to one state, each with its next-action counts.
/// Keys iterate in canonical (lexicographic) order.
class SequenceTable {
 public:
  SequenceTable() = default;
  explicit SequenceTable(SequenceCounts entries);

  const SequenceCounts& entries() const noexcept { return entries_; }
  const ActionDistribution& parent_dist() const noexcept { return parent_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Sub-table over `keys`, which must all be present.
  SequenceTable subset(std::span<const HistorySequence> keys) const;

 private:
  SequenceCounts entries_;
  ActionDistribution parent_;
};

/// Local search configuration. Defaults: 500 steps, random moves with
/// probability 0.1, restart after 80 steps without a new best.
struct SearchParams {
  std::size_t search_steps = 500;
  double greedy_prob = 0.9;
  std::size_t tabu_tenure = 10;
  std::size_t stagnation_limit = 80;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const SearchParams&, const SearchParams&) = default;
};

/// Two nonempty, disjoint sets covering a table. `set1` holds the canonically
/// smallest sequence; both sets are sorted.
struct Bipartition {
  std::vector<HistorySequence> set1;
  std::vector<HistorySequence> set2;
  ActionDistribution dist1;
  ActionDistribution dist2;
  double gain = 0.0;
};

/// Optional instrumentation of one search run.
struct SearchTrace {
  static constexpr std::size_t kNoMove = static_cast<std::size_t>(-1);

  std::vector<double> best_by_step;
  std::vector<std::size_t> moved;          ///< canonical index per step, or kNoMove
  std::vector<std::size_t> restart_steps;  ///< steps after which the partition was redrawn
  std::size_t idle_steps = 0;              ///< steps with no eligible move
};

/// Stochastic local search for a high-gain bipartition.
///
/// Each of `search_steps` steps draws u = uniform(); if some move is eligible
/// it moves one sequence: the best resulting gain when u < greedy_prob (ties
/// to the lowest canonical index), otherwise a uniformly drawn eligible one
/// via below(#eligible). A sequence moved in the previous `tabu_tenure` steps
/// is ineligible, as is any move that would empty a set. After
/// `stagnation_limit` consecutive steps without a new best the partition is
/// redrawn and tabu state cleared. The initial and redrawn partitions assign
/// each sequence to set 2 by coin() in canonical order, repeating the whole
/// draw until both sets are nonempty.
///
/// Throws TooSmallError for fewer than two entries.
Bipartition binary_split(const SequenceTable& table, const SearchParams& params,
                         SearchTrace* trace = nullptr);

/// Exhaustive maximum over all 2^(n-1)-1 bipartitions, 2 <= n <= 20. Among
/// optima (within kGainTolerance) returns the lexicographically smallest
/// set1 by canonical index. Throws TooSmallError / TooLargeError.
Bipartition exhaustive_split(const SequenceTable& table);

inline constexpr std::size_t kExhaustiveMaxEntries = 20;

}  // namespace ofesi

#endif  // OFESI_SPLIT_SEARCH_HPP
