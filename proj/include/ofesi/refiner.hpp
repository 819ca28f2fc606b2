#ifndef OFESI_REFINER_HPP
#define OFESI_REFINER_HPP

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ofesi/coarse_graph.hpp"
#include "ofesi/split_search.hpp"
#include "ofesi/trace_store.hpp"

namespace ofesi {

/// Thresholds and history length for state refinement. `strict_thresholds`
/// switches both gates from >= to >.
struct SplitConfig {
  double g_min = 0.15;
  Count a_min = 10;
  std::size_t sequence_length = 5;
  bool strict_thresholds = false;
  SearchParams search;

  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

/// Trailing pairs of a history. With `open_state` the oldest pair's state is
/// a wildcard, so the shortest pattern is a single action.
struct SuffixPattern {
  std::vector<Pair> items;
  bool open_state = false;

  /// Number of matched symbols: 2 per pair, one less when open.
  std::size_t token_length() const noexcept { return 2 * items.size() - (open_state ? 1 : 0); }

  /// True when the pattern is a suffix of `history`.
  bool matches(const HistorySequence& history) const;

  static SuffixPattern full(const HistorySequence& seq) { return {seq.items, false}; }
  /// The last `tokens` symbols of `seq`.
  static SuffixPattern suffix(const HistorySequence& seq, std::size_t tokens);

  friend auto operator<=>(const SuffixPattern&, const SuffixPattern&) = default;
};

struct SubState {
  std::string id;
  std::string parent_state;
  std::vector<SuffixPattern> patterns;
  ActionDistribution dist;
  std::string dominant_action;
  bool terminal = false;

  friend bool operator==(const SubState&, const SubState&) = default;
};

/// One binary split attempted during recursion.
struct SplitRecord {
  std::size_t depth = 0;
  std::size_t sequences = 0;
  double gain = 0.0;
  Count total1 = 0;
  Count total2 = 0;
  bool accepted = false;
};

struct StateSplit {
  std::vector<SubState> substates;
  std::vector<SplitRecord> log;  ///< depth-first order, root first
};

struct RefinedModel {
  CoarseModel coarse;
  std::map<std::string, std::vector<SubState>> substates;
  SplitConfig config;
  /// substate id -> action -> destination substate id counts.
  std::map<std::string, std::map<std::string, ActionDistribution>> transitions;

  /// Throws NotFoundError if `id` is not a substate.
  const SubState& substate(std::string_view id) const;

  friend bool operator==(const RefinedModel&, const RefinedModel&) = default;
};

/// Seed used for the searches of `state`: derive_seed(config seed, state).
std::uint64_t state_seed(const SplitConfig& config, std::string_view state);

/// Recursive binary splitting of one state's sequence table. Substates hold
/// their full-length sequences as patterns and are ordered by descending
/// total then id. Each recursion node searches with its own seed: the root
/// uses state_seed(), and children use derive_seed(parent seed, 1 or 2).
StateSplit split_state_detailed(std::string_view state, const SequenceTable& table,
                                const SplitConfig& config);
std::vector<SubState> split_state(std::string_view state, const SequenceTable& table,
                                  const SplitConfig& config);

/// Replaces sequence groups by their shortest discriminating suffix. A suffix
/// is adopted by a substate when every table sequence ending in it belongs to
/// that substate; suffix lengths are tried shortest first, one symbol at a
/// time, starting from the last action alone.
std::vector<SubState> merge_suffixes(std::vector<SubState> substates, const SequenceTable& table,
                                     std::size_t sequence_length);

RefinedModel refine_model(const CoarseModel& coarse, const TraceSet& traces,
                          const SplitConfig& config);

/// Throws IntegrityError when substate counts, transitions and the coarse
/// model disagree.
void validate(const RefinedModel& model);

}  // namespace ofesi

#endif  // OFESI_REFINER_HPP
