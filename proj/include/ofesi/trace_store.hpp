#ifndef OFESI_TRACE_STORE_HPP
#define OFESI_TRACE_STORE_HPP

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ofesi/distribution.hpp"

namespace ofesi {

/// Textual spelling of the session-start sentinel. Reserved in input logs.
inline constexpr std::string_view kSentinel = "__BOT__";

/// One observed interface state and the action the user took from it.
struct Pair {
  std::string state;
  std::string action;

  static Pair sentinel() { return {std::string(kSentinel), std::string(kSentinel)}; }
  bool is_sentinel() const { return state == kSentinel && action == kSentinel; }

  friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct Trace {
  std::string session;
  std::vector<Pair> pairs;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Traces in order of first appearance of their session in the log.
struct TraceSet {
  std::vector<Trace> traces;
  std::set<std::string> action_alphabet;
  std::set<std::string> state_alphabet;

  /// Appends a trace and extends the alphabets.
  void add(Trace trace);
  std::size_t event_count() const;

  friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

/// The L pairs preceding an arrival, oldest first. Sentinel pairs form a
/// contiguous prefix when the arrival is within L steps of session start.
struct HistorySequence {
  std::vector<Pair> items;

  std::size_t length() const noexcept { return items.size(); }

  friend auto operator<=>(const HistorySequence&, const HistorySequence&) = default;
};

using SequenceCounts = std::map<HistorySequence, ActionDistribution>;

/// Parses the tab-separated `session step state action` log format.
/// Within a session, steps must appear strictly increasing in file order.
TraceSet parse_log(std::span<const std::string> lines);
TraceSet parse_log(std::string_view text);

/// Inverse of parse_log: steps are renumbered 0..n-1 per session.
std::string serialize_log(const TraceSet& traces);

/// The `length` pairs before position `pos` of `trace`, sentinel-padded.
HistorySequence history_before(const Trace& trace, std::size_t pos, std::size_t length);

/// History sequences preceding every occurrence of `target_state`, with the
/// counts of the action taken at each occurrence.
SequenceCounts history_sequences(const TraceSet& traces, std::string_view target_state,
                                 std::size_t length);

/// history_sequences for every state in one pass.
std::map<std::string, SequenceCounts> all_history_sequences(const TraceSet& traces,
                                                            std::size_t length);

}  // namespace ofesi

#endif  // OFESI_TRACE_STORE_HPP
