#ifndef OFESI_POLICY_HPP
#define OFESI_POLICY_HPP

#include <string>
#include <vector>

#include "ofesi/refiner.hpp"

namespace ofesi {

/// The most recent (state, action) pairs, oldest first, and the state the
/// user is in now. Only the last `sequence_length` pairs are consulted.
struct HistoryWindow {
  std::vector<Pair> pairs;
  std::string current_state;
};

/// Substate of the current state holding the longest pattern that matches
/// the sentinel-padded window; the largest-total substate when none match.
/// Throws NotFoundError for an unknown current state.
const SubState& identify_substate(const RefinedModel& model, const HistoryWindow& window);

/// Same rule against an already padded history of exactly L pairs.
const SubState& identify_substate(const RefinedModel& model, std::string_view state,
                                  const HistorySequence& history);

/// Next-action counts of the identified substate.
const ActionDistribution& predict_next(const RefinedModel& model, const HistoryWindow& window);

/// Left-pads with sentinels or keeps the last `length` pairs.
HistorySequence pad_window(const std::vector<Pair>& pairs, std::size_t length);

}  // namespace ofesi

#endif  // OFESI_POLICY_HPP
