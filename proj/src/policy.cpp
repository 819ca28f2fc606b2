#include "ofesi/policy.hpp"

#include "ofesi/errors.hpp"

namespace ofesi {

HistorySequence pad_window(const std::vector<Pair>& pairs, std::size_t length) {
  HistorySequence h;
  h.items.reserve(length);
  for (std::size_t k = length; k > 0; --k) {
    h.items.push_back(pairs.size() >= k ? pairs[pairs.size() - k] : Pair::sentinel());
  }
  return h;
}

const SubState& identify_substate(const RefinedModel& model, std::string_view state,
                                  const HistorySequence& history) {
  auto it = model.substates.find(std::string(state));
  if (it == model.substates.end() || it->second.empty()) {
    throw NotFoundError("unknown state '" + std::string(state) + "'");
  }
  const auto& subs = it->second;
  const SubState* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& sub : subs) {
    for (const auto& pattern : sub.patterns) {
      const auto len = pattern.token_length();
      if (len > best_len && pattern.matches(history)) {
        best = &sub;
        best_len = len;
      }
    }
  }
  if (best) return *best;
  const SubState* majority = &subs.front();
  for (const auto& sub : subs) {
    if (sub.dist.total() > majority->dist.total()) majority = &sub;
  }
  return *majority;
}

const SubState& identify_substate(const RefinedModel& model, const HistoryWindow& window) {
  return identify_substate(model, window.current_state,
                           pad_window(window.pairs, model.config.sequence_length));
}

const ActionDistribution& predict_next(const RefinedModel& model, const HistoryWindow& window) {
  return identify_substate(model, window).dist;
}

}  // namespace ofesi
