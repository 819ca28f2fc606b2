#include "ofesi/coarse_graph.hpp"

#include "ofesi/errors.hpp"

namespace ofesi {

CoarseModel build_coarse(const TraceSet& traces) {
  CoarseModel m;
  for (const auto& t : traces.traces) {
    for (std::size_t i = 0; i < t.pairs.size(); ++i) {
      const auto& [state, action] = t.pairs[i];
      const std::string& next =
          i + 1 < t.pairs.size() ? t.pairs[i + 1].state : std::string(kEndState);
      m.states.insert(state);
      ++m.transitions[{state, action}][next];
      m.state_action_dist[state].add(action);
    }
  }
  return m;
}

const ActionDistribution& action_distribution(const CoarseModel& model, std::string_view state) {
  auto it = model.state_action_dist.find(std::string(state));
  if (it == model.state_action_dist.end()) {
    if (model.states.contains(std::string(state))) {
      static const ActionDistribution kEmpty;
      return kEmpty;
    }
    throw NotFoundError("unknown state '" + std::string(state) + "'");
  }
  return it->second;
}

void validate(const CoarseModel& model) {
  std::map<std::string, ActionDistribution> from_edges;
  for (const auto& [key, targets] : model.transitions) {
    const auto& [state, action] = key;
    if (!model.states.contains(state)) {
      throw IntegrityError("transition source '" + state + "' is not a state");
    }
    for (const auto& [next, n] : targets) {
      if (n == 0) throw IntegrityError("zero transition count from '" + state + "'");
      if (next != kEndState && !model.states.contains(next)) {
        throw IntegrityError("transition target '" + next + "' is not a state");
      }
      from_edges[state].add(action, n);
    }
  }
  for (const auto& [state, dist] : model.state_action_dist) {
    if (!model.states.contains(state)) {
      throw IntegrityError("action distribution for unknown state '" + state + "'");
    }
  }
  for (const auto& state : model.states) {
    auto stored = model.state_action_dist.find(state);
    const ActionDistribution empty;
    const auto& lhs = stored == model.state_action_dist.end() ? empty : stored->second;
    auto edges = from_edges.find(state);
    const auto& rhs = edges == from_edges.end() ? empty : edges->second;
    if (!(lhs == rhs)) {
      throw IntegrityError("action counts of '" + state + "' disagree with its transitions");
    }
  }
}

}  // namespace ofesi
