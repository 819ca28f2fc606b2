#ifndef OFESI_COARSE_GRAPH_HPP
#define OFESI_COARSE_GRAPH_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "ofesi/distribution.hpp"
#include "ofesi/trace_store.hpp"

namespace ofesi {

/// Pseudo-state reached by the last action of every trace. Never split and not
/// a member of CoarseModel::states.
inline constexpr std::string_view kEndState = "__END__";

using StateAction = std::pair<std::string, std::string>;

/// The observed state graph: transition counts and per-state action counts.
struct CoarseModel {
  std::set<std::string> states;
  std::map<StateAction, std::map<std::string, Count>> transitions;
  std::map<std::string, ActionDistribution> state_action_dist;

  friend bool operator==(const CoarseModel&, const CoarseModel&) = default;
};

CoarseModel build_coarse(const TraceSet& traces);

/// Stored next-action counts of `state`; throws NotFoundError if unknown.
const ActionDistribution& action_distribution(const CoarseModel& model, std::string_view state);

/// Throws IntegrityError when transitions and action counts disagree.
void validate(const CoarseModel& model);

}  // namespace ofesi

#endif  // OFESI_COARSE_GRAPH_HPP
