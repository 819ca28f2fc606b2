#include "ofesi/refiner.hpp"

#include <algorithm>
#include <set>

#include "ofesi/errors.hpp"
#include "ofesi/info_metrics.hpp"
#include "ofesi/policy.hpp"
#include "ofesi/rng.hpp"

namespace ofesi {

bool SuffixPattern::matches(const HistorySequence& history) const {
  const auto k = items.size();
  if (k == 0 || k > history.length()) return false;
  const auto offset = history.length() - k;
  for (std::size_t i = 0; i < k; ++i) {
    const Pair& h = history.items[offset + i];
    if (i == 0 && open_state) {
      if (h.action != items[0].action) return false;
    } else if (h != items[i]) {
      return false;
    }
  }
  return true;
}

SuffixPattern SuffixPattern::suffix(const HistorySequence& seq, std::size_t tokens) {
  const std::size_t pairs = (tokens + 1) / 2;
  SuffixPattern p;
  p.items.assign(seq.items.end() - static_cast<std::ptrdiff_t>(pairs), seq.items.end());
  p.open_state = tokens % 2 == 1;
  if (p.open_state) p.items.front().state.clear();
  return p;
}

const SubState& RefinedModel::substate(std::string_view id) const {
  for (const auto& [state, subs] : substates) {
    for (const auto& sub : subs) {
      if (sub.id == id) return sub;
    }
  }
  throw NotFoundError("unknown substate '" + std::string(id) + "'");
}

std::uint64_t state_seed(const SplitConfig& config, std::string_view state) {
  return derive_seed(config.search.rng_seed, state);
}

namespace {

bool passes(const SplitConfig& config, double gain, Count total1, Count total2) {
  if (config.strict_thresholds) {
    return gain > config.g_min + kGainTolerance && total1 > config.a_min && total2 > config.a_min;
  }
  return gain >= config.g_min - kGainTolerance && total1 >= config.a_min &&
         total2 >= config.a_min;
}

class Splitter {
 public:
  Splitter(const SplitConfig& config, StateSplit& out) : config_(config), out_(out) {}

  void run(const SequenceTable& table, std::uint64_t seed, std::size_t depth) {
    if (table.size() < 2) {
      leaf(table);
      return;
    }
    SearchParams params = config_.search;
    params.rng_seed = seed;
    Bipartition best = binary_split(table, params);
    SplitRecord rec{depth, table.size(), best.gain, best.dist1.total(), best.dist2.total(), false};
    rec.accepted = passes(config_, rec.gain, rec.total1, rec.total2);
    out_.log.push_back(rec);
    if (!rec.accepted) {
      leaf(table);
      return;
    }
    run(table.subset(best.set1), derive_seed(seed, 1), depth + 1);
    run(table.subset(best.set2), derive_seed(seed, 2), depth + 1);
  }

 private:
  void leaf(const SequenceTable& table) {
    SubState sub;
    for (const auto& [seq, dist] : table.entries()) sub.patterns.push_back(SuffixPattern::full(seq));
    sub.dist = table.parent_dist();
    sub.dominant_action = sub.dist.dominant();
    out_.substates.push_back(std::move(sub));
  }

  const SplitConfig& config_;
  StateSplit& out_;
};

void assign_ids(std::string_view state, std::vector<SubState>& subs) {
  std::sort(subs.begin(), subs.end(), [](const SubState& a, const SubState& b) {
    if (a.dist.total() != b.dist.total()) return a.dist.total() > b.dist.total();
    if (a.dominant_action != b.dominant_action) return a.dominant_action < b.dominant_action;
    return a.patterns < b.patterns;
  });
  std::map<std::string, int> seen;
  for (auto& sub : subs) {
    sub.parent_state = std::string(state);
    std::string base = std::string(state) + "/" + sub.dominant_action;
    const int n = ++seen[base];
    sub.id = n == 1 ? base : base + "#" + std::to_string(n);
  }
  std::stable_sort(subs.begin(), subs.end(), [](const SubState& a, const SubState& b) {
    if (a.dist.total() != b.dist.total()) return a.dist.total() > b.dist.total();
    return a.id < b.id;
  });
}

/// Index of the substate whose longest matching pattern matches `seq`.
std::size_t owner_of(const std::vector<SubState>& subs, const HistorySequence& seq) {
  std::size_t owner = subs.size();
  std::size_t best = 0;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    for (const auto& p : subs[i].patterns) {
      if (p.token_length() > best && p.matches(seq)) {
        best = p.token_length();
        owner = i;
      }
    }
  }
  return owner;
}

}  // namespace

StateSplit split_state_detailed(std::string_view state, const SequenceTable& table,
                                const SplitConfig& config) {
  if (table.empty()) throw InvalidInputError("cannot split state with no history");
  StateSplit out;
  Splitter(config, out).run(table, state_seed(config, state), 0);
  assign_ids(state, out.substates);
  return out;
}

std::vector<SubState> split_state(std::string_view state, const SequenceTable& table,
                                  const SplitConfig& config) {
  return split_state_detailed(state, table, config).substates;
}

std::vector<SubState> merge_suffixes(std::vector<SubState> substates, const SequenceTable& table,
                                     std::size_t sequence_length) {
  std::vector<const HistorySequence*> keys;
  std::vector<std::size_t> owner;
  for (const auto& [seq, dist] : table.entries()) {
    if (seq.length() != sequence_length) {
      throw InvalidInputError("table sequence length differs from " +
                              std::to_string(sequence_length));
    }
    const auto o = owner_of(substates, seq);
    if (o == substates.size()) throw InvalidInputError("substates do not cover the table");
    keys.push_back(&seq);
    owner.push_back(o);
  }

  constexpr std::size_t kMixed = static_cast<std::size_t>(-1);
  std::vector<std::set<SuffixPattern>> adopted(substates.size());
  std::vector<char> covered(keys.size(), 0);
  for (std::size_t tokens = 1; tokens <= 2 * sequence_length; ++tokens) {
    std::map<SuffixPattern, std::size_t> suffix_owner;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      auto [it, inserted] = suffix_owner.try_emplace(SuffixPattern::suffix(*keys[k], tokens), owner[k]);
      if (!inserted && it->second != owner[k]) it->second = kMixed;
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (covered[k]) continue;
      auto pattern = SuffixPattern::suffix(*keys[k], tokens);
      if (suffix_owner.at(pattern) != owner[k]) continue;
      adopted[owner[k]].insert(std::move(pattern));
      covered[k] = 1;
    }
  }

  for (std::size_t i = 0; i < substates.size(); ++i) {
    if (substates[i].terminal) continue;
    std::vector<SuffixPattern> patterns(adopted[i].begin(), adopted[i].end());
    std::stable_sort(patterns.begin(), patterns.end(),
                     [](const SuffixPattern& a, const SuffixPattern& b) {
                       return a.token_length() < b.token_length();
                     });
    substates[i].patterns = std::move(patterns);
  }
  return substates;
}

RefinedModel refine_model(const CoarseModel& coarse, const TraceSet& traces,
                          const SplitConfig& config) {
  if (config.sequence_length == 0) throw InvalidInputError("sequence length must be at least 1");
  RefinedModel model;
  model.coarse = coarse;
  model.config = config;

  auto tables = all_history_sequences(traces, config.sequence_length);
  for (const auto& state : coarse.states) {
    auto it = tables.find(state);
    if (it == tables.end() || it->second.empty()) {
      SubState terminal;
      terminal.id = state;
      terminal.parent_state = state;
      terminal.terminal = true;
      model.substates[state].push_back(std::move(terminal));
      continue;
    }
    const SequenceTable table(std::move(it->second));
    model.substates[state] =
        merge_suffixes(split_state(state, table, config), table, config.sequence_length);
  }

  const std::string end(kEndState);
  for (const auto& t : traces.traces) {
    for (std::size_t i = 0; i < t.pairs.size(); ++i) {
      const auto& from =
          identify_substate(model, t.pairs[i].state, history_before(t, i, config.sequence_length));
      const std::string& to =
          i + 1 < t.pairs.size()
              ? identify_substate(model, t.pairs[i + 1].state,
                                  history_before(t, i + 1, config.sequence_length))
                    .id
              : end;
      model.transitions[from.id][t.pairs[i].action].add(to);
    }
  }
  return model;
}

void validate(const RefinedModel& model) {
  validate(model.coarse);
  if (model.config.sequence_length == 0) throw IntegrityError("sequence length is zero");

  std::map<std::string, std::string> parent_of;
  for (const auto& [state, subs] : model.substates) {
    if (!model.coarse.states.contains(state)) {
      throw IntegrityError("substates listed for unknown state '" + state + "'");
    }
    if (subs.empty()) throw IntegrityError("state '" + state + "' has no substates");
    ActionDistribution sum;
    for (const auto& sub : subs) {
      if (sub.parent_state != state) {
        throw IntegrityError("substate '" + sub.id + "' filed under '" + state + "'");
      }
      if (!parent_of.emplace(sub.id, state).second || sub.id == kEndState) {
        throw IntegrityError("duplicate substate id '" + sub.id + "'");
      }
      if (sub.dominant_action != sub.dist.dominant()) {
        throw IntegrityError("substate '" + sub.id + "' has wrong dominant action");
      }
      if (sub.terminal != sub.dist.empty()) {
        throw IntegrityError("substate '" + sub.id + "' terminal flag disagrees with its counts");
      }
      if (!sub.terminal && sub.patterns.empty()) {
        throw IntegrityError("substate '" + sub.id + "' has no patterns");
      }
      for (const auto& p : sub.patterns) {
        if (p.items.empty() || p.items.size() > model.config.sequence_length) {
          throw IntegrityError("substate '" + sub.id + "' has a pattern of invalid length");
        }
      }
      sum += sub.dist;
    }
    if (!(sum == action_distribution(model.coarse, state))) {
      throw IntegrityError("substate counts of '" + state + "' do not sum to its action counts");
    }
  }
  for (const auto& state : model.coarse.states) {
    if (!model.substates.contains(state)) {
      throw IntegrityError("state '" + state + "' has no substates");
    }
  }

  std::map<StateAction, std::map<std::string, Count>> lifted;
  for (const auto& [id, by_action] : model.transitions) {
    auto parent = parent_of.find(id);
    if (parent == parent_of.end()) throw IntegrityError("transition from unknown substate '" + id + "'");
    ActionDistribution out;
    for (const auto& [action, dests] : by_action) {
      out.add(action, dests.total());
      for (const auto& [dest, n] : dests.counts()) {
        std::string dest_state(kEndState);
        if (dest != kEndState) {
          auto d = parent_of.find(dest);
          if (d == parent_of.end()) {
            throw IntegrityError("transition to unknown substate '" + dest + "'");
          }
          dest_state = d->second;
        }
        lifted[{parent->second, action}][dest_state] += n;
      }
    }
    if (!(out == model.substate(id).dist)) {
      throw IntegrityError("transitions of '" + id + "' do not match its action counts");
    }
  }
  for (const auto& [id, state] : parent_of) {
    if (!model.transitions.contains(id) && !model.substate(id).dist.empty()) {
      throw IntegrityError("substate '" + id + "' has counts but no transitions");
    }
  }
  if (lifted != model.coarse.transitions) {
    throw IntegrityError("substate transitions do not aggregate to the coarse transitions");
  }
}

}  // namespace ofesi
