#include "ofesi/synth_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "ofesi/coarse_graph.hpp"
#include "ofesi/errors.hpp"
#include "ofesi/policy.hpp"
#include "ofesi/rng.hpp"

namespace ofesi {

namespace {

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t number(std::string_view w, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc{} || ptr != w.data() + w.size()) {
    throw ParseError(line_no, "expected a nonnegative integer, got '" + std::string(w) + "'");
  }
  return v;
}

bool is_end(const ModeRef& n) { return n.state == kEndState; }

/// Nodes indexed 1..N; index 0 is the session boundary (start/end).
struct NodeGraph {
  struct Arc {
    std::size_t target;
    const std::string* action;  // null for start arcs
    Count count;
  };
  std::vector<ModeRef> nodes{ModeRef{}};
  std::map<ModeRef, std::size_t> index;
  std::vector<std::vector<Arc>> arcs;

  NodeGraph(const GroundTruth& truth, Count scale) {
    for (const auto& [state, modes] : truth.modes) {
      for (const auto& mode : modes) {
        index.emplace(ModeRef{state, mode}, nodes.size());
        nodes.push_back({state, mode});
      }
    }
    arcs.resize(nodes.size());
    for (const auto& s : truth.starts) arcs[0].push_back({index.at(s.node), nullptr, s.count * scale});
    for (const auto& e : truth.edges) {
      const std::size_t to = is_end(e.next) ? 0 : index.at(e.next);
      arcs[index.at(e.node)].push_back({to, &e.action, e.count * scale});
    }
  }

  std::vector<char> reachable() const {
    std::vector<char> seen(nodes.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& a : arcs[v]) {
        if (a.count && !seen[a.target]) {
          seen[a.target] = 1;
          stack.push_back(a.target);
        }
      }
    }
    return seen;
  }
};

std::size_t draw_arc(const std::vector<NodeGraph::Arc>& arcs, Count total, SplitMix64& rng) {
  Count r = rng.below(total);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (r < arcs[k].count) return k;
    r -= arcs[k].count;
  }
  return arcs.size() - 1;
}

std::string session_name(std::size_t i, std::size_t n) {
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%0*zu", width, i);
  return buf;
}

struct Emitter {
  GeneratedLog& log;

  void begin() {
    log.traces.traces.push_back(Trace{});
    log.modes.emplace_back();
  }
  void emit(const ModeRef& node, const std::string& action) {
    log.traces.traces.back().pairs.push_back(Pair{node.state, action});
    log.traces.state_alphabet.insert(node.state);
    log.traces.action_alphabet.insert(action);
    log.modes.back().push_back(node.mode);
  }
};

/// Randomized Hierholzer walk over the token multigraph; uses every token.
void generate_exact(NodeGraph& g, SplitMix64& rng, GeneratedLog& log) {
  std::vector<Count> remaining(g.nodes.size(), 0);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    for (const auto& a : g.arcs[v]) remaining[v] += a.count;
  }
  struct Step {
    std::size_t from;
    const std::string* action;
  };
  std::vector<std::pair<std::size_t, Step>> stack{{0, Step{0, nullptr}}};
  std::vector<Step> circuit;
  while (!stack.empty()) {
    const std::size_t v = stack.back().first;
    if (remaining[v] == 0) {
      circuit.push_back(stack.back().second);
      stack.pop_back();
      continue;
    }
    auto& arcs = g.arcs[v];
    auto& arc = arcs[draw_arc(arcs, remaining[v], rng)];
    --arc.count;
    --remaining[v];
    stack.push_back({arc.target, Step{v, arc.action}});
  }
  std::reverse(circuit.begin(), circuit.end());

  Emitter out{log};
  for (std::size_t k = 1; k < circuit.size(); ++k) {  // circuit[0] is the root entry
    const auto& s = circuit[k];
    if (s.from == 0) {
      out.begin();
    } else {
      out.emit(g.nodes[s.from], *s.action);
    }
  }
}

void generate_stochastic(const NodeGraph& g, const GroundTruth& truth, std::size_t n_sessions,
                         SplitMix64& rng, GeneratedLog& log) {
  std::vector<Count> totals(g.nodes.size(), 0);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    for (const auto& a : g.arcs[v]) totals[v] += a.count;
  }
  if (totals[0] == 0) throw InvalidInputError("ground truth has no session starts");
  Emitter out{log};
  bool dead_end_warned = false;
  for (std::size_t s = 0; s < n_sessions; ++s) {
    out.begin();
    std::size_t v = g.arcs[0][draw_arc(g.arcs[0], totals[0], rng)].target;
    for (std::size_t len = 0; len < truth.max_length; ++len) {
      if (totals[v] == 0) {
        if (!dead_end_warned) {
          log.warnings.push_back("mode " + g.nodes[v].state + "/" + g.nodes[v].mode +
                                 " has no outgoing edges; sessions stop there");
          dead_end_warned = true;
        }
        break;
      }
      const auto& arc = g.arcs[v][draw_arc(g.arcs[v], totals[v], rng)];
      out.emit(g.nodes[v], *arc.action);
      v = arc.target;
      if (v == 0) break;
    }
  }
}

/// Maximum total weight of a one-to-one assignment of rows to columns.
Count best_alignment(const std::vector<std::vector<Count>>& weight, std::size_t rows,
                     std::size_t cols) {
  if (rows > 16) throw InvalidInputError("alignment supports at most 16 modes");
  const std::size_t masks = std::size_t{1} << rows;
  std::vector<Count> dp(masks, 0);
  std::vector<char> valid(masks, 0);
  valid[0] = 1;
  for (std::size_t c = 0; c < cols; ++c) {
    auto next = dp;
    auto next_valid = valid;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      if (!valid[mask]) continue;
      for (std::size_t r = 0; r < rows; ++r) {
        if (mask >> r & 1) continue;
        const std::size_t to = mask | (std::size_t{1} << r);
        const Count v = dp[mask] + weight[r][c];
        if (!next_valid[to] || v > next[to]) {
          next[to] = v;
          next_valid[to] = 1;
        }
      }
    }
    dp = std::move(next);
    valid = std::move(next_valid);
  }
  Count best = 0;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    if (valid[mask]) best = std::max(best, dp[mask]);
  }
  return best;
}

double smoothed_bits(const ActionDistribution& dist, const std::string& action, double vocab) {
  const double p = (static_cast<double>(dist.count(action)) + 1.0) /
                   (static_cast<double>(dist.total()) + vocab);
  return -std::log(p) / std::log(2.0);
}

}  // namespace

GroundTruth parse_truth(std::string_view text) {
  GroundTruth t;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto w = words(line);
    if (w.empty()) continue;

    auto expect = [&](std::size_t n) {
      if (w.size() != n) {
        throw ParseError(line_no, "'" + std::string(w[0]) + "' takes " + std::to_string(n - 1) +
                                      " arguments");
      }
    };
    const auto key = w[0];
    if (key == "truth") {
      expect(2);
      t.name = w[1];
    } else if (key == "calibration") {
      expect(2);
      if (w[1] == "exact") t.calibration = Calibration::exact;
      else if (w[1] == "stochastic") t.calibration = Calibration::stochastic;
      else throw ParseError(line_no, "calibration must be 'exact' or 'stochastic'");
    } else if (key == "sessions") {
      expect(2);
      t.sessions = number(w[1], line_no);
    } else if (key == "max-length") {
      expect(2);
      t.max_length = number(w[1], line_no);
    } else if (key == "seed") {
      expect(2);
      t.seed = number(w[1], line_no);
    } else if (key == "mode") {
      expect(3);
      auto& modes = t.modes[std::string(w[1])];
      if (std::find(modes.begin(), modes.end(), w[2]) != modes.end()) {
        throw ParseError(line_no, "mode declared twice");
      }
      modes.emplace_back(w[2]);
    } else if (key == "start") {
      expect(4);
      t.starts.push_back({{std::string(w[1]), std::string(w[2])}, number(w[3], line_no)});
    } else if (key == "edge") {
      // edge STATE MODE ACTION -> NEXT_STATE [NEXT_MODE] COUNT
      if (w.size() < 6 || w[4] != "->") {
        throw ParseError(line_no, "expected: edge STATE MODE ACTION -> NEXT [MODE] COUNT");
      }
      TruthEdge e{{std::string(w[1]), std::string(w[2])}, std::string(w[3]), {}, 0};
      e.next.state = w[5];
      if (e.next.state == kEndState) {
        if (w.size() != 7) throw ParseError(line_no, "edge to __END__ takes no mode");
        e.count = number(w[6], line_no);
      } else {
        if (w.size() != 8) throw ParseError(line_no, "edge needs a target mode and a count");
        e.next.mode = w[6];
        e.count = number(w[7], line_no);
      }
      t.edges.push_back(std::move(e));
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(key) + "'");
    }
  }
  validate_truth(t);
  return t;
}

void validate_truth(const GroundTruth& truth) {
  auto declared = [&](const ModeRef& n) {
    auto it = truth.modes.find(n.state);
    return it != truth.modes.end() &&
           std::find(it->second.begin(), it->second.end(), n.mode) != it->second.end();
  };
  auto name = [](const ModeRef& n) { return n.state + "/" + n.mode; };
  std::map<ModeRef, Count> in, out;
  for (const auto& s : truth.starts) {
    if (!declared(s.node)) throw InvalidInputError("start uses undeclared mode " + name(s.node));
    if (s.count == 0) throw InvalidInputError("start count must be positive");
    in[s.node] += s.count;
  }
  for (const auto& e : truth.edges) {
    if (!declared(e.node)) throw InvalidInputError("edge from undeclared mode " + name(e.node));
    if (!is_end(e.next) && !declared(e.next)) {
      throw InvalidInputError("edge to undeclared mode " + name(e.next));
    }
    if (e.count == 0) throw InvalidInputError("edge count must be positive");
    if (e.action.find(kSentinel) != std::string::npos || e.node.state.find(kSentinel) != std::string::npos) {
      throw InvalidInputError("reserved token in ground truth");
    }
    out[e.node] += e.count;
    if (!is_end(e.next)) in[e.next] += e.count;
  }
  if (truth.starts.empty()) throw InvalidInputError("ground truth has no start");
  if (truth.calibration == Calibration::exact) {
    for (const auto& [state, modes] : truth.modes) {
      for (const auto& mode : modes) {
        const ModeRef n{state, mode};
        if (in[n] != out[n]) {
          throw InvalidInputError("exact calibration needs balanced flow at " + name(n) + ": in " +
                                  std::to_string(in[n]) + ", out " + std::to_string(out[n]));
        }
      }
    }
  }
}

ActionDistribution mode_actions(const GroundTruth& truth, const ModeRef& node) {
  ActionDistribution d;
  for (const auto& e : truth.edges) {
    if (e.node == node) d.add(e.action, e.count);
  }
  return d;
}

std::map<Pair, Count> predecessor_signature(const GroundTruth& truth, const ModeRef& node) {
  std::map<Pair, Count> sig;
  for (const auto& s : truth.starts) {
    if (s.node == node) sig[Pair::sentinel()] += s.count;
  }
  for (const auto& e : truth.edges) {
    if (e.next == node) sig[Pair{e.node.state, e.action}] += e.count;
  }
  return sig;
}

std::map<std::string, double> mode_weights(const GroundTruth& truth, std::string_view state) {
  std::map<std::string, double> w;
  double total = 0.0;
  for (const auto& e : truth.edges) {
    if (e.node.state != state) continue;
    w[e.node.mode] += static_cast<double>(e.count);
    total += static_cast<double>(e.count);
  }
  for (auto& [mode, v] : w) v /= total;
  return w;
}

GeneratedLog generate_traces(const GroundTruth& truth, std::size_t n_sessions, std::uint64_t seed) {
  validate_truth(truth);
  Count scale = 1;
  if (truth.calibration == Calibration::exact && n_sessions != 0) {
    Count starts = 0;
    for (const auto& s : truth.starts) starts += s.count;
    if (n_sessions % starts != 0) {
      throw InvalidInputError("exact truth '" + truth.name + "' generates multiples of " +
                              std::to_string(starts) + " sessions");
    }
    scale = n_sessions / starts;
  }
  NodeGraph g(truth, scale);
  GeneratedLog log;
  const auto seen = g.reachable();
  for (std::size_t v = 1; v < g.nodes.size(); ++v) {
    if (!seen[v]) {
      log.warnings.push_back("mode " + g.nodes[v].state + "/" + g.nodes[v].mode +
                             " is unreachable from any start");
      g.arcs[v].clear();
    }
  }
  SplitMix64 rng(seed);
  if (truth.calibration == Calibration::exact) {
    generate_exact(g, rng, log);
  } else {
    generate_stochastic(g, truth, n_sessions ? n_sessions : truth.sessions, rng, log);
  }
  auto& traces = log.traces.traces;
  for (std::size_t i = traces.size(); i-- > 0;) {
    if (traces[i].pairs.empty()) {
      traces.erase(traces.begin() + static_cast<std::ptrdiff_t>(i));
      log.modes.erase(log.modes.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  for (std::size_t i = 0; i < traces.size(); ++i) traces[i].session = session_name(i, traces.size());
  return log;
}

RecoveryReport score_recovery(const GroundTruth& truth, const RefinedModel& refined,
                              const GeneratedLog& heldout) {
  RecoveryReport report;
  const std::size_t L = refined.config.sequence_length;
  std::set<std::string> alphabet;
  for (const auto& [state, dist] : refined.coarse.state_action_dist) {
    for (const auto& [action, n] : dist.counts()) alphabet.insert(action);
  }
  const double vocab = static_cast<double>(alphabet.size() + 1);

  // confusion[state][mode][substate id]
  std::map<std::string, std::map<std::string, std::map<std::string, Count>>> confusion;
  double refined_bits = 0.0, coarse_bits = 0.0;
  for (std::size_t t = 0; t < heldout.traces.traces.size(); ++t) {
    const auto& trace = heldout.traces.traces[t];
    for (std::size_t i = 0; i < trace.pairs.size(); ++i) {
      const auto& [state, action] = trace.pairs[i];
      if (!refined.substates.contains(state)) {
        ++report.skipped_actions;
        continue;
      }
      const auto& sub = identify_substate(refined, state, history_before(trace, i, L));
      refined_bits += smoothed_bits(sub.dist, action, vocab);
      coarse_bits += smoothed_bits(action_distribution(refined.coarse, state), action, vocab);
      ++report.scored_actions;
      if (t < heldout.modes.size() && i < heldout.modes[t].size()) {
        ++confusion[state][heldout.modes[t][i]][sub.id];
      }
    }
  }
  if (report.scored_actions) {
    refined_bits /= static_cast<double>(report.scored_actions);
    coarse_bits /= static_cast<double>(report.scored_actions);
  }
  report.refined_log_loss_bits = refined_bits;
  report.coarse_log_loss_bits = coarse_bits;

  for (const auto& [state, subs] : refined.substates) {
    StateRecovery r;
    r.state = state;
    r.recovered_substates = subs.size();
    if (auto it = truth.modes.find(state); it != truth.modes.end()) {
      for (const auto& mode : it->second) {
        if (!mode_actions(truth, {state, mode}).empty()) ++r.planted_modes;
      }
    }
    for (const auto& sub : subs) {
      SubstateShare share{sub.id, sub.dominant_action, sub.dist.total(), 0.0};
      if (!sub.dist.empty()) share.share = sub.dist.probability(sub.dominant_action);
      r.substates.push_back(std::move(share));
    }
    if (auto c = confusion.find(state); c != confusion.end()) {
      std::vector<std::vector<Count>> w;
      for (const auto& [mode, row] : c->second) {
        std::vector<Count> weights;
        for (const auto& sub : subs) {
          auto hit = row.find(sub.id);
          weights.push_back(hit == row.end() ? 0 : hit->second);
          r.visits += weights.back();
        }
        w.push_back(std::move(weights));
      }
      const Count matched = best_alignment(w, w.size(), subs.size());
      r.purity = r.visits ? static_cast<double>(matched) / static_cast<double>(r.visits) : 1.0;
    }
    report.states.push_back(std::move(r));
  }
  return report;
}

RecoveryReport evaluate(const GroundTruth& truth, const SplitConfig& config,
                        std::size_t n_sessions, std::uint64_t seed) {
  const auto train = generate_traces(truth, n_sessions, seed);
  const auto heldout = generate_traces(truth, n_sessions, derive_seed(seed, "heldout"));
  const auto refined = refine_model(build_coarse(train.traces), train.traces, config);
  return score_recovery(truth, refined, heldout);
}

std::string format_report(const RecoveryReport& report) {
  std::ostringstream os;
  char buf[256];
  os << "state\tplanted_modes\tsubstates\tpurity\tvisits\n";
  for (const auto& s : report.states) {
    std::snprintf(buf, sizeof buf, "%.6f", s.purity);
    os << s.state << '\t' << s.planted_modes << '\t' << s.recovered_substates << '\t' << buf
       << '\t' << s.visits << '\n';
    for (const auto& sub : s.substates) {
      std::snprintf(buf, sizeof buf, "%.6f", sub.share);
      os << "  " << sub.id << "\ttotal=" << sub.total << "\tdominant=" << sub.dominant_action
         << "\tshare=" << buf << '\n';
    }
  }
  std::snprintf(buf, sizeof buf, "log_loss_bits\trefined=%.6f\tcoarse=%.6f\n",
                report.refined_log_loss_bits, report.coarse_log_loss_bits);
  os << buf;
  os << "scored_actions\t" << report.scored_actions << "\nskipped_actions\t"
     << report.skipped_actions << '\n';
  return os.str();
}

}  // namespace ofesi
