#include "ofesi/model_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ofesi/errors.hpp"

namespace ofesi {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kFormatName = "ofesi-model";

Json counts_json(const ActionDistribution& dist) {
  Json j = Json::object();
  for (const auto& [action, n] : dist.counts()) j[action] = n;
  return j;
}

Json real_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

Json pattern_json(const SuffixPattern& p) {
  Json pairs = Json::array();
  for (std::size_t i = 0; i < p.items.size(); ++i) {
    Json state = (i == 0 && p.open_state) ? Json(nullptr) : Json(p.items[i].state);
    pairs.push_back(Json::array({state, p.items[i].action}));
  }
  return pairs;
}

// Reading side: every accessor reports the JSON path of what it failed on.

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(0, "at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Count count(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return j.get<Count>();
}

double real(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j == "inf") return std::numeric_limits<double>::infinity();
  if (j == "-inf") return -std::numeric_limits<double>::infinity();
  fail(path, "expected a number");
}

bool flag(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

const Json& object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

ActionDistribution read_counts(const Json& j, const std::string& path) {
  ActionDistribution d;
  for (const auto& [action, n] : object(j, path).items()) {
    const Count c = count(n, path + "/" + action);
    if (c == 0) throw IntegrityError("zero count stored at " + path + "/" + action);
    d.add(action, c);
  }
  return d;
}

SuffixPattern read_pattern(const Json& j, const std::string& path) {
  SuffixPattern p;
  const auto& pairs = array(j, path);
  if (pairs.empty()) fail(path, "empty pattern");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto at = path + "/" + std::to_string(i);
    const auto& pair = array(pairs[i], at);
    if (pair.size() != 2) fail(at, "expected [state, action]");
    Pair item;
    if (pair[0].is_null()) {
      if (i != 0) fail(at, "only the oldest pair may have an open state");
      p.open_state = true;
    } else {
      item.state = text(pair[0], at + "/0");
    }
    item.action = text(pair[1], at + "/1");
    p.items.push_back(std::move(item));
  }
  return p;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string edge_label(std::string_view action, Count n) {
  return dot_quote(std::string(action) + " (" + std::to_string(n) + ")");
}

}  // namespace

std::string export_model(const RefinedModel& model) {
  Json doc;
  doc["format"] = std::string(kFormatName);
  doc["format_version"] = kModelFormatVersion;

  const auto& cfg = model.config;
  doc["config"] = {
      {"g_min", real_json(cfg.g_min)},
      {"a_min", cfg.a_min},
      {"sequence_length", cfg.sequence_length},
      {"strict_thresholds", cfg.strict_thresholds},
      {"search",
       {{"search_steps", cfg.search.search_steps},
        {"greedy_prob", cfg.search.greedy_prob},
        {"tabu_tenure", cfg.search.tabu_tenure},
        {"stagnation_limit", cfg.search.stagnation_limit},
        {"rng_seed", cfg.search.rng_seed}}},
  };

  Json coarse;
  coarse["states"] = Json::array();
  for (const auto& s : model.coarse.states) coarse["states"].push_back(s);
  coarse["transitions"] = Json::array();
  for (const auto& [key, targets] : model.coarse.transitions) {
    Json next = Json::object();
    for (const auto& [to, n] : targets) next[to] = n;
    coarse["transitions"].push_back({{"state", key.first}, {"action", key.second}, {"next", next}});
  }
  coarse["action_counts"] = Json::object();
  for (const auto& [state, dist] : model.coarse.state_action_dist) {
    coarse["action_counts"][state] = counts_json(dist);
  }
  doc["coarse"] = std::move(coarse);

  Json substates = Json::object();
  for (const auto& [state, subs] : model.substates) {
    Json list = Json::array();
    for (const auto& sub : subs) {
      Json patterns = Json::array();
      for (const auto& p : sub.patterns) patterns.push_back(pattern_json(p));
      list.push_back({{"id", sub.id},
                      {"dominant_action", sub.dominant_action},
                      {"terminal", sub.terminal},
                      {"counts", counts_json(sub.dist)},
                      {"patterns", std::move(patterns)}});
    }
    substates[state] = std::move(list);
  }
  doc["substates"] = std::move(substates);

  Json transitions = Json::object();
  for (const auto& [id, by_action] : model.transitions) {
    Json actions = Json::object();
    for (const auto& [action, dests] : by_action) actions[action] = counts_json(dests);
    transitions[id] = std::move(actions);
  }
  doc["transitions"] = std::move(transitions);

  return doc.dump(2) + "\n";
}

RefinedModel import_model(std::string_view text_in) {
  Json doc;
  try {
    doc = Json::parse(text_in.begin(), text_in.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text_in.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text_in[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(line, "column " + std::to_string(column) + ": malformed model document");
  }

  if (text(member(doc, "", "format"), "/format") != kFormatName) {
    fail("/format", "not an ofesi model document");
  }
  const auto& version = member(doc, "", "format_version");
  if (!version.is_number_integer()) fail("/format_version", "expected an integer");
  if (version.get<std::int64_t>() != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + version.dump() + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
  }

  RefinedModel m;
  const auto& cfg = member(doc, "", "config");
  m.config.g_min = real(member(cfg, "/config", "g_min"), "/config/g_min");
  m.config.a_min = count(member(cfg, "/config", "a_min"), "/config/a_min");
  m.config.sequence_length =
      count(member(cfg, "/config", "sequence_length"), "/config/sequence_length");
  m.config.strict_thresholds =
      flag(member(cfg, "/config", "strict_thresholds"), "/config/strict_thresholds");
  const auto& search = member(cfg, "/config", "search");
  const std::string sp = "/config/search";
  m.config.search.search_steps = count(member(search, sp, "search_steps"), sp + "/search_steps");
  m.config.search.greedy_prob = real(member(search, sp, "greedy_prob"), sp + "/greedy_prob");
  m.config.search.tabu_tenure = count(member(search, sp, "tabu_tenure"), sp + "/tabu_tenure");
  m.config.search.stagnation_limit =
      count(member(search, sp, "stagnation_limit"), sp + "/stagnation_limit");
  m.config.search.rng_seed = count(member(search, sp, "rng_seed"), sp + "/rng_seed");

  const auto& coarse = member(doc, "", "coarse");
  const auto& states = array(member(coarse, "/coarse", "states"), "/coarse/states");
  for (std::size_t i = 0; i < states.size(); ++i) {
    m.coarse.states.insert(text(states[i], "/coarse/states/" + std::to_string(i)));
  }
  const auto& trans = array(member(coarse, "/coarse", "transitions"), "/coarse/transitions");
  for (std::size_t i = 0; i < trans.size(); ++i) {
    const auto at = "/coarse/transitions/" + std::to_string(i);
    StateAction key{text(member(trans[i], at, "state"), at + "/state"),
                    text(member(trans[i], at, "action"), at + "/action")};
    auto& targets = m.coarse.transitions[key];
    for (const auto& [to, n] : object(member(trans[i], at, "next"), at + "/next").items()) {
      targets[to] = count(n, at + "/next/" + to);
    }
  }
  for (const auto& [state, counts] :
       object(member(coarse, "/coarse", "action_counts"), "/coarse/action_counts").items()) {
    m.coarse.state_action_dist[state] = read_counts(counts, "/coarse/action_counts/" + state);
  }

  for (const auto& [state, list] : object(member(doc, "", "substates"), "/substates").items()) {
    auto& subs = m.substates[state];
    const auto path = "/substates/" + state;
    for (std::size_t i = 0; i < array(list, path).size(); ++i) {
      const auto at = path + "/" + std::to_string(i);
      const auto& j = list[i];
      SubState sub;
      sub.id = text(member(j, at, "id"), at + "/id");
      sub.parent_state = state;
      sub.dominant_action = text(member(j, at, "dominant_action"), at + "/dominant_action");
      sub.terminal = flag(member(j, at, "terminal"), at + "/terminal");
      sub.dist = read_counts(member(j, at, "counts"), at + "/counts");
      const auto& patterns = array(member(j, at, "patterns"), at + "/patterns");
      for (std::size_t k = 0; k < patterns.size(); ++k) {
        sub.patterns.push_back(read_pattern(patterns[k], at + "/patterns/" + std::to_string(k)));
      }
      subs.push_back(std::move(sub));
    }
  }

  for (const auto& [id, actions] :
       object(member(doc, "", "transitions"), "/transitions").items()) {
    auto& by_action = m.transitions[id];
    for (const auto& [action, dests] : object(actions, "/transitions/" + id).items()) {
      by_action[action] = read_counts(dests, "/transitions/" + id + "/" + action);
    }
  }

  validate(m);
  return m;
}

std::string export_graph(const CoarseModel& model, const GraphOptions& options) {
  std::ostringstream os;
  os << "digraph coarse {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const auto& s : model.states) os << "  " << dot_quote(s) << ";\n";
  if (options.include_end) os << "  " << dot_quote(kEndState) << " [shape=doublecircle];\n";
  for (const auto& [key, targets] : model.transitions) {
    for (const auto& [to, n] : targets) {
      if (to == kEndState && !options.include_end) continue;
      os << "  " << dot_quote(key.first) << " -> " << dot_quote(to)
         << " [label=" << edge_label(key.second, n) << "];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string export_graph(const RefinedModel& model, const GraphOptions& options) {
  std::ostringstream os;
  os << "digraph refined {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const auto& [state, subs] : model.substates) {
    for (const auto& sub : subs) {
      const std::string& label = subs.size() == 1 ? state : sub.id;
      os << "  " << dot_quote(sub.id) << " [label=" << dot_quote(label) << "];\n";
    }
  }
  if (options.include_end) os << "  " << dot_quote(kEndState) << " [shape=doublecircle];\n";
  for (const auto& [id, by_action] : model.transitions) {
    for (const auto& [action, dests] : by_action) {
      for (const auto& [to, n] : dests.counts()) {
        if (to == kEndState && !options.include_end) continue;
        os << "  " << dot_quote(id) << " -> " << dot_quote(to)
           << " [label=" << edge_label(action, n) << "];\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace ofesi
