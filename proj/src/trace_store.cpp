#include "ofesi/trace_store.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ofesi/errors.hpp"

namespace ofesi {

namespace {

constexpr std::string_view kEnd = "__END__";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

void check_symbol(std::string_view value, std::string_view field, std::size_t line_no) {
  if (value.empty()) throw ParseError(line_no, std::string(field) + " is empty");
  if (value.find(kSentinel) != std::string_view::npos) {
    throw ParseError(line_no, std::string(field) + " contains reserved token " +
                                  std::string(kSentinel));
  }
}

struct Builder {
  struct Session {
    std::size_t index;
    std::set<std::uint64_t> steps;
    std::uint64_t last;
  };

  TraceSet out;
  std::unordered_map<std::string, Session> sessions;

  void feed(std::string_view raw, std::size_t line_no) {
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') return;

    auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated fields, found " +
                                    std::to_string(fields.size()));
    }
    auto session = fields[0], step_text = fields[1], state = fields[2], action = fields[3];
    check_symbol(session, "session", line_no);
    check_symbol(state, "state", line_no);
    check_symbol(action, "action", line_no);
    if (state == kEnd) throw ParseError(line_no, "state name __END__ is reserved");

    std::uint64_t step = 0;
    auto [ptr, ec] = std::from_chars(step_text.data(), step_text.data() + step_text.size(), step);
    if (ec != std::errc{} || ptr != step_text.data() + step_text.size() || step_text.empty()) {
      throw ParseError(line_no, "step '" + std::string(step_text) +
                                    "' is not a nonnegative integer");
    }

    auto [it, inserted] = sessions.try_emplace(std::string(session));
    Session& s = it->second;
    if (inserted) {
      s.index = out.traces.size();
      out.traces.push_back(Trace{std::string(session), {}});
    } else {
      if (s.steps.contains(step)) {
        throw DuplicateStepError(line_no, "duplicate step " + std::to_string(step) +
                                              " in session '" + std::string(session) + "'");
      }
      if (step < s.last) {
        throw OrderingError(line_no, "step " + std::to_string(step) + " follows step " +
                                         std::to_string(s.last) + " in session '" +
                                         std::string(session) + "'");
      }
    }
    s.steps.insert(step);
    s.last = step;
    out.traces[s.index].pairs.push_back(Pair{std::string(state), std::string(action)});
    out.state_alphabet.emplace(state);
    out.action_alphabet.emplace(action);
  }
};

}  // namespace

void TraceSet::add(Trace trace) {
  for (const auto& p : trace.pairs) {
    state_alphabet.insert(p.state);
    action_alphabet.insert(p.action);
  }
  traces.push_back(std::move(trace));
}

std::size_t TraceSet::event_count() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.pairs.size();
  return n;
}

TraceSet parse_log(std::span<const std::string> lines) {
  Builder b;
  for (std::size_t i = 0; i < lines.size(); ++i) b.feed(lines[i], i + 1);
  return std::move(b.out);
}

TraceSet parse_log(std::string_view text) {
  Builder b;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    b.feed(text.substr(start, end - start), ++line_no);
    start = end + 1;
  }
  return std::move(b.out);
}

std::string serialize_log(const TraceSet& traces) {
  std::ostringstream os;
  for (const auto& t : traces.traces) {
    for (std::size_t i = 0; i < t.pairs.size(); ++i) {
      os << t.session << '\t' << i << '\t' << t.pairs[i].state << '\t' << t.pairs[i].action
         << '\n';
    }
  }
  return os.str();
}

HistorySequence history_before(const Trace& trace, std::size_t pos, std::size_t length) {
  HistorySequence h;
  h.items.reserve(length);
  for (std::size_t k = length; k > 0; --k) {
    h.items.push_back(pos >= k ? trace.pairs[pos - k] : Pair::sentinel());
  }
  return h;
}

SequenceCounts history_sequences(const TraceSet& traces, std::string_view target_state,
                                 std::size_t length) {
  if (length == 0) throw InvalidInputError("sequence length must be at least 1");
  SequenceCounts out;
  for (const auto& t : traces.traces) {
    for (std::size_t i = 0; i < t.pairs.size(); ++i) {
      if (t.pairs[i].state != target_state) continue;
      out[history_before(t, i, length)].add(t.pairs[i].action);
    }
  }
  return out;
}

std::map<std::string, SequenceCounts> all_history_sequences(const TraceSet& traces,
                                                            std::size_t length) {
  if (length == 0) throw InvalidInputError("sequence length must be at least 1");
  std::map<std::string, SequenceCounts> out;
  for (const auto& t : traces.traces) {
    for (std::size_t i = 0; i < t.pairs.size(); ++i) {
      out[t.pairs[i].state][history_before(t, i, length)].add(t.pairs[i].action);
    }
  }
  return out;
}

}  // namespace ofesi
