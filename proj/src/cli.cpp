#include "ofesi/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ofesi/coarse_graph.hpp"
#include "ofesi/errors.hpp"
#include "ofesi/model_io.hpp"
#include "ofesi/policy.hpp"
#include "ofesi/refiner.hpp"
#include "ofesi/synth_eval.hpp"
#include "ofesi/trace_store.hpp"

namespace ofesi::cli {

namespace {

struct Io {
  std::istream& in;
  std::ostream& out;

  std::string read(const std::string& path) const {
    if (path.empty() || path == "-") {
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  void write(const std::string& path, const std::string& data) const {
    if (path.empty() || path == "-") {
      out << data;
      out.flush();
      return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << data;
    if (!f) throw Error("failed writing '" + path + "'");
  }
};

void add_split_options(CLI::App* app, SplitConfig& cfg) {
  app->add_option("--g-min", cfg.g_min, "minimum information gain (bits) to accept a split")
      ->capture_default_str();
  app->add_option("--a-min", cfg.a_min, "minimum action instances per accepted substate")
      ->capture_default_str();
  app->add_option("--l,--sequence-length", cfg.sequence_length, "history length in pairs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--search-steps", cfg.search.search_steps, "local search steps per split")
      ->capture_default_str();
  app->add_option("--greedy-prob", cfg.search.greedy_prob, "probability of a greedy move")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--tabu", cfg.search.tabu_tenure, "steps a moved sequence stays frozen")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--stagnation", cfg.search.stagnation_limit,
                  "restart after this many steps without improvement")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", cfg.search.rng_seed, "search seed")->capture_default_str();
  app->add_flag("--strict-thresholds", cfg.strict_thresholds,
                "accept splits only when gain > g-min and counts > a-min");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<Pair> read_history(const std::string& text) {
  std::vector<Pair> pairs;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(line_no, "history lines are 'state<TAB>action'");
    }
    pairs.push_back(Pair{line.substr(0, tab), line.substr(tab + 1)});
  }
  return pairs;
}

}  // namespace

int run(std::span<const std::string> args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Refine observed application states by history-based information-gain splitting"};
  app.name("ofesi");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with [refine] and [eval] sections");
  const Io io{in, out};

  std::string in_path, out_path;

  auto* ingest = app.add_subcommand("ingest", "validate a log and print summary statistics");
  ingest->add_option("--in", in_path, "interaction log (default: stdin)");

  SplitConfig refine_cfg;
  auto* refine = app.add_subcommand("refine", "refine a log into a model document");
  refine->add_option("--in", in_path, "interaction log (default: stdin)");
  refine->add_option("--out", out_path, "model document (default: stdout)");
  add_split_options(refine, refine_cfg);

  bool coarse_only = false, include_end = false;
  auto* exp = app.add_subcommand("export", "convert a model document to a DOT graph");
  exp->add_option("--in", in_path, "model document (default: stdin)");
  exp->add_option("--out", out_path, "DOT output (default: stdout)");
  exp->add_flag("--coarse", coarse_only, "export the observed state graph");
  exp->add_flag("--include-end", include_end, "include the __END__ pseudo-state");

  std::string model_path, history_path, current_state;
  std::vector<std::pair<std::string, std::string>> inline_pairs;
  auto* predict = app.add_subcommand("predict", "next-action distribution for a history");
  predict->add_option("--model", model_path, "model document")->required();
  predict->add_option("--state", current_state, "current state")->required();
  predict->add_option("--history", history_path, "file of 'state<TAB>action' lines, oldest first");
  predict->add_option("--pair", inline_pairs, "history pair STATE ACTION (repeatable, oldest first)");

  std::string truth_path;
  std::size_t sessions = 0;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate a log from a ground-truth file");
  synth->add_option("--truth", truth_path, "ground-truth file")->required();
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "generator seed (default: truth seed)");
  synth->add_option("--sessions", sessions, "number of sessions (default: from truth)");
  synth->add_option("--out", out_path, "log output (default: stdout)");

  SplitConfig eval_cfg;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "generate, refine and score against a ground truth");
  eval->add_option("--truth", truth_path, "ground-truth file")->required();
  eval->add_option("--sessions", sessions, "number of sessions (default: from truth)");
  auto* eval_seed_opt =
      eval->add_option("--data-seed", eval_seed, "generator seed (default: truth seed)");
  add_split_options(eval, eval_cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      const auto traces = parse_log(io.read(in_path));
      const auto coarse = build_coarse(traces);
      std::ostringstream os;
      os << "sessions\t" << traces.traces.size() << "\nevents\t" << traces.event_count()
         << "\nstates\t" << traces.state_alphabet.size() << "\nactions\t"
         << traces.action_alphabet.size() << '\n';
      for (const auto& [state, dist] : coarse.state_action_dist) {
        os << "state\t" << state << '\t' << dist.total() << '\t' << dist.dominant() << '\n';
      }
      io.write("-", os.str());
    } else if (refine->parsed()) {
      const auto traces = parse_log(io.read(in_path));
      const auto model = refine_model(build_coarse(traces), traces, refine_cfg);
      io.write(out_path, export_model(model));
    } else if (exp->parsed()) {
      const auto model = import_model(io.read(in_path));
      GraphOptions opts;
      opts.include_end = include_end;
      io.write(out_path, coarse_only ? export_graph(model.coarse, opts) : export_graph(model, opts));
    } else if (predict->parsed()) {
      const auto model = import_model(io.read(model_path));
      HistoryWindow window;
      window.current_state = current_state;
      if (!history_path.empty()) window.pairs = read_history(io.read(history_path));
      for (auto& [s, a] : inline_pairs) window.pairs.push_back(Pair{s, a});
      const auto& sub = identify_substate(model, window);
      std::vector<std::pair<std::string, Count>> ranked(sub.dist.counts().begin(),
                                                        sub.dist.counts().end());
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      std::ostringstream os;
      os << "substate\t" << sub.id << '\n';
      for (const auto& [action, n] : ranked) {
        os << action << '\t' << fixed6(static_cast<double>(n) / static_cast<double>(sub.dist.total()))
           << '\n';
      }
      io.write("-", os.str());
    } else if (synth->parsed()) {
      const auto truth = parse_truth(io.read(truth_path));
      const auto log = generate_traces(truth, sessions, synth_seed_opt->count() ? synth_seed : truth.seed);
      for (const auto& w : log.warnings) err << "warning: " << w << '\n';
      io.write(out_path, serialize_log(log.traces));
    } else if (eval->parsed()) {
      const auto truth = parse_truth(io.read(truth_path));
      const auto report =
          evaluate(truth, eval_cfg, sessions, eval_seed_opt->count() ? eval_seed : truth.seed);
      io.write("-", format_report(report));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace ofesi::cli
