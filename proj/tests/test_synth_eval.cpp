#include <cmath>
#include <set>

#include "doctest.h"

#include "ofesi/errors.hpp"
#include "ofesi/synth_eval.hpp"
#include "test_util.hpp"

using namespace ofesi;

namespace {

GroundTruth load(const std::string& name) {
  return parse_truth(test::read_file(test::truth_path(name)));
}

const ActionDistribution kSteppingTotals{{"ShowFrontier", 5}, {"ResetSearch", 54},
                                 {"Step", 738},       {"DisplayNodeHeuristics", 1},
                                 {"ShowResult", 6},   {"DisplayEdgeCosts", 1},
                                 {"FineStep", 393}};

ActionDistribution state_totals(const TraceSet& ts, const std::string& state) {
  ActionDistribution d;
  for (const auto& t : ts.traces) {
    for (const auto& p : t.pairs) {
      if (p.state == state) d.add(p.action);
    }
  }
  return d;
}

constexpr const char* kOneMode = R"(truth loop
calibration stochastic
sessions 200
max-length 50
seed 5
mode A main
mode B main
start A main 1
edge A main go -> B main 8
edge A main stop -> __END__ 1
edge B main back -> A main 6
edge B main stay -> B main 3
)";

}  // namespace

TEST_CASE("parse the shipped truths") {
  const auto app = load("search-app.truth");
  CHECK(app.name == "search-app");
  CHECK(app.calibration == Calibration::exact);
  CHECK(app.seed == 1);
  CHECK(app.modes.at("Stepping") == std::vector<std::string>{"step", "fine", "reset"});
  REQUIRE(app.starts.size() == 1);
  CHECK(app.starts[0].count == 40);

  const auto fine = load("fine-stepping.truth");
  CHECK(fine.calibration == Calibration::stochastic);
  CHECK(fine.sessions == 400);
  CHECK(fine.max_length == 120);
  CHECK(fine.edges.size() == 10);
}

TEST_CASE("truth parse and validation errors") {
  CHECK_THROWS_AS(parse_truth("truth x\nbogus 1\n"), ParseError);
  CHECK_THROWS_AS(parse_truth("truth x\nseed -4\n"), ParseError);
  CHECK_THROWS_AS(parse_truth("calibration sometimes\n"), ParseError);
  CHECK_THROWS_AS(parse_truth("mode A m\nmode A m\n"), ParseError);
  CHECK_THROWS_AS(parse_truth("mode A m\nstart A m 1\nedge A m go B m 1\n"), ParseError);
  CHECK_THROWS_AS(parse_truth("mode A m\nstart A m 1\nedge A m go -> __END__ m 1\n"), ParseError);
  try {
    parse_truth("truth x\n\n# c\nwhat\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_truth("mode A m\nstart A q 1\nedge A m go -> __END__ 1\n"),
                  InvalidInputError);
  CHECK_THROWS_AS(parse_truth("mode A m\nstart A m 1\nedge A m go -> B m 1\n"), InvalidInputError);
  CHECK_THROWS_AS(parse_truth("mode A m\nstart A m 1\nedge A m go -> __END__ 0\n"),
                  InvalidInputError);
  CHECK_THROWS_AS(parse_truth("mode A m\nedge A m go -> __END__ 1\n"), InvalidInputError);
  // Exact calibration needs inflow == outflow at every mode.
  CHECK_THROWS_AS(parse_truth("calibration exact\nmode A m\nstart A m 1\n"
                              "edge A m go -> A m 1\nedge A m stop -> __END__ 2\n"),
                  InvalidInputError);
  CHECK_NOTHROW(parse_truth("calibration exact\nmode A m\nstart A m 2\n"
                            "edge A m go -> A m 1\nedge A m stop -> __END__ 2\n"));
}

TEST_CASE("mode marginals") {
  const auto app = load("search-app.truth");
  const auto step = mode_actions(app, {"Stepping", "step"});
  CHECK(step.total() == 761);
  CHECK(step.count("Step") == 733);
  ActionDistribution all;
  for (const auto& m : app.modes.at("Stepping")) all += mode_actions(app, {"Stepping", m});
  CHECK(all == kSteppingTotals);

  const auto sig = predecessor_signature(app, {"Stepping", "reset"});
  CHECK(sig == std::map<Pair, Count>{{Pair{"GoalReached", "Ok"}, 40}});
  const auto direct = predecessor_signature(app, {"ProblemSolution", "direct"});
  CHECK(direct == std::map<Pair, Count>{{Pair::sentinel(), 40}});

  const auto w = mode_weights(app, "Stepping");
  CHECK(w.at("step") == doctest::Approx(761.0 / 1198.0));
  CHECK(w.at("fine") == doctest::Approx(397.0 / 1198.0));
  CHECK(w.at("reset") == doctest::Approx(40.0 / 1198.0));
}

TEST_CASE("exact generation reproduces the calibrated totals") {
  const auto app = load("search-app.truth");
  for (std::uint64_t seed : {1, 2, 99}) {
    const auto log = generate_traces(app, 0, seed);
    CHECK(log.traces.traces.size() == 40);
    CHECK(state_totals(log.traces, "Stepping") == kSteppingTotals);
    CHECK(log.warnings.empty());
  }
  const auto doubled = generate_traces(app, 80, 3);
  CHECK(doubled.traces.traces.size() == 80);
  CHECK(state_totals(doubled.traces, "Stepping").count("Step") == 2 * 738);
  CHECK_THROWS_AS(generate_traces(app, 50, 3), InvalidInputError);
}

TEST_CASE("generated labels agree with the truth") {
  for (const auto* name : {"search-app.truth", "fine-stepping.truth"}) {
    const auto truth = load(name);
    const auto log = generate_traces(truth, 0, 7);
    REQUIRE(log.modes.size() == log.traces.traces.size());
    std::set<std::tuple<std::string, std::string, std::string>> allowed;
    for (const auto& e : truth.edges) allowed.emplace(e.node.state, e.node.mode, e.action);
    for (std::size_t i = 0; i < log.modes.size(); ++i) {
      const auto& t = log.traces.traces[i];
      REQUIRE(log.modes[i].size() == t.pairs.size());
      CHECK_FALSE(t.pairs.empty());
      for (std::size_t k = 0; k < t.pairs.size(); ++k) {
        CHECK(allowed.contains({t.pairs[k].state, log.modes[i][k], t.pairs[k].action}));
      }
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto fine = load("fine-stepping.truth");
  const auto a = generate_traces(fine, 30, 4);
  const auto b = generate_traces(fine, 30, 4);
  const auto c = generate_traces(fine, 30, 5);
  CHECK(serialize_log(a.traces) == serialize_log(b.traces));
  CHECK(a.modes == b.modes);
  CHECK(serialize_log(a.traces) != serialize_log(c.traces));
  CHECK(a.traces.traces.front().session == "s0000");
}

TEST_CASE("stochastic sessions respect the length cap") {
  auto fine = load("fine-stepping.truth");
  fine.max_length = 7;
  const auto log = generate_traces(fine, 100, 2);
  CHECK(log.traces.traces.size() <= 100);
  for (const auto& t : log.traces.traces) CHECK(t.pairs.size() <= 7);
}

TEST_CASE("unreachable and dead-end modes are reported") {
  const auto t = parse_truth("mode A m\nmode A lost\nmode B m\nstart A m 1\n"
                             "edge A m go -> B m 1\nedge A lost go -> __END__ 1\n");
  const auto log = generate_traces(t, 5, 1);
  CHECK(log.warnings.size() == 2);
}

TEST_CASE("one mode per state recovers one substate each") {
  const auto truth = parse_truth(kOneMode);
  const auto report = evaluate(truth, SplitConfig{}, 0, truth.seed);
  REQUIRE(report.states.size() == 2);
  for (const auto& s : report.states) {
    CHECK(s.planted_modes == 1);
    CHECK(s.recovered_substates == 1);
    CHECK(s.purity == 1.0);
  }
  CHECK(report.skipped_actions == 0);
  CHECK(report.refined_log_loss_bits == doctest::Approx(report.coarse_log_loss_bits));
}

TEST_CASE("search-app evaluation") {
  const auto truth = load("search-app.truth");
  SplitConfig c;
  c.sequence_length = 1;
  const auto report = evaluate(truth, c, 0, truth.seed);
  const StateRecovery* stepping = nullptr;
  for (const auto& s : report.states) {
    if (s.state == "Stepping") stepping = &s;
  }
  REQUIRE(stepping != nullptr);
  CHECK(stepping->planted_modes == 3);
  CHECK(stepping->recovered_substates == 3);
  CHECK(stepping->purity > 0.95);
  CHECK(stepping->visits == 1198);
  CHECK(stepping->substates[0].dominant_action == "Step");
  CHECK(stepping->substates[0].share >= 0.95);
  CHECK(report.refined_log_loss_bits < report.coarse_log_loss_bits);
  CHECK(report.scored_actions > 0);

  const auto text = format_report(report);
  CHECK(text.rfind("state\tplanted_modes\tsubstates\tpurity\tvisits\n", 0) == 0);
  CHECK(text.find("Stepping\t3\t3\t") != std::string::npos);
  CHECK(text.find("log_loss_bits\trefined=") != std::string::npos);
  CHECK(format_report(evaluate(truth, c, 0, truth.seed)) == text);
}

TEST_CASE("held-out scoring skips states the model never saw") {
  const auto truth = parse_truth(kOneMode);
  const auto train = generate_traces(truth, 50, 1);
  const auto model = refine_model(build_coarse(train.traces), train.traces, SplitConfig{});
  auto heldout = generate_traces(truth, 20, 2);
  heldout.traces.traces[0].pairs.push_back({"Z", "go"});
  heldout.modes[0].push_back("main");
  const auto report = score_recovery(truth, model, heldout);
  CHECK(report.skipped_actions == 1);
  CHECK(std::isfinite(report.refined_log_loss_bits));
}
