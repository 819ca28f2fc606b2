#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "ofesi/cli.hpp"
#include "ofesi/model_io.hpp"
#include "test_util.hpp"

using namespace ofesi;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ofesi-cli-" + std::to_string(SplitMix64(std::random_device{}()).next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const std::string kTruth = test::truth_path("search-app.truth");

}  // namespace

TEST_CASE("synth | refine --l 1 | export") {
  const auto log = call({"synth", "--truth", kTruth});
  REQUIRE(log.code == 0);
  const auto model = call({"refine", "--l", "1"}, log.out);
  REQUIRE(model.code == 0);
  const auto dot = call({"export"}, model.out);
  REQUIRE(dot.code == 0);
  CHECK(count_of(dot.out, "\"Stepping/") >= 3);
  CHECK(dot.out.find("\"Stepping/Step\" [label=\"Stepping/Step\"];") != std::string::npos);
  CHECK(dot.out.find("\"Stepping/FineStep\" [label=") != std::string::npos);
  CHECK(dot.out.find("\"Stepping/ResetSearch\" [label=") != std::string::npos);
  CHECK(dot.out.find("\"Stepping/Step#2\"") == std::string::npos);

  const auto coarse = call({"export", "--coarse", "--include-end"}, model.out);
  CHECK(coarse.out.rfind("digraph coarse {", 0) == 0);
  CHECK(coarse.out.find("\"__END__\"") != std::string::npos);
}

TEST_CASE("refine is byte-identical across runs and file paths") {
  TempDir dir;
  const auto log = call({"synth", "--truth", kTruth, "--out", dir.file("app.log")});
  REQUIRE(log.code == 0);
  CHECK(log.out.empty());
  const std::vector<std::string> args{"refine", "--in", dir.file("app.log"), "--l", "2",
                                      "--seed", "9"};
  const auto a = call(args);
  const auto b = call(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto to_file = args;
  to_file.insert(to_file.end(), {"--out", dir.file("m.json")});
  REQUIRE(call(to_file).code == 0);
  CHECK(test::read_file(dir.file("m.json")) == a.out);
}

TEST_CASE("ingest summary") {
  const auto r = call({"ingest"}, "A\t0\tS\tgo\nA\t1\tT\tstop\nB\t0\tS\tgo\n");
  REQUIRE(r.code == 0);
  CHECK(r.out == "sessions\t2\nevents\t3\nstates\t2\nactions\t2\nstate\tS\t2\tgo\n"
                 "state\tT\t1\tstop\n");
}

TEST_CASE("predict") {
  TempDir dir;
  const auto log = call({"synth", "--truth", kTruth});
  const auto model = call({"refine", "--l", "1", "--out", dir.file("m.json")}, log.out);
  REQUIRE(model.code == 0);

  const auto r = call({"predict", "--model", dir.file("m.json"), "--state", "Stepping", "--pair",
                       "ProblemSolution", "Step"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("substate\tStepping/Step\nStep\t0.9", 0) == 0);

  {
    std::ofstream h(dir.file("h.tsv"));
    h << "# oldest first\nProblemSolution\tStep\nStepping\tFineStep\n";
  }
  const auto f = call({"predict", "--model", dir.file("m.json"), "--state", "Stepping",
                       "--history", dir.file("h.tsv")});
  REQUIRE(f.code == 0);
  CHECK(f.out.rfind("substate\tStepping/FineStep\nFineStep\t", 0) == 0);

  // Inline pairs come after the history file.
  const auto both = call({"predict", "--model", dir.file("m.json"), "--state", "Stepping",
                          "--history", dir.file("h.tsv"), "--pair", "GoalReached", "Ok"});
  CHECK(both.out.rfind("substate\tStepping/ResetSearch\n", 0) == 0);

  const auto unknown = call({"predict", "--model", dir.file("m.json"), "--state", "Nowhere"});
  CHECK(unknown.code == cli::kExitFailure);
}

TEST_CASE("usage errors exit 2") {
  CHECK(call({}).code == cli::kExitUsage);
  CHECK(call({"frobnicate"}).code == cli::kExitUsage);
  CHECK(call({"refine", "--l", "many"}).code == cli::kExitUsage);
  CHECK(call({"predict", "--state", "S"}).code == cli::kExitUsage);
  CHECK(call({"refine", "--no-such-flag"}).code == cli::kExitUsage);
  CHECK(call({"refine", "--l", "0"}).code == cli::kExitUsage);
  CHECK(call({"refine", "--greedy-prob", "1.5"}).code == cli::kExitUsage);
  const auto help = call({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("refine") != std::string::npos);
}

TEST_CASE("data and I/O errors exit 1") {
  const auto missing = call({"refine", "--in", "/nonexistent/x.log"});
  CHECK(missing.code == cli::kExitFailure);
  CHECK(missing.err.find("error: ") == 0);
  const auto dup = call({"refine"}, "A\t0\tS\tgo\nA\t0\tS\tgo\n");
  CHECK(dup.code == cli::kExitFailure);
  CHECK(dup.err.find("line 2") != std::string::npos);
  CHECK(call({"export"}, "{not json").code == cli::kExitFailure);
  CHECK(call({"synth", "--truth", kTruth, "--sessions", "7"}).code == cli::kExitFailure);
}

TEST_CASE("infinite gain threshold and strict flag are accepted") {
  const auto log = call({"synth", "--truth", kTruth});
  const auto r = call({"refine", "--l", "1", "--g-min", "inf", "--strict-thresholds"}, log.out);
  REQUIRE(r.code == 0);
  const auto m = import_model(r.out);
  CHECK(m.config.strict_thresholds);
  for (const auto& [state, subs] : m.substates) CHECK(subs.size() == 1);
}

TEST_CASE("options from a config file") {
  TempDir dir;
  {
    std::ofstream c(dir.file("split.toml"));
    c << "[refine]\ng-min = 0.3\na-min = 4\nl = 3\nseed = 12\n";
  }
  const auto log = call({"synth", "--truth", kTruth});
  const auto r = call({"--config", dir.file("split.toml"), "refine"}, log.out);
  REQUIRE(r.code == 0);
  const auto m = import_model(r.out);
  CHECK(m.config.g_min == 0.3);
  CHECK(m.config.a_min == 4);
  CHECK(m.config.sequence_length == 3);
  CHECK(m.config.search.rng_seed == 12);
  // Command-line values win over the file.
  const auto o = call({"--config", dir.file("split.toml"), "refine", "--l", "2"}, log.out);
  CHECK(import_model(o.out).config.sequence_length == 2);
}

TEST_CASE("eval report") {
  const auto r = call({"eval", "--truth", kTruth, "--l", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Stepping\t3\t3\t") != std::string::npos);
  CHECK(call({"eval", "--truth", kTruth, "--l", "1"}).out == r.out);
}
