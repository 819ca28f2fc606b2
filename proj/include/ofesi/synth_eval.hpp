#ifndef OFESI_SYNTH_EVAL_HPP
#define OFESI_SYNTH_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ofesi/refiner.hpp"
#include "ofesi/trace_store.hpp"

namespace ofesi {

/// How generate_traces turns edge counts into sessions.
///  - exact: counts are an urn; every token is used exactly once (scaled by
///    the session multiple), so per-mode action totals are reproduced exactly.
///    Requires flow balance at every mode.
///  - stochastic: counts are sampling weights for independent walks.
enum class Calibration { exact, stochastic };

/// A (state, mode) node of the latent generative model.
struct ModeRef {
  std::string state;
  std::string mode;

  friend auto operator<=>(const ModeRef&, const ModeRef&) = default;
};

struct TruthStart {
  ModeRef node;
  Count count = 0;
};

/// In `node`, take `action` and arrive at `next` (next.state == "__END__"
/// ends the session). For an exact truth, `count` is a number of tokens.
struct TruthEdge {
  ModeRef node;
  std::string action;
  ModeRef next;
  Count count = 0;
};

/// Ground-truth model of application use with latent per-state modes. Each
/// mode's next-action distribution is the action marginal of its outgoing
/// edges; its predecessor signature is the (state, action) marginal of its
/// incoming edges. See docs/formats.md for the text format.
struct GroundTruth {
  std::string name;
  Calibration calibration = Calibration::stochastic;
  Count sessions = 100;          ///< default session count (stochastic)
  std::size_t max_length = 5000; ///< session length cap (stochastic)
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<std::string>> modes;
  std::vector<TruthStart> starts;
  std::vector<TruthEdge> edges;
};

GroundTruth parse_truth(std::string_view text);

/// Throws InvalidInputError for undeclared modes, zero counts, or (exact
/// calibration) a mode whose inflow differs from its outflow.
void validate_truth(const GroundTruth& truth);

/// Next-action distribution of one mode.
ActionDistribution mode_actions(const GroundTruth& truth, const ModeRef& node);

/// (state, action) pairs arriving in `node` with their counts; session
/// starts appear as the sentinel pair.
std::map<Pair, Count> predecessor_signature(const GroundTruth& truth, const ModeRef& node);

/// Share of `state`'s outgoing tokens held by each of its modes.
std::map<std::string, double> mode_weights(const GroundTruth& truth, std::string_view state);

/// Generated sessions plus the latent mode behind every pair.
struct GeneratedLog {
  TraceSet traces;
  std::vector<std::vector<std::string>> modes;  ///< parallel to traces[i].pairs
  std::vector<std::string> warnings;
};

/// Samples sessions from `truth`, deterministic per seed. With `n_sessions`
/// == 0 the truth's own session count is used. For an exact truth a nonzero
/// `n_sessions` must be a multiple of the truth's start count; all token
/// counts are scaled by that multiple. Modes unreachable from a start are
/// reported in `warnings`.
GeneratedLog generate_traces(const GroundTruth& truth, std::size_t n_sessions, std::uint64_t seed);

struct SubstateShare {
  std::string id;
  std::string dominant_action;
  Count total = 0;
  double share = 0.0;  ///< dominant action count / total
};

struct StateRecovery {
  std::string state;
  std::size_t planted_modes = 0;
  std::size_t recovered_substates = 0;
  double purity = 1.0;  ///< best one-to-one mode/substate alignment on held-out visits
  Count visits = 0;
  std::vector<SubstateShare> substates;
};

struct RecoveryReport {
  std::vector<StateRecovery> states;
  double refined_log_loss_bits = 0.0;
  double coarse_log_loss_bits = 0.0;
  Count scored_actions = 0;
  Count skipped_actions = 0;  ///< held-out actions from states unknown to the model
};

/// Scores `refined` against labelled held-out sessions. Log-loss is the mean
/// of -log2 p(action) with add-one smoothing over the model's action alphabet
/// plus one unseen slot, applied identically to the coarse baseline.
RecoveryReport score_recovery(const GroundTruth& truth, const RefinedModel& refined,
                              const GeneratedLog& heldout);

/// Generates a training log, refines it, and scores against an independent
/// held-out log drawn with derive_seed(seed, "heldout").
RecoveryReport evaluate(const GroundTruth& truth, const SplitConfig& config,
                        std::size_t n_sessions, std::uint64_t seed);

std::string format_report(const RecoveryReport& report);

}  // namespace ofesi

#endif  // OFESI_SYNTH_EVAL_HPP
