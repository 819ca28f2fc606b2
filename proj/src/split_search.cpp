#include "ofesi/split_search.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include <Eigen/Core>

#include "ofesi/errors.hpp"
#include "ofesi/info_metrics.hpp"
#include "ofesi/rng.hpp"

namespace ofesi {

SequenceTable::SequenceTable(SequenceCounts entries) : entries_(std::move(entries)) {
  for (const auto& [seq, dist] : entries_) parent_ += dist;
}

SequenceTable SequenceTable::subset(std::span<const HistorySequence> keys) const {
  SequenceCounts out;
  for (const auto& k : keys) {
    auto it = entries_.find(k);
    if (it == entries_.end()) throw NotFoundError("sequence not present in table");
    out.emplace(it->first, it->second);
  }
  return SequenceTable(std::move(out));
}

namespace {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountRow = Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic>;

/// The table as a dense sequence-by-action count matrix.
struct DenseTable {
  std::vector<const HistorySequence*> keys;
  std::vector<const ActionDistribution*> dists;
  CountMatrix counts;

  explicit DenseTable(const SequenceTable& table) {
    const auto& alphabet = table.parent_dist().counts();
    counts.setZero(static_cast<Eigen::Index>(table.size()),
                   static_cast<Eigen::Index>(alphabet.size()));
    Eigen::Index row = 0;
    for (const auto& [seq, dist] : table.entries()) {
      keys.push_back(&seq);
      dists.push_back(&dist);
      Eigen::Index col = 0;
      for (const auto& [action, total] : alphabet) {
        counts(row, col++) = static_cast<std::int64_t>(dist.count(action));
      }
      ++row;
    }
  }

  std::size_t size() const { return keys.size(); }
};

Bipartition make_bipartition(const DenseTable& dense, const std::vector<std::uint8_t>& in_set2) {
  // set1 is the side holding index 0.
  const std::uint8_t side1 = in_set2[0];
  Bipartition b;
  CountRow left = CountRow::Zero(dense.counts.cols());
  CountRow right = CountRow::Zero(dense.counts.cols());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (in_set2[i] == side1) {
      b.set1.push_back(*dense.keys[i]);
      b.dist1 += *dense.dists[i];
      left += dense.counts.row(r);
    } else {
      b.set2.push_back(*dense.keys[i]);
      b.dist2 += *dense.dists[i];
      right += dense.counts.row(r);
    }
  }
  b.gain = split_gain_bits(left, right);
  return b;
}

class LocalSearch {
 public:
  LocalSearch(const DenseTable& dense, const SearchParams& params)
      : dense_(dense),
        params_(params),
        rng_(params.rng_seed),
        side_(dense.size(), 0),
        last_moved_(dense.size(), kNever),
        sums_{CountRow::Zero(dense.counts.cols()), CountRow::Zero(dense.counts.cols())} {}

  Bipartition run(SearchTrace* trace) {
    const std::size_t n = dense_.size();
    redraw();
    double gain = current_gain();
    double best = gain;
    std::vector<std::uint8_t> best_side = side_;
    std::size_t stagnant = 0;
    std::vector<std::size_t> eligible;
    eligible.reserve(n);

    for (std::size_t step = 0; step < params_.search_steps; ++step) {
      eligible.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const bool tabu = last_moved_[i] != kNever && step - last_moved_[i] <= params_.tabu_tenure;
        if (!tabu && size_[side_[i]] > 1) eligible.push_back(i);
      }
      const double u = rng_.uniform();
      std::size_t moved = SearchTrace::kNoMove;
      if (eligible.empty()) {
        if (trace) ++trace->idle_steps;
      } else {
        std::size_t pick;
        if (u < params_.greedy_prob) {
          pick = greedy_pick(eligible, gain);
        } else {
          pick = eligible[rng_.below(eligible.size())];
          move(pick);
          gain = current_gain();
        }
        last_moved_[pick] = step;
        moved = pick;
      }

      if (gain > best + kGainTolerance) {
        best = gain;
        best_side = side_;
        stagnant = 0;
      } else if (++stagnant >= params_.stagnation_limit) {
        redraw();
        gain = current_gain();
        stagnant = 0;
        if (trace) trace->restart_steps.push_back(step);
        if (gain > best + kGainTolerance) {
          best = gain;
          best_side = side_;
        }
      }
      if (trace) {
        trace->best_by_step.push_back(best);
        trace->moved.push_back(moved);
      }
    }
    return make_bipartition(dense_, best_side);
  }

 private:
  static constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

  void redraw() {
    const std::size_t n = dense_.size();
    do {
      size_[0] = size_[1] = 0;
      for (std::size_t i = 0; i < n; ++i) {
        side_[i] = rng_.coin() ? 1 : 0;
        ++size_[side_[i]];
      }
    } while (size_[0] == 0 || size_[1] == 0);
    sums_[0].setZero();
    sums_[1].setZero();
    for (std::size_t i = 0; i < n; ++i) {
      sums_[side_[i]] += dense_.counts.row(static_cast<Eigen::Index>(i));
    }
    std::fill(last_moved_.begin(), last_moved_.end(), kNever);
  }

  double current_gain() const { return split_gain_bits(sums_[0], sums_[1]); }

  double gain_if_moved(std::size_t i) const {
    const auto row = dense_.counts.row(static_cast<Eigen::Index>(i));
    const int from = side_[i];
    CountRow src = sums_[from] - row;
    CountRow dst = sums_[1 - from] + row;
    return from == 0 ? split_gain_bits(src, dst) : split_gain_bits(dst, src);
  }

  /// Applies the best eligible move and returns its index; `gain` is updated.
  std::size_t greedy_pick(const std::vector<std::size_t>& eligible, double& gain) {
    candidate_gains_.resize(eligible.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < eligible.size(); ++k) {
      candidate_gains_[k] = gain_if_moved(eligible[k]);
      top = std::max(top, candidate_gains_[k]);
    }
    std::size_t k = 0;
    while (candidate_gains_[k] < top - kGainTolerance) ++k;
    move(eligible[k]);
    gain = candidate_gains_[k];
    return eligible[k];
  }

  void move(std::size_t i) {
    const auto row = dense_.counts.row(static_cast<Eigen::Index>(i));
    const int from = side_[i];
    sums_[from] -= row;
    sums_[1 - from] += row;
    --size_[from];
    ++size_[1 - from];
    side_[i] = static_cast<std::uint8_t>(1 - from);
  }

  const DenseTable& dense_;
  const SearchParams& params_;
  SplitMix64 rng_;
  std::vector<std::uint8_t> side_;
  std::vector<std::size_t> last_moved_;
  std::size_t size_[2] = {0, 0};
  CountRow sums_[2];
  std::vector<double> candidate_gains_;
};

}  // namespace

Bipartition binary_split(const SequenceTable& table, const SearchParams& params,
                         SearchTrace* trace) {
  if (table.size() < 2) {
    throw TooSmallError("binary split needs at least 2 sequences, got " +
                        std::to_string(table.size()));
  }
  const DenseTable dense(table);
  return LocalSearch(dense, params).run(trace);
}

Bipartition exhaustive_split(const SequenceTable& table) {
  const std::size_t n = table.size();
  if (n < 2) throw TooSmallError("exhaustive split needs at least 2 sequences");
  if (n > kExhaustiveMaxEntries) {
    throw TooLargeError("exhaustive split supports at most " +
                        std::to_string(kExhaustiveMaxEntries) + " sequences, got " +
                        std::to_string(n));
  }
  const DenseTable dense(table);

  // Bit j of a code puts sequence j+1 into set2; sequence 0 stays in set1.
  // Codes are visited in Gray order so each step moves one row.
  const std::uint64_t codes = std::uint64_t{1} << (n - 1);
  std::vector<double> gains(codes, -1.0);
  CountRow left = dense.counts.colwise().sum();
  CountRow right = CountRow::Zero(dense.counts.cols());
  std::uint64_t prev = 0;
  for (std::uint64_t i = 1; i < codes; ++i) {
    const std::uint64_t code = i ^ (i >> 1);
    const std::uint64_t flipped = code ^ prev;
    const int bit = std::countr_zero(flipped);
    const auto row = dense.counts.row(bit + 1);
    if (code & flipped) {
      left -= row;
      right += row;
    } else {
      left += row;
      right -= row;
    }
    gains[code] = split_gain_bits(left, right);
    prev = code;
  }

  const double top = *std::max_element(gains.begin(), gains.end());
  std::vector<std::uint8_t> best;
  std::vector<std::size_t> best_set1;
  for (std::uint64_t code = 1; code < codes; ++code) {
    if (gains[code] < top - kGainTolerance) continue;
    std::vector<std::size_t> set1{0};
    for (std::size_t j = 0; j + 1 < n; ++j) {
      if (!(code >> j & 1)) set1.push_back(j + 1);
    }
    if (best.empty() || set1 < best_set1) {
      best_set1 = std::move(set1);
      best.assign(n, 0);
      for (std::size_t j = 0; j + 1 < n; ++j) best[j + 1] = static_cast<std::uint8_t>(code >> j & 1);
    }
  }
  return make_bipartition(dense, best);
}

}  // namespace ofesi
