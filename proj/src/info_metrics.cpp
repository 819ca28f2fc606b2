#include "ofesi/info_metrics.hpp"

#include "ofesi/errors.hpp"

namespace ofesi {

namespace {

double entropy_unchecked(const ActionDistribution& dist) {
  const double t = static_cast<double>(dist.total());
  double h = 0.0;
  for (const auto& [action, c] : dist.counts()) {
    const double p = static_cast<double>(c) / t;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double entropy(const ActionDistribution& dist) {
  if (dist.empty()) throw InvalidInputError("entropy of an empty distribution");
  return entropy_unchecked(dist);
}

double split_gain(const ActionDistribution& parent, const ActionDistribution& part1,
                  const ActionDistribution& part2) {
  if (part1.empty() || part2.empty()) throw InvalidSplitError("split has an empty part");
  if (!(part1 + part2 == parent)) {
    throw InvalidSplitError("split parts do not sum to the parent distribution");
  }
  const double t = static_cast<double>(parent.total());
  const double children = (static_cast<double>(part1.total()) / t) * entropy_unchecked(part1) +
                          (static_cast<double>(part2.total()) / t) * entropy_unchecked(part2);
  const double g = entropy_unchecked(parent) - children;
  return g > 0.0 ? g : 0.0;
}

}  // namespace ofesi
