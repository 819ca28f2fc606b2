#ifndef OFESI_INFO_METRICS_HPP
#define OFESI_INFO_METRICS_HPP

#include <cmath>

#include <Eigen/Core>

#include "ofesi/distribution.hpp"

namespace ofesi {

/// Comparison slack for gains; keeps near-equal candidates from flapping.
inline constexpr double kGainTolerance = 1e-12;

/// Shannon entropy in bits of a nonnegative count vector. Zero entries
/// contribute nothing. Returns 0 for an all-zero vector.
template <typename Derived>
double entropy_bits(const Eigen::DenseBase<Derived>& counts) {
  using Scalar = typename Derived::Scalar;
  Scalar total = counts.sum();
  if (total <= Scalar(0)) return 0.0;
  const double t = static_cast<double>(total);
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const auto c = counts.derived().coeff(i);
    if (c > Scalar(0)) {
      const double p = static_cast<double>(c) / t;
      h -= p * std::log2(p);
    }
  }
  return h;
}

/// Gain of splitting `left + right` into the two parts. The weighted child
/// terms are summed before subtracting, so swapping parts is bit-exact.
template <typename DerivedA, typename DerivedB>
double split_gain_bits(const Eigen::DenseBase<DerivedA>& left,
                       const Eigen::DenseBase<DerivedB>& right) {
  const double tl = static_cast<double>(left.sum());
  const double tr = static_cast<double>(right.sum());
  const double t = tl + tr;
  if (t <= 0.0) return 0.0;
  const double parent = entropy_bits(left.derived() + right.derived());
  const double children = (tl / t) * entropy_bits(left) + (tr / t) * entropy_bits(right);
  const double g = parent - children;
  return g > 0.0 ? g : 0.0;
}

/// Entropy of the next-action distribution, in bits. Throws
/// InvalidInputError on an empty distribution.
double entropy(const ActionDistribution& dist);

/// Information gain of splitting `parent` into `part1` and `part2`, in bits.
/// The parts must be nonempty and sum entry-wise to the parent, otherwise
/// InvalidSplitError.
double split_gain(const ActionDistribution& parent, const ActionDistribution& part1,
                  const ActionDistribution& part2);

}  // namespace ofesi

#endif  // OFESI_INFO_METRICS_HPP
