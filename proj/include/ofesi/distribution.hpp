#ifndef OFESI_DISTRIBUTION_HPP
#define OFESI_DISTRIBUTION_HPP

#include <cstdint>
#include <map>
#include <string>

namespace ofesi {

using Count = std::uint64_t;

/// Integer next-action counts. Zero entries are never stored and `total()`
/// always equals the sum of `counts()`. Probabilities are derived on demand.
class ActionDistribution {
 public:
  using Map = std::map<std::string, Count, std::less<>>;

  ActionDistribution() = default;
  ActionDistribution(std::initializer_list<std::pair<const std::string, Count>> init);

  void add(const std::string& action, Count n = 1);
  /// Removes `n` instances; throws InvalidInputError when fewer are present.
  void remove(const std::string& action, Count n = 1);

  ActionDistribution& operator+=(const ActionDistribution& other);

  Count count(std::string_view action) const;
  Count total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  const Map& counts() const noexcept { return counts_; }

  double probability(std::string_view action) const;

  /// Action with the largest count, ties broken lexicographically. Empty for
  /// an empty distribution.
  std::string dominant() const;

  friend bool operator==(const ActionDistribution&, const ActionDistribution&) = default;

 private:
  Map counts_;
  Count total_ = 0;
};

ActionDistribution operator+(ActionDistribution lhs, const ActionDistribution& rhs);

}  // namespace ofesi

#endif  // OFESI_DISTRIBUTION_HPP
