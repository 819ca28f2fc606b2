#include "ofesi/distribution.hpp"

#include "ofesi/errors.hpp"

namespace ofesi {

ActionDistribution::ActionDistribution(
    std::initializer_list<std::pair<const std::string, Count>> init) {
  for (const auto& [action, n] : init) add(action, n);
}

void ActionDistribution::add(const std::string& action, Count n) {
  if (n == 0) return;
  counts_[action] += n;
  total_ += n;
}

void ActionDistribution::remove(const std::string& action, Count n) {
  if (n == 0) return;
  auto it = counts_.find(action);
  if (it == counts_.end() || it->second < n) {
    throw InvalidInputError("cannot remove " + std::to_string(n) + " of action '" + action + "'");
  }
  it->second -= n;
  total_ -= n;
  if (it->second == 0) counts_.erase(it);
}

ActionDistribution& ActionDistribution::operator+=(const ActionDistribution& other) {
  for (const auto& [action, n] : other.counts_) add(action, n);
  return *this;
}

ActionDistribution operator+(ActionDistribution lhs, const ActionDistribution& rhs) {
  lhs += rhs;
  return lhs;
}

Count ActionDistribution::count(std::string_view action) const {
  auto it = counts_.find(action);
  return it == counts_.end() ? 0 : it->second;
}

double ActionDistribution::probability(std::string_view action) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(action)) / static_cast<double>(total_);
}

std::string ActionDistribution::dominant() const {
  std::string best;
  Count best_n = 0;
  // Map iteration is lexicographic, so strict > keeps the smallest name on ties.
  for (const auto& [action, n] : counts_) {
    if (n > best_n) {
      best = action;
      best_n = n;
    }
  }
  return best;
}

}  // namespace ofesi
