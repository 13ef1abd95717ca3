#ifndef CATREE_LINEARIZABILITY_HPP
#define CATREE_LINEARIZABILITY_HPP

/// \file
/// Linearizability checking of set histories over keys in [0, 64).
///
/// Searches for a sequential order of the operations that respects real-time
/// precedence and is legal for a set, exploring candidate orders depth first
/// and memoizing (linearized operations, abstract state) pairs already seen.

#include <cstdint>
#include <string>

#include "catree/history.hpp"

namespace catree {

enum class Verdict { ok, violation, inconclusive };

struct CheckResult {
  Verdict verdict = Verdict::ok;
  /// Search steps spent.
  std::uint64_t explored = 0;
  /// For violations: the operation that could not be linearized and the
  /// longest legal prefix found.
  std::string witness;
};

inline constexpr std::uint64_t kDefaultSearchBudget = 10'000'000;
inline constexpr std::int64_t kMaxCheckedKey = 63;

/// Throws std::invalid_argument if a key lies outside [0, 64) or an event
/// returns before it is invoked.
CheckResult check_linearizable(const History& history,
                               std::uint64_t budget = kDefaultSearchBudget);

}  // namespace catree

#endif  // CATREE_LINEARIZABILITY_HPP
