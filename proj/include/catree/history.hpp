#ifndef CATREE_HISTORY_HPP
#define CATREE_HISTORY_HPP

/// \file
/// Recording of concurrent operation histories over integer keys.
///
/// Each worker thread appends to its own log; logs are merged after the run.
/// Point operations record whether the key was present when the operation
/// took effect (insert: an item was replaced; remove: an item was removed;
/// lookup: found). Range queries record the visited keys.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace catree {

enum class OpKind : std::uint8_t { insert, remove, lookup, range };

std::string_view to_string(OpKind op) noexcept;
/// Throws std::invalid_argument for unknown names.
OpKind parse_op_kind(std::string_view name);

struct HistoryEvent {
  std::uint32_t thread = 0;
  OpKind op = OpKind::lookup;
  /// Key, or the lower bound of a range.
  std::int64_t arg = 0;
  /// Upper bound of a range; unused otherwise.
  std::int64_t arg_hi = 0;
  std::int64_t invoke_ns = 0;
  std::int64_t return_ns = 0;
  bool present = false;
  std::vector<std::int64_t> keys;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

using History = std::vector<HistoryEvent>;

/// Monotonic nanoseconds relative to a common origin.
class HistoryClock {
 public:
  HistoryClock() : origin_{std::chrono::steady_clock::now()} {}
  [[nodiscard]] std::int64_t now() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - origin_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point origin_;
};

/// Runs one operation against set and returns its event. Set provides
/// insert(k, v), remove(k), lookup(k) returning optionals, and
/// range_query(lo, hi, visitor). Values are the keys themselves.
template <typename Set>
HistoryEvent run_recorded(Set& set, const HistoryClock& clock, std::uint32_t thread,
                          OpKind op, std::int64_t arg, std::int64_t arg_hi = 0) {
  HistoryEvent e;
  e.thread = thread;
  e.op = op;
  e.arg = arg;
  e.arg_hi = arg_hi;
  e.invoke_ns = clock.now();
  switch (op) {
    case OpKind::insert:
      e.present = set.insert(arg, arg).has_value();
      break;
    case OpKind::remove:
      e.present = set.remove(arg).has_value();
      break;
    case OpKind::lookup:
      e.present = set.lookup(arg).has_value();
      break;
    case OpKind::range:
      set.range_query(arg, arg_hi, [&](const auto& item) { e.keys.push_back(item.key); });
      break;
  }
  e.return_ns = clock.now();
  return e;
}

/// Concatenates per-thread logs and orders the result by invocation time.
History merge_logs(std::vector<History> logs);

/// One event per line: thread, op, args, invokeNs, returnNs, result, separated
/// by tabs. Args are "k" or "lo,hi"; the result is 0/1 for point operations
/// and a comma-separated key list ("-" when empty) for ranges.
void write_tsv(std::ostream& out, const History& history);
/// Throws std::runtime_error with the offending line number on malformed input.
History read_tsv(std::istream& in);

}  // namespace catree

#endif  // CATREE_HISTORY_HPP
