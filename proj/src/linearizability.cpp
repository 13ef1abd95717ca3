#include "catree/linearizability.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace catree {

namespace {

using State = std::uint64_t;

std::uint64_t bit(std::int64_t key) { return std::uint64_t{1} << key; }

std::uint64_t range_mask(std::int64_t lo, std::int64_t hi) {
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min<std::int64_t>(hi, kMaxCheckedKey);
  if (hi < lo) return 0;
  const auto upper = hi == kMaxCheckedKey ? ~std::uint64_t{0} : bit(hi + 1) - 1;
  return upper & ~(bit(lo) - 1);
}

// Legal effect of e on state, or nullopt if e cannot take effect in state.
std::optional<State> step(State state, const HistoryEvent& e) {
  switch (e.op) {
    case OpKind::insert:
      if (((state & bit(e.arg)) != 0) != e.present) return std::nullopt;
      return state | bit(e.arg);
    case OpKind::remove:
      if (((state & bit(e.arg)) != 0) != e.present) return std::nullopt;
      return state & ~bit(e.arg);
    case OpKind::lookup:
      if (((state & bit(e.arg)) != 0) != e.present) return std::nullopt;
      return state;
    case OpKind::range: {
      std::uint64_t seen = 0;
      std::int64_t prev = -1;
      for (const auto k : e.keys) {
        if (k <= prev || k < e.arg || k > e.arg_hi) return std::nullopt;
        seen |= bit(k);
        prev = k;
      }
      if ((state & range_mask(e.arg, e.arg_hi)) != seen) return std::nullopt;
      return state;
    }
  }
  return std::nullopt;
}

void validate(const History& history) {
  for (const auto& e : history) {
    const bool range = e.op == OpKind::range;
    const auto bad = [](std::int64_t k) { return k < 0 || k > kMaxCheckedKey; };
    if ((!range && bad(e.arg)) ||
        std::any_of(e.keys.begin(), e.keys.end(), bad))
      throw std::invalid_argument("check_linearizable: key outside [0, 64)");
    if (e.return_ns < e.invoke_ns)
      throw std::invalid_argument("check_linearizable: event returns before invocation");
  }
}

struct Entry {
  std::size_t op;
  bool is_call;
  Entry* match = nullptr;
  Entry* prev = nullptr;
  Entry* next = nullptr;
};

struct Config {
  std::vector<std::uint64_t> linearized;
  State state;
  friend bool operator==(const Config&, const Config&) = default;
};

struct ConfigHash {
  std::size_t operator()(const Config& c) const noexcept {
    std::uint64_t h = c.state * 0x9E3779B97F4A7C15ULL;
    for (const auto w : c.linearized) h = (h ^ w) * 0x100000001B3ULL + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

void lift(Entry* call) {
  call->prev->next = call->next;
  if (call->next) call->next->prev = call->prev;
  Entry* ret = call->match;
  ret->prev->next = ret->next;
  if (ret->next) ret->next->prev = ret->prev;
}

void unlift(Entry* call) {
  Entry* ret = call->match;
  ret->prev->next = ret;
  if (ret->next) ret->next->prev = ret;
  call->prev->next = call;
  if (call->next) call->next->prev = call;
}

std::string describe(const HistoryEvent& e) {
  std::ostringstream s;
  s << "thread " << e.thread << ' ' << to_string(e.op) << '(' << e.arg;
  if (e.op == OpKind::range) s << ',' << e.arg_hi;
  s << ") -> ";
  if (e.op != OpKind::range) {
    s << (e.present ? "present" : "absent");
  } else {
    s << '{';
    for (std::size_t i = 0; i < e.keys.size(); ++i) s << (i ? "," : "") << e.keys[i];
    s << '}';
  }
  s << " [" << e.invoke_ns << ", " << e.return_ns << ']';
  return s.str();
}

}  // namespace

CheckResult check_linearizable(const History& history, std::uint64_t budget) {
  validate(history);
  CheckResult result;
  const auto n = history.size();
  if (n == 0) return result;

  std::vector<Entry> entries;
  entries.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({i, true});
    entries.push_back({i, false});
  }
  for (std::size_t i = 0; i < n; ++i) {
    entries[2 * i].match = &entries[2 * i + 1];
    entries[2 * i + 1].match = &entries[2 * i];
  }
  std::vector<Entry*> order;
  order.reserve(2 * n);
  for (auto& e : entries) order.push_back(&e);
  const auto time_of = [&](const Entry* e) {
    return e->is_call ? history[e->op].invoke_ns : history[e->op].return_ns;
  };
  // Calls sort before returns at equal times, treating touching operations as
  // concurrent.
  std::stable_sort(order.begin(), order.end(), [&](const Entry* a, const Entry* b) {
    const auto ta = time_of(a);
    const auto tb = time_of(b);
    if (ta != tb) return ta < tb;
    return a->is_call && !b->is_call;
  });

  Entry head{0, true};
  Entry* prev = &head;
  for (auto* e : order) {
    prev->next = e;
    e->prev = prev;
    prev = e;
  }

  Config current{std::vector<std::uint64_t>((n + 63) / 64, 0), 0};
  std::unordered_set<Config, ConfigHash> cache;
  struct Frame {
    Entry* call;
    State state;
  };
  std::vector<Frame> stack;
  std::vector<std::size_t> best_prefix;
  std::size_t blocked_op = 0;

  Entry* entry = head.next;
  while (head.next != nullptr) {
    if (++result.explored > budget) {
      result.verdict = Verdict::inconclusive;
      return result;
    }
    if (entry->is_call) {
      const auto next_state = step(current.state, history[entry->op]);
      if (next_state) {
        auto& word = current.linearized[entry->op / 64];
        const auto mask = std::uint64_t{1} << (entry->op % 64);
        word |= mask;
        const auto saved = current.state;
        current.state = *next_state;
        if (cache.insert(current).second) {
          stack.push_back({entry, saved});
          lift(entry);
          entry = head.next;
          continue;
        }
        word &= ~mask;
        current.state = saved;
      }
      entry = entry->next;
      continue;
    }
    // A return whose call is still pending: the current prefix is a dead end.
    if (stack.size() >= best_prefix.size()) {
      best_prefix.clear();
      for (const auto& f : stack) best_prefix.push_back(f.call->op);
      blocked_op = entry->op;
    }
    if (stack.empty()) {
      result.verdict = Verdict::violation;
      std::ostringstream w;
      w << "cannot linearize: " << describe(history[blocked_op]) << '\n'
        << "longest legal prefix (" << best_prefix.size() << " ops):";
      for (const auto op : best_prefix) w << "\n  " << describe(history[op]);
      result.witness = w.str();
      return result;
    }
    const auto frame = stack.back();
    stack.pop_back();
    current.linearized[frame.call->op / 64] &= ~(std::uint64_t{1} << (frame.call->op % 64));
    current.state = frame.state;
    unlift(frame.call);
    entry = frame.call->next;
  }
  return result;
}

}  // namespace catree
