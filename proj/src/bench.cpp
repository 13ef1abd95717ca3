#include "catree/bench.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <type_traits>

#include "catree/coarse_set.hpp"

namespace catree::bench {

namespace {

using Clock = std::chrono::steady_clock;
using Tree = CATree<std::int64_t, std::int64_t>;
using Coarse = CoarseSet<std::int64_t, std::int64_t>;

constexpr unsigned kOpsBetweenClockChecks = 64;
constexpr std::uint64_t kPrefillStream = 0xFFFFFFFFULL;
constexpr auto kSizeSampleInterval = std::chrono::milliseconds{5};

struct alignas(64) Tally {
  std::uint64_t ops = 0;
  std::uint64_t updates = 0;
  std::uint64_t lookups = 0;
  std::uint64_t ranges = 0;
  std::uint64_t traversed = 0;
  std::uint64_t items = 0;
  std::int64_t sum = 0;
  Clock::time_point end{};
};

std::size_t set_size(const Tree& t) { return t.approximate_size(); }
std::size_t set_size(const Coarse& c) { return c.size(); }
std::size_t base_nodes(const Tree& t) { return t.debug_stats().base_nodes; }
std::size_t base_nodes(const Coarse&) { return 1; }

template <typename Visitor>
std::size_t range_query(Tree& t, std::int64_t lo, std::int64_t hi, Visitor&& v) {
  return t.range_query(lo, hi, v).base_nodes;
}
template <typename Visitor>
std::size_t range_query(Coarse& c, std::int64_t lo, std::int64_t hi, Visitor&& v) {
  c.range_query(lo, hi, v);
  return 1;
}

template <typename Set>
void execute(Set& set, const Op& op, Tally& tally) {
  switch (op.kind) {
    case OpKind::insert:
      set.insert(op.key, op.key);
      ++tally.updates;
      break;
    case OpKind::remove:
      set.remove(op.key);
      ++tally.updates;
      break;
    case OpKind::lookup:
      tally.sum += set.lookup(op.key).has_value();
      ++tally.lookups;
      break;
    case OpKind::range: {
      std::int64_t sum = 0;
      std::uint64_t count = 0;
      tally.traversed += range_query(set, op.key, op.hi, [&](const auto& item) {
        sum += item.value;
        ++count;
      });
      tally.sum += sum;
      tally.items += count;
      ++tally.ranges;
      break;
    }
  }
  ++tally.ops;
}

template <typename Set>
void prefill(Set& set, const WorkloadSpec& spec, unsigned run) {
  std::seed_seq seq{spec.seed, kPrefillStream, std::uint64_t{run}};
  std::mt19937_64 rng{seq};
  std::uniform_int_distribution<std::int64_t> key{0, spec.key_range - 1};
  for (std::int64_t i = 0; i < spec.key_range / 2; ++i) {
    const auto k = key(rng);
    set.insert(k, k);
  }
}

template <typename Set>
RunResult run_once(const WorkloadSpec& spec, unsigned stream_run, double seconds) {
  auto set = [&] {
    if constexpr (std::is_same_v<Set, Tree>)
      return std::make_unique<Tree>(spec.tree_config);
    else
      return std::make_unique<Set>();
  }();
  prefill(*set, spec, stream_run);

  RunResult r;
  r.size_before = set_size(*set);
  std::vector<Tally> tallies(spec.threads);
  std::barrier start{static_cast<std::ptrdiff_t>(spec.threads) + 1};
  const auto budget = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>{seconds});

  std::atomic<unsigned> finished{0};
  std::vector<std::thread> workers;
  workers.reserve(spec.threads);
  for (unsigned t = 0; t < spec.threads; ++t) {
    workers.emplace_back([&, t] {
      OpStream stream{spec, t, stream_run};
      Tally& tally = tallies[t];
      start.arrive_and_wait();
      const auto deadline = Clock::now() + budget;
      for (;;) {
        for (unsigned i = 0; i < kOpsBetweenClockChecks; ++i)
          execute(*set, stream.next(), tally);
        const auto now = Clock::now();
        if (now >= deadline) {
          tally.end = now;
          finished.fetch_add(1, std::memory_order_release);
          break;
        }
      }
    });
  }
  start.arrive_and_wait();
  const auto begin = Clock::now();
  // The set size drifts towards its steady state during the run, so density
  // is averaged over evenly spaced samples.
  double size_samples = static_cast<double>(r.size_before);
  std::size_t sample_count = 1;
  while (finished.load(std::memory_order_acquire) < spec.threads) {
    std::this_thread::sleep_for(kSizeSampleInterval);
    size_samples += static_cast<double>(set_size(*set));
    ++sample_count;
  }
  for (auto& w : workers) w.join();

  Clock::time_point last = begin;
  Tally total;
  for (const auto& t : tallies) {
    last = std::max(last, t.end);
    total.ops += t.ops;
    total.updates += t.updates;
    total.lookups += t.lookups;
    total.ranges += t.ranges;
    total.traversed += t.traversed;
    total.items += t.items;
    total.sum += t.sum;
    r.per_thread_ops.push_back(t.ops);
  }
  r.seconds = std::chrono::duration<double>(last - begin).count();
  const double us = r.seconds * 1e6;
  r.ops = total.ops;
  r.update_ops = total.updates;
  r.lookup_ops = total.lookups;
  r.range_ops = total.ranges;
  r.ops_per_us = us > 0 ? static_cast<double>(total.ops) / us : 0;
  r.update_ops_per_us = us > 0 ? static_cast<double>(total.updates) / us : 0;
  r.range_ops_per_us = us > 0 ? static_cast<double>(total.ranges) / us : 0;
  if (spec.mode == Mode::split_duty)
    r.range_throughput_scaled = r.range_ops_per_us * static_cast<double>(spec.fixed_range);
  if (total.ranges > 0) {
    r.traversed_per_rq = static_cast<double>(total.traversed) / static_cast<double>(total.ranges);
    r.avg_items_per_rq = static_cast<double>(total.items) / static_cast<double>(total.ranges);
  }
  r.range_sum = total.sum;
  r.size_after = set_size(*set);
  r.base_nodes = base_nodes(*set);

  if (spec.mode == Mode::mix && total.ranges > 0) {
    const double density =
        size_samples / static_cast<double>(sample_count) / static_cast<double>(spec.key_range);
    r.expected_items_per_rq = density * expected_keys_per_range(spec.key_range, spec.max_range);
    r.sanity_ok = std::abs(r.avg_items_per_rq - r.expected_items_per_rq) <=
                  kSanityTolerance * r.expected_items_per_rq;
  }
  set.reset();
  epoch::drain_quiescent();
  return r;
}

BenchResult run_all(const WorkloadSpec& spec, const RunCallback& on_run) {
  if (auto err = validate(spec); !err.empty()) throw std::invalid_argument(err);
  BenchResult result{spec, {}};
  const auto once = [&](unsigned stream_run, double seconds) {
    return spec.structure == Structure::catree ? run_once<Tree>(spec, stream_run, seconds)
                                               : run_once<Coarse>(spec, stream_run, seconds);
  };
  for (unsigned i = 0; i < spec.warmup_runs; ++i) {
    auto r = once(i, spec.warmup_seconds);
    r.run_index = i;
    if (on_run) on_run(r, true);
  }
  for (unsigned i = 0; i < spec.measure_runs; ++i) {
    auto r = once(spec.warmup_runs + i, spec.run_seconds);
    r.run_index = i;
    if (on_run) on_run(r, false);
    result.runs.push_back(std::move(r));
  }
  return result;
}

template <typename F>
double mean_of(const std::vector<RunResult>& runs, F f) {
  if (runs.empty()) return 0;
  double s = 0;
  for (const auto& r : runs) s += f(r);
  return s / static_cast<double>(runs.size());
}

}  // namespace

std::string_view to_string(Structure s) noexcept {
  return s == Structure::catree ? "catree" : "coarse";
}

std::string_view to_string(Mode m) noexcept {
  return m == Mode::mix ? "mix" : "split-duty";
}

void WorkloadSpec::set_mix(double updates, double lookups, double ranges) {
  insert_pct = updates / 2;
  remove_pct = updates / 2;
  lookup_pct = lookups;
  range_pct = ranges;
}

std::string validate(const WorkloadSpec& spec) {
  std::ostringstream err;
  if (spec.threads < 1) {
    err << "thread count must be at least 1";
  } else if (spec.key_range < 2) {
    err << "key range must be at least 2";
  } else if (spec.mode == Mode::mix) {
    const double pcts[] = {spec.insert_pct, spec.remove_pct, spec.lookup_pct, spec.range_pct};
    const double sum = std::accumulate(std::begin(pcts), std::end(pcts), 0.0);
    if (std::any_of(std::begin(pcts), std::end(pcts), [](double p) { return p < 0; }))
      err << "operation percentages must not be negative";
    else if (std::abs(sum - 100.0) > 1e-9)
      err << "operation percentages sum to " << sum << ", not 100";
    else if (spec.max_range < 1)
      err << "max range size must be at least 1";
  } else {
    if (spec.threads % 2 != 0)
      err << "split-duty mode needs an even thread count, got " << spec.threads;
    else if (spec.fixed_range < 1)
      err << "fixed range size must be at least 1";
  }
  if (err.tellp() == 0) {
    if (spec.measure_runs < 1)
      err << "at least one measured run is required";
    else if (!(spec.run_seconds > 0) || spec.warmup_seconds < 0)
      err << "run durations must be positive";
  }
  return err.str();
}

double expected_keys_per_range(std::int64_t key_range, std::int64_t max_range) {
  // For range size r <= S the covered counts over all start keys sum to
  // r(r+1)/2 + r(S-r); larger ranges cover S - k keys from start k.
  const auto s = static_cast<double>(key_range);
  double total = 0;
  for (std::int64_t r = 1; r <= max_range; ++r) {
    const auto rd = static_cast<double>(std::min(r, key_range));
    total += rd * (rd + 1) / 2 + rd * (s - rd);
  }
  return total / (static_cast<double>(max_range) * s);
}

OpStream::OpStream(const WorkloadSpec& spec, unsigned thread, unsigned run)
    : spec_{spec},
      range_thread_{spec.mode == Mode::split_duty && thread >= spec.threads / 2},
      rng_{[&] {
        std::seed_seq seq{spec.seed, std::uint64_t{thread}, std::uint64_t{run}};
        return std::mt19937_64{seq};
      }()} {}

Op OpStream::next() {
  std::uniform_int_distribution<std::int64_t> key{0, spec_.key_range - 1};
  if (spec_.mode == Mode::split_duty) {
    if (range_thread_) {
      const auto k = key(rng_);
      return {OpKind::range, k, k + spec_.fixed_range - 1};
    }
    const auto kind = (rng_() & 1U) ? OpKind::insert : OpKind::remove;
    return {kind, key(rng_), 0};
  }
  const double p = std::uniform_real_distribution<double>{0, 100}(rng_);
  const auto k = key(rng_);
  if (p < spec_.insert_pct) return {OpKind::insert, k, 0};
  if (p < spec_.insert_pct + spec_.remove_pct) return {OpKind::remove, k, 0};
  if (p < spec_.insert_pct + spec_.remove_pct + spec_.lookup_pct) return {OpKind::lookup, k, 0};
  const auto size = std::uniform_int_distribution<std::int64_t>{1, spec_.max_range}(rng_);
  return {OpKind::range, k, k + size - 1};
}

BenchResult run_mix(const WorkloadSpec& spec, const RunCallback& on_run) {
  if (spec.mode != Mode::mix) throw std::invalid_argument("run_mix needs mix mode");
  return run_all(spec, on_run);
}

BenchResult run_split_duty(const WorkloadSpec& spec, const RunCallback& on_run) {
  if (spec.mode != Mode::split_duty)
    throw std::invalid_argument("run_split_duty needs split-duty mode");
  return run_all(spec, on_run);
}

BenchResult run(const WorkloadSpec& spec, const RunCallback& on_run) {
  return run_all(spec, on_run);
}

double BenchResult::mean_ops_per_us() const {
  return mean_of(runs, [](const RunResult& r) { return r.ops_per_us; });
}

double BenchResult::min_ops_per_us() const {
  double m = runs.empty() ? 0 : runs.front().ops_per_us;
  for (const auto& r : runs) m = std::min(m, r.ops_per_us);
  return m;
}

double BenchResult::max_ops_per_us() const {
  double m = 0;
  for (const auto& r : runs) m = std::max(m, r.ops_per_us);
  return m;
}

double BenchResult::mean_update_ops_per_us() const {
  return mean_of(runs, [](const RunResult& r) { return r.update_ops_per_us; });
}

double BenchResult::mean_range_ops_per_us() const {
  return mean_of(runs, [](const RunResult& r) { return r.range_ops_per_us; });
}

double BenchResult::mean_traversed_per_rq() const {
  return mean_of(runs, [](const RunResult& r) { return r.traversed_per_rq; });
}

bool BenchResult::sanity_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.sanity_ok; });
}

}  // namespace catree::bench
