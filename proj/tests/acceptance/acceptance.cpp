// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails.
//
//   acceptance                 run every criterion
//   acceptance --criterion 4   run only criterion 4 (repeatable)

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "catree/bench.hpp"
#include "catree/ca_tree.hpp"
#include "catree/coarse_set.hpp"
#include "catree/linearizability.hpp"
#include "catree/oracle.hpp"
#include "catree/structure_check.hpp"
#include "support/stress.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using Key = std::int64_t;
using Tree = catree::CATree<Key, Key>;
using Coarse = catree::CoarseSet<Key, Key>;
using Oracle = catree::OracleSet<Key, Key>;
using Items = std::vector<std::pair<Key, Key>>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream s;
  s.precision(4);
  (s << ... << parts);
  return s.str();
}

unsigned hardware_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

template <typename Set>
Items all_items(Set& s) {
  Items out;
  s.range_query(INT64_MIN, INT64_MAX, [&](const auto& i) { out.emplace_back(i.key, i.value); });
  return out;
}

// Runs ops random operations (equal shares of insert, remove, lookup, range)
// on set and oracle; returns a description of the first mismatch, or "".
template <typename Set>
std::string differential(Set& set, Oracle& oracle, std::mt19937_64& rng, long ops, Key key_range,
                         Key max_range) {
  std::uniform_int_distribution<Key> key{0, key_range - 1};
  std::uniform_int_distribution<Key> size{1, max_range};
  Items got;
  Items want;
  for (long i = 0; i < ops; ++i) {
    const auto k = key(rng);
    const auto kind = rng() % 4;
    if (kind == 3) {
      const auto hi = k + size(rng) - 1;
      got.clear();
      want.clear();
      set.range_query(k, hi, [&](const auto& it) { got.emplace_back(it.key, it.value); });
      oracle.range_query(k, hi, [&](const auto& it) { want.emplace_back(it.key, it.value); });
      if (got != want) return cat("op ", i, ": range [", k, ",", hi, "] differs");
      continue;
    }
    std::optional<catree::Item<Key, Key>> a;
    std::optional<catree::Item<Key, Key>> b;
    if (kind == 0) {
      const auto v = static_cast<Key>(rng() % 1'000'000);
      a = set.insert(k, v);
      b = oracle.insert(k, v);
    } else if (kind == 1) {
      a = set.remove(k);
      b = oracle.remove(k);
    } else {
      a = set.lookup(k);
      b = oracle.lookup(k);
    }
    if (a.has_value() != b.has_value() || (a && (a->key != b->key || a->value != b->value)))
      return cat("op ", i, ": result for key ", k, " differs");
  }
  return {};
}

Outcome oracle_equivalence() {
  constexpr long kOps = 1'000'000;
  std::mt19937_64 rng_tree{101};
  std::mt19937_64 rng_coarse{101};
  Tree tree;
  Coarse coarse;
  Oracle o1;
  Oracle o2;
  auto err = differential(tree, o1, rng_tree, kOps, 10'000, 100);
  if (!err.empty()) return {false, "catree " + err};
  err = differential(coarse, o2, rng_coarse, kOps, 10'000, 100);
  if (!err.empty()) return {false, "coarse " + err};
  if (all_items(tree) != all_items(o1) || all_items(coarse) != all_items(o2))
    return {false, "final contents differ"};
  return {true, cat(kOps, " ops each on catree and coarse, all results equal; final size ",
                    o1.size())};
}

Outcome treap_persistence() {
  using T = catree::Treap<Key, Key>;
  std::mt19937_64 rng{202};
  std::uint64_t checks = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    std::vector<T> roots{T{}};
    std::vector<Items> snapshots{{}};
    for (int i = 0; i < 200; ++i) {
      const auto k = static_cast<Key>(rng() % 100);
      roots.push_back(rng() % 3 ? roots.back().insert({k, i}, rng) : roots.back().remove(k));
      Items c;
      roots.back().for_each_in_range(INT64_MIN, INT64_MAX,
                                     [&](const auto& it) { c.emplace_back(it.key, it.value); });
      snapshots.push_back(std::move(c));
      for (std::size_t j = 0; j < roots.size(); ++j) {
        Items now;
        roots[j].for_each_in_range(INT64_MIN, INT64_MAX,
                                   [&](const auto& it) { now.emplace_back(it.key, it.value); });
        ++checks;
        if (now != snapshots[j])
          return {false, cat("sequence ", seq, " step ", i, ": version ", j, " changed")};
      }
    }
  }
  return {true, cat("1000 sequences of 200 ops, ", checks, " version re-checks, none changed")};
}

Outcome structural_validation() {
  constexpr long kPhaseOps = 50'000;
  catree::Config split_phase;
  split_phase.split_threshold = 0;
  // Uncontended single-threaded acquisitions would otherwise drive the
  // statistics negative and never reach the split threshold.
  split_phase.uncontended_delta = 1;
  catree::Config join_phase;
  join_phase.join_threshold = 0;

  Tree tree{split_phase};
  Oracle oracle;
  std::mt19937_64 rng{303};
  auto err = differential(tree, oracle, rng, kPhaseOps, 10'000, 100);
  if (!err.empty()) return {false, "split phase " + err};
  const auto after_split = catree::validate_structure(tree);
  if (!after_split.ok()) return {false, "after split phase: " + after_split.error};
  if (after_split.items != oracle.size() || all_items(tree) != all_items(oracle))
    return {false, "contents differ after split phase"};

  tree.reconfigure(join_phase);
  err = differential(tree, oracle, rng, kPhaseOps, 10'000, 100);
  if (!err.empty()) return {false, "join phase " + err};
  const auto after_join = catree::validate_structure(tree);
  if (!after_join.ok()) return {false, "after join phase: " + after_join.error};
  if (after_join.items != oracle.size() || all_items(tree) != all_items(oracle))
    return {false, "contents differ after join phase"};
  if (after_split.base_nodes <= 1 || after_join.base_nodes >= after_split.base_nodes)
    return {false, cat("adaptation did not happen: base nodes ", after_split.base_nodes, " then ",
                       after_join.base_nodes)};
  return {true, cat("structure valid and contents equal; base nodes 1 -> ", after_split.base_nodes,
                    " (split phase, depth ", after_split.depth, ") -> ", after_join.base_nodes,
                    " (join phase)")};
}

template <typename Hooks>
catree::CheckResult check_one(std::uint64_t seed, unsigned optimistic_attempts) {
  catree::CATree<Key, Key, Hooks> tree{catree::testing::churn_config(optimistic_attempts)};
  catree::testing::StressSpec spec;
  spec.seed = seed;
  return catree::check_linearizable(catree::testing::record_stress(tree, spec));
}

template <typename Hooks>
int histories_until_violation(unsigned optimistic_attempts, std::uint64_t seed_base) {
  for (int i = 1; i <= 100; ++i)
    if (check_one<Hooks>(seed_base + i, optimistic_attempts).verdict == catree::Verdict::violation)
      return i;
  return 0;
}

Outcome linearizability() {
  int ok = 0;
  int violations = 0;
  int inconclusive = 0;
  std::string first_witness;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const unsigned attempts = seed % 4 < 2 ? 2 : 0;
    const auto r = seed % 2 ? check_one<catree::testing::YieldingHooks>(seed, attempts)
                            : check_one<catree::NoHooks>(seed, attempts);
    if (r.verdict == catree::Verdict::ok) ++ok;
    if (r.verdict == catree::Verdict::inconclusive) ++inconclusive;
    if (r.verdict == catree::Verdict::violation) {
      ++violations;
      if (first_witness.empty()) first_witness = r.witness.substr(0, r.witness.find('\n'));
    }
  }
  if (ok != 100)
    return {false, cat(ok, "/100 histories linearizable, ", violations, " violations, ",
                       inconclusive, " inconclusive; ", first_witness)};
  const int f1 = histories_until_violation<catree::testing::SkipValidRecheck>(2, 1000);
  const int f2 = histories_until_violation<catree::testing::SkipSequenceValidation>(2, 2000);
  const int f3 = histories_until_violation<catree::testing::UnlockBeforeCopy>(0, 3000);
  const auto show = [](int n) { return n ? cat("caught after ", n) : std::string{"NOT caught"}; };
  return {f1 && f2 && f3,
          cat("100/100 histories linearizable, 0 inconclusive; faults: skipped valid recheck ",
              show(f1), ", skipped sequence validation ", show(f2),
              ", unlock before copying roots ", show(f3))};
}

Outcome adaptation_dynamics() {
  constexpr Key kKeys = 1000;
  Tree tree;
  const auto initial = tree.debug_stats().base_nodes;
  std::vector<std::thread> threads;
  const auto stop_at = Clock::now() + std::chrono::seconds{2};
  for (unsigned t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      std::mt19937_64 rng{500 + t};
      std::uniform_int_distribution<Key> key{0, kKeys - 1};
      while (Clock::now() < stop_at) {
        for (int i = 0; i < 64; ++i) {
          const auto k = key(rng);
          if (rng() & 1U)
            tree.insert(k, k);
          else
            tree.remove(k);
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  const auto grown = tree.debug_stats().base_nodes;

  std::uint64_t queries = 0;
  const auto range_until = Clock::now() + std::chrono::seconds{2};
  while (Clock::now() < range_until) {
    tree.range_query(0, kKeys - 1, [](const auto&) {});
    ++queries;
  }
  const auto shrunk = tree.debug_stats().base_nodes;
  const auto report = catree::validate_structure(tree);
  const bool pass = initial == 1 && grown >= 8 && shrunk * 2 <= grown && report.ok();
  return {pass, cat("base nodes ", initial, " -> ", grown, " after 8 updating threads (need >= 8), -> ",
                    shrunk, " after ", queries, " full range queries (need <= ", grown / 2, ")",
                    report.ok() ? "" : "; structure: " + report.error)};
}

catree::bench::WorkloadSpec desk_spec() {
  catree::bench::WorkloadSpec s;
  s.key_range = 1'000'000;
  s.warmup_runs = 0;
  s.measure_runs = 3;
  s.run_seconds = 2.0;
  return s;
}

Outcome table1_trend() {
  using namespace catree::bench;
  const unsigned threads = 2 * hardware_threads();
  std::string detail = cat("threads ", threads, "; traversed base nodes per range query:");
  bool pass = true;
  for (const std::int64_t size : {2, 8, 32, 128, 8192, 32768, 131072}) {
    auto s = desk_spec();
    s.mode = Mode::split_duty;
    s.threads = threads;
    s.fixed_range = size;
    const auto r = run_split_duty(s);
    double worst = 0;
    std::size_t bases = 0;
    for (const auto& run : r.runs) {
      worst = std::max(worst, run.traversed_per_rq);
      bases = std::max(bases, run.base_nodes);
    }
    const double limit = size <= 128 ? 2.0 : static_cast<double>(size) / 256;
    const bool ok = worst <= limit;
    pass &= ok;
    detail += cat(" ", size, "=", worst, ok ? "" : "(over)", "/", bases, "bn");
  }
  return {pass, detail};
}

Outcome sanity_check() {
  using namespace catree::bench;
  struct MixCase {
    Structure structure;
    double updates, lookups, ranges;
    std::int64_t key_range, max_range;
    unsigned threads;
  };
  const MixCase cases[] = {
      {Structure::catree, 20, 55, 25, 1'000'000, 1000, 2},
      {Structure::coarse, 20, 55, 25, 1'000'000, 1000, 2},
      {Structure::catree, 50, 25, 25, 10'000, 100, 4},
      {Structure::catree, 10, 0, 90, 100'000, 10'000, 2},
      {Structure::coarse, 50, 0, 50, 100'000, 100, 4},
      {Structure::catree, 0, 0, 100, 1000, 2000, 1},
  };
  int runs = 0;
  double worst = 0;
  for (const auto& c : cases) {
    WorkloadSpec s;
    s.structure = c.structure;
    s.set_mix(c.updates, c.lookups, c.ranges);
    s.key_range = c.key_range;
    s.max_range = c.max_range;
    s.threads = c.threads;
    s.warmup_runs = 0;
    s.measure_runs = 2;
    s.run_seconds = 1.0;
    const auto r = run_mix(s);
    for (const auto& run : r.runs) {
      ++runs;
      const double dev =
          std::abs(run.avg_items_per_rq - run.expected_items_per_rq) / run.expected_items_per_rq;
      worst = std::max(worst, dev);
      if (!run.sanity_ok)
        return {false, cat(to_string(c.structure), " S=", c.key_range, " R=", c.max_range,
                           ": measured ", run.avg_items_per_rq, " items per range query, expected ",
                           run.expected_items_per_rq)};
    }
  }
  return {true, cat(runs, " mix runs, largest deviation from expected items per range query ",
                    worst * 100, "% (limit 10%)")};
}

Outcome scaling_smoke() {
  using namespace catree::bench;
  const unsigned max_threads = hardware_threads();
  auto mix = desk_spec();
  mix.set_mix(20, 55, 25);
  mix.max_range = 1000;
  mix.warmup_runs = 1;
  mix.warmup_seconds = 1.0;
  mix.threads = 1;
  const double one = run_mix(mix).mean_ops_per_us();
  mix.threads = max_threads;
  const double many = run_mix(mix).mean_ops_per_us();

  auto duty = desk_spec();
  duty.mode = Mode::split_duty;
  duty.fixed_range = 32768;
  duty.threads = std::max(8U, max_threads + max_threads % 2);
  duty.warmup_runs = 1;
  duty.warmup_seconds = 1.0;
  const double ca_updates = run_split_duty(duty).mean_update_ops_per_us();
  duty.structure = Structure::coarse;
  const double coarse_updates = run_split_duty(duty).mean_update_ops_per_us();

  const double scale = one > 0 ? many / one : 0;
  const double versus = coarse_updates > 0 ? ca_updates / coarse_updates : 0;
  return {scale >= 2.0 && versus >= 2.0,
          cat("hardware threads ", max_threads, "; mix ops/us 1 thread ", one, ", ", max_threads,
              " threads ", many, " (ratio ", scale, ", need >= 2); split-duty 32K at ",
              duty.threads, " threads, update ops/us catree ", ca_updates, " vs coarse ",
              coarse_updates, " (ratio ", versus, ", need >= 2)")};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--criterion", selected, "criterion number (1-8); repeatable")
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 60, oracle_equivalence},
      {2, "treap persistence", 30, treap_persistence},
      {3, "structural validation under forced adaptation", 30, structural_validation},
      {4, "linearizability and fault injection", 600, linearizability},
      {5, "adaptation dynamics", 30, adaptation_dynamics},
      {6, "traversed base nodes per range query trend", 300, table1_trend},
      {7, "items per range query sanity check", 300, sanity_check},
      {8, "scaling smoke", 300, scaling_smoke},
  };

  bool all_pass = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, cat("exception: ", e.what())};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs > c.time_limit_s) {
      out.pass = false;
      out.detail += cat("; exceeded time limit of ", c.time_limit_s, " s");
    }
    all_pass &= out.pass;
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " " << c.name
              << ": " << out.detail << " (" << cat(secs) << " s)" << std::endl;
  }
  return all_pass ? 0 : 1;
}
