#ifndef CATREE_BENCH_HPP
#define CATREE_BENCH_HPP

/// \file
/// Throughput benchmarks over integer keys.
///
/// mix: every thread draws operations by percentage; range sizes are uniform
/// in [1, R]. split-duty: half the threads update (insert and remove with
/// equal probability), the other half run range queries of one fixed size.
/// Keys and range start keys are uniform in [0, S). Each run uses a fresh
/// structure prefilled with S/2 random inserts.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "catree/ca_tree.hpp"
#include "catree/history.hpp"

namespace catree::bench {

enum class Structure { catree, coarse };
enum class Mode { mix, split_duty };

std::string_view to_string(Structure s) noexcept;
std::string_view to_string(Mode m) noexcept;

struct WorkloadSpec {
  Structure structure = Structure::catree;
  Mode mode = Mode::mix;
  unsigned threads = 1;
  std::int64_t key_range = 1'000'000;
  /// Upper bound of range sizes in mix mode.
  std::int64_t max_range = 1000;
  /// Range size in split-duty mode.
  std::int64_t fixed_range = 100;
  double insert_pct = 10;
  double remove_pct = 10;
  double lookup_pct = 55;
  double range_pct = 25;
  unsigned warmup_runs = 3;
  unsigned measure_runs = 3;
  double warmup_seconds = 1.0;
  double run_seconds = 2.0;
  std::uint64_t seed = 1;
  Config tree_config{};

  /// Sets the insert/remove/lookup/range shares from "updates, lookups,
  /// ranges" percentages; updates are split evenly between insert and remove.
  void set_mix(double updates, double lookups, double ranges);
  [[nodiscard]] std::int64_t range_size_param() const noexcept {
    return mode == Mode::mix ? max_range : fixed_range;
  }
};

/// Empty if spec is runnable, otherwise a description of the first problem.
std::string validate(const WorkloadSpec& spec);

struct RunResult {
  unsigned run_index = 0;
  double seconds = 0;
  std::uint64_t ops = 0;
  std::uint64_t update_ops = 0;
  std::uint64_t lookup_ops = 0;
  std::uint64_t range_ops = 0;
  std::vector<std::uint64_t> per_thread_ops;
  double ops_per_us = 0;
  double update_ops_per_us = 0;
  double range_ops_per_us = 0;
  /// split-duty only: range ops/us times the fixed range size.
  double range_throughput_scaled = 0;
  std::size_t base_nodes = 0;
  double traversed_per_rq = 0;
  double avg_items_per_rq = 0;
  /// Range-sum checksum; keeps the traversal from being optimized away.
  std::int64_t range_sum = 0;
  std::size_t size_before = 0;
  std::size_t size_after = 0;
  /// mix mode with range queries: analytic items per range query given the
  /// measured density, and whether the measurement is within tolerance.
  double expected_items_per_rq = 0;
  bool sanity_ok = true;
};

struct BenchResult {
  WorkloadSpec spec;
  std::vector<RunResult> runs;

  [[nodiscard]] double mean_ops_per_us() const;
  [[nodiscard]] double min_ops_per_us() const;
  [[nodiscard]] double max_ops_per_us() const;
  [[nodiscard]] double mean_update_ops_per_us() const;
  [[nodiscard]] double mean_range_ops_per_us() const;
  [[nodiscard]] double mean_traversed_per_rq() const;
  [[nodiscard]] bool sanity_ok() const;
};

inline constexpr double kSanityTolerance = 0.10;

/// Mean number of keys in [0, S) covered by a range [k, k + r - 1] with k
/// uniform in [0, S) and r uniform in [1, R].
double expected_keys_per_range(std::int64_t key_range, std::int64_t max_range);

/// Operation drawn by a worker.
struct Op {
  OpKind kind;
  std::int64_t key;
  std::int64_t hi;
};

/// Deterministic per-thread operation source seeded from (seed, thread, run).
class OpStream {
 public:
  OpStream(const WorkloadSpec& spec, unsigned thread, unsigned run);
  Op next();

 private:
  const WorkloadSpec& spec_;
  bool range_thread_ = false;
  std::mt19937_64 rng_;
};

/// Called after each run; warmup is true for warmup runs.
using RunCallback = std::function<void(const RunResult&, bool warmup)>;

/// Throws std::invalid_argument if validate(spec) fails.
BenchResult run_mix(const WorkloadSpec& spec, const RunCallback& on_run = {});
BenchResult run_split_duty(const WorkloadSpec& spec, const RunCallback& on_run = {});
BenchResult run(const WorkloadSpec& spec, const RunCallback& on_run = {});

/// Writes the CSV header and one row per measured run of every result.
void write_csv(std::ostream& out, const std::vector<BenchResult>& results);
/// Throws std::runtime_error naming path if it cannot be written.
void write_csv_file(const std::string& path, const std::vector<BenchResult>& results);
void write_summary(std::ostream& out, const BenchResult& result);

}  // namespace catree::bench

#endif  // CATREE_BENCH_HPP
