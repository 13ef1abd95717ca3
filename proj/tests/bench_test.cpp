#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "catree/bench.hpp"

namespace {

using namespace catree::bench;

WorkloadSpec small_spec() {
  WorkloadSpec s;
  s.threads = 2;
  s.key_range = 10000;
  s.max_range = 100;
  s.warmup_runs = 0;
  s.measure_runs = 1;
  s.run_seconds = 0.2;
  return s;
}

TEST(Bench, SpecValidation) {
  auto s = small_spec();
  EXPECT_EQ(validate(s), "");
  s.set_mix(20, 55, 30);
  EXPECT_NE(validate(s), "");
  s = small_spec();
  s.key_range = 1;
  EXPECT_NE(validate(s), "");
  s = small_spec();
  s.max_range = 0;
  EXPECT_NE(validate(s), "");
  s = small_spec();
  s.mode = Mode::split_duty;
  s.threads = 3;
  EXPECT_NE(validate(s).find("even"), std::string::npos);
  EXPECT_THROW((void)run(s), std::invalid_argument);
  s.threads = 0;
  EXPECT_NE(validate(s), "");
}

TEST(Bench, ExpectedKeysPerRangeMatchesEnumeration) {
  for (const auto& [S, R] : {std::pair<std::int64_t, std::int64_t>{10, 3}, {7, 7}, {5, 9}, {100, 1}}) {
    double total = 0;
    for (std::int64_t r = 1; r <= R; ++r)
      for (std::int64_t k = 0; k < S; ++k) total += static_cast<double>(std::min(r, S - k));
    EXPECT_NEAR(expected_keys_per_range(S, R), total / static_cast<double>(R * S), 1e-12);
  }
}

TEST(Bench, OperationStreamsAreReproducible) {
  const auto s = small_spec();
  OpStream a{s, 1, 2};
  OpStream b{s, 1, 2};
  OpStream c{s, 0, 2};
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next();
    const auto y = b.next();
    const auto z = c.next();
    ASSERT_EQ(x.kind, y.kind);
    ASSERT_EQ(x.key, y.key);
    ASSERT_EQ(x.hi, y.hi);
    ASSERT_GE(x.key, 0);
    ASSERT_LT(x.key, s.key_range);
    if (x.kind == catree::OpKind::range) {
      ASSERT_GE(x.hi - x.key + 1, 1);
      ASSERT_LE(x.hi - x.key + 1, s.max_range);
    }
    differs |= x.key != z.key;
  }
  EXPECT_TRUE(differs);
}

TEST(Bench, ReadOnlyMixLeavesContentsUnchanged) {
  for (const auto structure : {Structure::catree, Structure::coarse}) {
    auto s = small_spec();
    s.structure = structure;
    s.threads = 1;
    s.key_range = 100;
    s.set_mix(0, 100, 0);
    const auto r = run_mix(s);
    ASSERT_EQ(r.runs.size(), 1U);
    EXPECT_GT(r.runs[0].ops_per_us, 0);
    EXPECT_EQ(r.runs[0].size_before, r.runs[0].size_after);
    EXPECT_EQ(r.runs[0].update_ops, 0U);
  }
}

TEST(Bench, MixRunsPassTheSanityCheckAndConserveCounts) {
  auto s = small_spec();
  s.measure_runs = 2;
  const auto r = run_mix(s);
  ASSERT_EQ(r.runs.size(), 2U);
  for (const auto& run : r.runs) {
    EXPECT_TRUE(run.sanity_ok) << run.avg_items_per_rq << " vs " << run.expected_items_per_rq;
    EXPECT_EQ(std::accumulate(run.per_thread_ops.begin(), run.per_thread_ops.end(), 0ULL),
              run.ops);
    EXPECT_EQ(run.update_ops + run.lookup_ops + run.range_ops, run.ops);
    EXPECT_GE(run.traversed_per_rq, 1.0);
  }
}

TEST(Bench, SplitDutyReportsBothThroughputs) {
  for (const auto structure : {Structure::catree, Structure::coarse}) {
    auto s = small_spec();
    s.structure = structure;
    s.mode = Mode::split_duty;
    s.fixed_range = 100;
    const auto r = run_split_duty(s);
    ASSERT_EQ(r.runs.size(), 1U);
    const auto& run = r.runs[0];
    EXPECT_GT(run.update_ops_per_us, 0);
    EXPECT_GT(run.range_ops_per_us, 0);
    EXPECT_GE(run.traversed_per_rq, 1.0);
    EXPECT_DOUBLE_EQ(run.range_throughput_scaled, run.range_ops_per_us * 100);
    EXPECT_EQ(run.lookup_ops, 0U);
  }
}

TEST(Bench, CsvLayout) {
  std::ostringstream empty;
  write_csv(empty, {});
  EXPECT_EQ(empty.str(),
            "structure,mode,threads,S,R_or_fixedRange,insertPct,removePct,lookupPct,rangePct,run,"
            "opsPerUs,updateOpsPerUs,rangeOpsPerUs,rangeThroughputScaled,baseNodes,traversedPerRQ,"
            "avgItemsPerRQ,seed\n");

  BenchResult r{small_spec(), {}};
  RunResult run;
  run.ops_per_us = 1.0 / 3.0;
  run.base_nodes = 7;
  r.runs.push_back(run);
  std::ostringstream one;
  write_csv(one, {r});
  const auto text = one.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_NE(text.find("catree,mix,2,10000,100,10,10,55,25,0,0.333333,0,0,0,7,0,0,1\n"),
            std::string::npos);
}

TEST(Bench, CsvFileErrorsNameThePath) {
  try {
    write_csv_file("/nonexistent-dir/out.csv", {});
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string{e.what()}.find("/nonexistent-dir/out.csv"), std::string::npos);
  }
}

}  // namespace
