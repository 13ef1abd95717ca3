#include <gtest/gtest.h>

#include <mutex>
#include <sstream>

#include "catree/history.hpp"
#include "catree/linearizability.hpp"
#include "catree/oracle.hpp"
#include "catree/structure_check.hpp"
#include "support/stress.hpp"

namespace {

using catree::History;
using catree::HistoryEvent;
using catree::OpKind;
using catree::Verdict;
using Oracle = catree::OracleSet<std::int64_t, std::int64_t>;

HistoryEvent point(std::uint32_t thread, OpKind op, std::int64_t key, std::int64_t invoke,
                   std::int64_t ret, bool present) {
  HistoryEvent e;
  e.thread = thread;
  e.op = op;
  e.arg = key;
  e.invoke_ns = invoke;
  e.return_ns = ret;
  e.present = present;
  return e;
}

HistoryEvent range(std::uint32_t thread, std::int64_t lo, std::int64_t hi, std::int64_t invoke,
                   std::int64_t ret, std::vector<std::int64_t> keys) {
  HistoryEvent e;
  e.thread = thread;
  e.op = OpKind::range;
  e.arg = lo;
  e.arg_hi = hi;
  e.invoke_ns = invoke;
  e.return_ns = ret;
  e.keys = std::move(keys);
  return e;
}

// Global-lock wrapper around the oracle: linearizable by construction.
class LockedOracle {
 public:
  auto insert(std::int64_t k, std::int64_t v) {
    std::lock_guard g{m_};
    return o_.insert(k, v);
  }
  auto remove(std::int64_t k) {
    std::lock_guard g{m_};
    return o_.remove(k);
  }
  auto lookup(std::int64_t k) {
    std::lock_guard g{m_};
    return o_.lookup(k);
  }
  template <typename V>
  void range_query(std::int64_t lo, std::int64_t hi, V&& v) {
    std::lock_guard g{m_};
    o_.range_query(lo, hi, v);
  }

 private:
  std::mutex m_;
  Oracle o_;
};

TEST(Oracle, SetSemantics) {
  Oracle o;
  EXPECT_FALSE(o.insert(5, 1).has_value());
  EXPECT_EQ(o.insert(5, 2)->value, 1);
  EXPECT_EQ(o.lookup(5)->value, 2);
  EXPECT_EQ(o.remove(5)->value, 2);
  EXPECT_FALSE(o.remove(5).has_value());
  for (std::int64_t k = 1; k <= 10; ++k) o.insert(k, k);
  std::vector<std::int64_t> keys;
  for (const auto& i : o.range(3, 6)) keys.push_back(i.key);
  EXPECT_EQ(keys, (std::vector<std::int64_t>{3, 4, 5, 6}));
  EXPECT_TRUE(o.range(6, 3).empty());
}

TEST(History, TsvRoundTrip) {
  History h{point(0, OpKind::insert, 5, 10, 20, false), point(1, OpKind::lookup, 5, 15, 25, true),
            range(2, 0, 9, 30, 40, {}), range(3, 1, 8, 35, 45, {2, 5}),
            point(0, OpKind::remove, 5, 50, 60, true)};
  std::stringstream s;
  catree::write_tsv(s, h);
  EXPECT_NE(s.str().find("3\trange\t1,8\t35\t45\t2,5\n"), std::string::npos);
  EXPECT_EQ(catree::read_tsv(s), h);
}

TEST(History, MalformedTsvIsRejected) {
  std::stringstream s{"0\tinsert\t5\t1\t2\n0\tfrobnicate\t5\t1\t2\t0\n"};
  EXPECT_THROW((void)catree::read_tsv(s), std::runtime_error);
}

TEST(Linearizability, SequentialHistoryIsAccepted) {
  History h{point(0, OpKind::insert, 5, 0, 1, false), point(0, OpKind::lookup, 5, 2, 3, true),
            range(0, 0, 10, 4, 5, {5}), point(0, OpKind::remove, 5, 6, 7, true),
            point(0, OpKind::lookup, 5, 8, 9, false)};
  EXPECT_EQ(catree::check_linearizable(h).verdict, Verdict::ok);
  EXPECT_EQ(catree::check_linearizable({}).verdict, Verdict::ok);
}

TEST(Linearizability, RangeSeeingAFutureInsertIsRejected) {
  History h{range(0, 0, 10, 0, 10, {5}), point(1, OpKind::insert, 5, 20, 30, false)};
  const auto r = catree::check_linearizable(h);
  EXPECT_EQ(r.verdict, Verdict::violation);
  EXPECT_NE(r.witness.find("range(0,10)"), std::string::npos);
}

TEST(Linearizability, OverlappingOperationsMayBeReordered) {
  History h{range(0, 0, 10, 0, 30, {5}), point(1, OpKind::insert, 5, 20, 40, false)};
  EXPECT_EQ(catree::check_linearizable(h).verdict, Verdict::ok);
}

TEST(Linearizability, TornRangeSnapshotIsRejected) {
  // 3 is removed strictly before 5 is inserted, so no instant holds both.
  History h{point(0, OpKind::insert, 3, 0, 1, false), point(1, OpKind::remove, 3, 10, 20, true),
            point(1, OpKind::insert, 5, 30, 40, false), range(2, 0, 9, 5, 50, {3, 5})};
  EXPECT_EQ(catree::check_linearizable(h).verdict, Verdict::violation);
}

TEST(Linearizability, UnsortedOrOutOfBoundsRangeResultIsRejected) {
  History h{point(0, OpKind::insert, 3, 0, 1, false), point(0, OpKind::insert, 5, 2, 3, false),
            range(1, 0, 9, 4, 5, {5, 3})};
  EXPECT_EQ(catree::check_linearizable(h).verdict, Verdict::violation);
  History g{point(0, OpKind::insert, 3, 0, 1, false), range(1, 4, 9, 4, 5, {3})};
  EXPECT_EQ(catree::check_linearizable(g).verdict, Verdict::violation);
}

TEST(Linearizability, BudgetExhaustionIsInconclusive) {
  History h;
  for (int i = 0; i < 20; ++i) h.push_back(point(i, OpKind::insert, i, 0, 100, false));
  EXPECT_EQ(catree::check_linearizable(h, 5).verdict, Verdict::inconclusive);
}

TEST(Linearizability, KeysOutsideSupportedRangeAreRefused) {
  EXPECT_THROW((void)catree::check_linearizable({point(0, OpKind::insert, 64, 0, 1, false)}),
               std::invalid_argument);
  EXPECT_THROW((void)catree::check_linearizable({point(0, OpKind::insert, 1, 5, 1, false)}),
               std::invalid_argument);
}

TEST(Linearizability, GlobalLockReferenceIsAlwaysAccepted) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    LockedOracle set;
    catree::testing::StressSpec spec;
    spec.seed = seed;
    const auto r = catree::check_linearizable(catree::testing::record_stress(set, spec));
    ASSERT_EQ(r.verdict, Verdict::ok) << r.witness;
  }
}

TEST(StructureCheck, FreshAndSplitTrees) {
  catree::CATree<std::int64_t, std::int64_t> t;
  auto r = catree::validate_structure(t);
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.base_nodes, 1U);
  EXPECT_EQ(r.depth, 0U);

  t.insert(19, 19);
  t.insert(21, 21);
  ASSERT_TRUE(t.debug_split(19));
  r = catree::validate_structure(t);
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.base_nodes, 2U);
  EXPECT_EQ(r.depth, 1U);
  EXPECT_EQ(r.base_sizes, (std::vector<std::size_t>{1, 1}));
  const auto* root = decltype(t)::as_routing(t.root_node());
  EXPECT_EQ(root->key, 21);
  const auto* left = decltype(t)::as_base(root->left.load());
  EXPECT_EQ(*catree::treap::first_key(left->root.load()), 19);
}

TEST(StructureCheck, ReportsLockedBaseNode) {
  catree::CATree<std::int64_t, std::int64_t> t;
  decltype(t)::DescentPath path;
  auto* base = t.find_base(0, path);
  base->lock.write_lock();
  const auto r = catree::validate_structure(t);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.error.find("locked"), std::string::npos);
  base->lock.write_unlock();
}

}  // namespace
