#ifndef CATREE_CA_TREE_HPP
#define CATREE_CA_TREE_HPP

/// \file
/// Contention-adapting search tree over immutable treaps.
///
/// A binary tree of routing nodes directs searches to base nodes. Each base
/// node owns a reference to an immutable treap holding the items of its key
/// range, guarded by a StatSeqLock. Writers lock one base node, derive a new
/// treap version and publish it. Readers only copy treap references while
/// holding a lock or inside an optimistic sequence window, and traverse the
/// copied versions afterwards, so large range queries keep shared data locked
/// for a time independent of the number of items they return.
///
/// The lock statistics drive adaptation: a base node that sees much waiting is
/// split in two at its median key; one that sees none, or that range queries
/// keep spanning together with its neighbours, is joined with a neighbour.
///
/// Every base node also records the half-open key range [begin, end) it was
/// created for. Ranges are fixed for a node's lifetime, which lets range
/// queries verify that consecutive base nodes are adjacent.
///
/// Memory: nodes and treap versions unlinked by one thread are reclaimed
/// through catree::epoch once no pinned operation can still see them.

#include <cassert>
#include <cstdint>
#include <mutex>
#include <optional>
#include <utility>

#include <boost/container/small_vector.hpp>

#include "catree/epoch.hpp"
#include "catree/immutable_treap.hpp"
#include "catree/stat_seqlock.hpp"
#include "catree/thread_rng.hpp"

namespace catree {

/// Adaptation constants. Defaults are calibration targets.
struct Config {
  std::int64_t contended_delta = 250;
  std::int64_t uncontended_delta = -1;
  std::int64_t split_threshold = 1000;
  std::int64_t join_threshold = -1000;
  /// Subtracted from every base node a multi-base range query spans.
  std::int64_t range_delta = 100;
  /// Failed optimistic attempts before a read falls back to locking.
  unsigned optimistic_attempts = 2;
};

/// Places in the protocols where test hooks may force a context switch.
enum class InterleavePoint {
  after_descent,
  after_lock,
  range_step,
  before_validate,
  adaptation,
};

/// Compile-time hooks for tests. The defaults compile to nothing; the fault
/// switches deliberately break the protocol so that checkers can be shown to
/// catch the resulting bugs.
struct NoHooks {
  static constexpr bool skip_valid_recheck = false;
  static constexpr bool skip_sequence_validation = false;
  static constexpr bool unlock_before_copy = false;
  static void interleave(InterleavePoint) noexcept {}
};

template <typename Key, typename Value, typename Hooks = NoHooks>
class CATree {
 public:
  using key_type = Key;
  using item_type = Item<Key, Value>;
  using node_type = treap::Node<Key, Value>;
  using ref_type = treap::Ref<Key, Value>;

  struct NodeHeader {
    const bool is_base;
  };

  struct BaseNode final : NodeHeader {
    BaseNode(ref_type treap_root, std::optional<Key> range_begin,
             std::optional<Key> range_end)
        : NodeHeader{true},
          root{treap_root.detach()},
          begin{std::move(range_begin)},
          end{std::move(range_end)} {}
    ~BaseNode() { treap::unref(root.load(std::memory_order_relaxed)); }

    [[nodiscard]] bool covers(const Key& k) const {
      return (!begin || !(k < *begin)) && (!end || k < *end);
    }

    StatSeqLock lock;
    std::atomic<bool> valid{true};
    /// Owns one reference. Written only under the write lock.
    std::atomic<const node_type*> root;
    /// Inclusive lower bound; empty means unbounded.
    const std::optional<Key> begin;
    /// Exclusive upper bound; empty means unbounded.
    const std::optional<Key> end;
  };

  struct RoutingNode final : NodeHeader {
    RoutingNode(Key k, NodeHeader* l, NodeHeader* r)
        : NodeHeader{false}, key{std::move(k)}, left{l}, right{r} {}

    std::atomic<NodeHeader*>& child(bool left_side) noexcept {
      return left_side ? left : right;
    }

    const Key key;
    std::atomic<NodeHeader*> left;
    std::atomic<NodeHeader*> right;
    std::atomic<bool> valid{true};
    std::mutex lock;
  };

  struct Step {
    RoutingNode* node;
    bool went_left;
  };
  using DescentPath = boost::container::small_vector<Step, 32>;

  struct RangeStats {
    std::size_t base_nodes = 0;
    bool optimistic = false;
  };

  struct DebugStats {
    std::size_t base_nodes = 0;
    std::size_t items = 0;
    std::size_t depth = 0;
  };

  explicit CATree(Config config = {})
      : config_{config}, root_{new BaseNode{ref_type{}, {}, {}}} {}

  ~CATree() { destroy(root_.load(std::memory_order_relaxed)); }

  CATree(const CATree&) = delete;
  CATree& operator=(const CATree&) = delete;

  [[nodiscard]] const Config& config() const noexcept { return config_; }
  /// Replaces the adaptation constants. Requires quiescence.
  void reconfigure(const Config& config) noexcept { config_ = config; }

  /// Inserts or replaces; returns the replaced item.
  std::optional<item_type> insert(Key key, Value value) {
    item_type item{key, std::move(value)};
    return update(key, [&](const node_type* root) {
      auto r = treap::insert(root, std::move(item), detail::thread_rng());
      return std::pair{std::move(r.root), std::move(r.previous)};
    });
  }

  /// Removes key if present; returns the removed item.
  std::optional<item_type> remove(const Key& key) {
    return update(key, [&](const node_type* root) {
      auto r = treap::remove(root, key);
      return std::pair{std::move(r.root), std::move(r.removed)};
    });
  }

  [[nodiscard]] std::optional<item_type> lookup(const Key& key) const {
    const auto guard = epoch::pin();
    const auto* root = copy_root_for(key);
    const auto* item = treap::lookup(root, key);
    if (item == nullptr) return std::nullopt;
    return *item;
  }

  /// Visits every item with lo <= key <= hi in ascending key order, as of a
  /// single instant during the call.
  template <typename Visitor>
  RangeStats range_query(const Key& lo, const Key& hi, Visitor&& visit) {
    RangeStats stats;
    if (hi < lo) return stats;
    const auto guard = epoch::pin();
    Snapshot snap;
    for (unsigned i = 0; i < config_.optimistic_attempts; ++i) {
      if (optimistic_range(lo, hi, snap)) {
        stats.optimistic = true;
        break;
      }
    }
    if (stats.optimistic) {
      if (snap.size() > 1)
        for (auto& c : snap) c.base->lock.stat_add(-config_.range_delta);
    } else {
      locked_range(lo, hi, snap);
    }
    for (const auto& c : snap) treap::for_each_in_range(c.root, lo, hi, visit);
    stats.base_nodes = snap.size();
    if (snap.size() > 1) join_after_range(snap);
    return stats;
  }

  /// Exact counts by full traversal. Requires quiescence.
  [[nodiscard]] DebugStats debug_stats() const {
    DebugStats s;
    collect_stats(root_.load(std::memory_order_acquire), 0, s);
    return s;
  }

  /// Item count that may be taken while other operations run. Not a snapshot:
  /// concurrent updates may or may not be counted.
  [[nodiscard]] std::size_t approximate_size() const {
    const auto guard = epoch::pin();
    DebugStats s;
    collect_stats(root_.load(std::memory_order_acquire), 0, s);
    return s.items;
  }

  // Structural access, used by validators and tests.

  [[nodiscard]] const NodeHeader* root_node() const noexcept {
    return root_.load(std::memory_order_acquire);
  }

  static const BaseNode* as_base(const NodeHeader* n) noexcept {
    assert(n->is_base);
    return static_cast<const BaseNode*>(n);
  }
  static const RoutingNode* as_routing(const NodeHeader* n) noexcept {
    assert(!n->is_base);
    return static_cast<const RoutingNode*>(n);
  }

  /// The base node whose range covers key, plus the routing path to it.
  BaseNode* find_base(const Key& key, DescentPath& path) const {
    path.clear();
    NodeHeader* n = root_.load(std::memory_order_acquire);
    while (!n->is_base) {
      auto* r = static_cast<RoutingNode*>(n);
      const bool left = key < r->key;
      path.push_back({r, left});
      n = r->child(left).load(std::memory_order_acquire);
    }
    return static_cast<BaseNode*>(n);
  }

  /// The base node following the one path leads to, updating path; nullptr if
  /// path leads to the rightmost base node.
  static BaseNode* next_base(DescentPath& path) {
    while (!path.empty() && !path.back().went_left) path.pop_back();
    if (path.empty()) return nullptr;
    path.back().went_left = false;
    NodeHeader* n = path.back().node->right.load(std::memory_order_acquire);
    while (!n->is_base) {
      auto* r = static_cast<RoutingNode*>(n);
      path.push_back({r, true});
      n = r->left.load(std::memory_order_acquire);
    }
    return static_cast<BaseNode*>(n);
  }

  /// Splits the base node covering key regardless of its statistics. Returns
  /// false if it holds fewer than two items.
  bool debug_split(const Key& key) {
    return with_locked_base(key, [&](BaseNode& base, const DescentPath& path) {
      if (treap::size(base.root.load(std::memory_order_relaxed)) < 2) return false;
      high_contention_split(base, path);
      return true;
    });
  }

  /// Attempts a join of the base node covering key with its neighbour.
  /// Returns true if the structure changed.
  bool debug_join(const Key& key) {
    return with_locked_base(key, [&](BaseNode& base, const DescentPath& path) {
      low_contention_join(base, path);
      return !base.valid.load(std::memory_order_relaxed);
    });
  }

 private:
  struct Copied {
    BaseNode* base;
    StatSeqLock::sequence_type seq;
    const node_type* root;
    bool read_locked;
  };
  using Snapshot = boost::container::small_vector<Copied, 16>;

  static constexpr unsigned kSequenceSpins = 128;

  class WriteUnlock {
   public:
    explicit WriteUnlock(StatSeqLock& l) noexcept : lock_{l} {}
    ~WriteUnlock() { lock_.write_unlock(); }
    WriteUnlock(const WriteUnlock&) = delete;
    WriteUnlock& operator=(const WriteUnlock&) = delete;

   private:
    StatSeqLock& lock_;
  };

  static void unref_root(void* p) noexcept {
    treap::unref(static_cast<const node_type*>(p));
  }

  std::atomic<NodeHeader*>& slot_of(const DescentPath& path) {
    if (path.empty()) return root_;
    return path.back().node->child(path.back().went_left);
  }

  BaseNode* find_leftmost(DescentPath& path) const {
    path.clear();
    NodeHeader* n = root_.load(std::memory_order_acquire);
    while (!n->is_base) {
      auto* r = static_cast<RoutingNode*>(n);
      path.push_back({r, true});
      n = r->left.load(std::memory_order_acquire);
    }
    return static_cast<BaseNode*>(n);
  }

  template <typename F>
  bool with_locked_base(const Key& key, F&& f) {
    const auto guard = epoch::pin();
    DescentPath path;
    for (;;) {
      BaseNode* base = find_base(key, path);
      base->lock.write_lock();
      WriteUnlock unlock{base->lock};
      if (!base->valid.load(std::memory_order_relaxed)) continue;
      return f(*base, path);
    }
  }

  template <typename Op>
  std::optional<item_type> update(const Key& key, Op&& op) {
    const auto guard = epoch::pin();
    DescentPath path;
    for (;;) {
      BaseNode* base = find_base(key, path);
      Hooks::interleave(InterleavePoint::after_descent);
      const bool contended = base->lock.write_lock();
      WriteUnlock unlock{base->lock};
      const bool valid = base->valid.load(std::memory_order_relaxed);
      if (!valid && !Hooks::skip_valid_recheck) continue;
      assert(!valid || base->covers(key));
      Hooks::interleave(InterleavePoint::after_lock);
      base->lock.stat_add(contended ? config_.contended_delta
                                    : config_.uncontended_delta);
      const auto* old_root = base->root.load(std::memory_order_relaxed);
      auto [new_root, result] = op(old_root);
      if (new_root.get() != old_root) replace_root(*base, std::move(new_root));
      if (valid) adapt(*base, path);
      return std::move(result);
    }
  }

  void replace_root(BaseNode& base, ref_type new_root) {
    const auto* old = base.root.load(std::memory_order_relaxed);
    base.root.store(new_root.detach(), std::memory_order_release);
    if (old != nullptr) epoch::retire(const_cast<node_type*>(old), &unref_root);
  }

  void adapt(BaseNode& base, const DescentPath& path) {
    const auto stat = base.lock.stat_get();
    if (stat > config_.split_threshold) {
      if (treap::size(base.root.load(std::memory_order_relaxed)) >= 2)
        high_contention_split(base, path);
      else
        base.lock.stat_set(0);
    } else if (stat < config_.join_threshold) {
      low_contention_join(base, path);
    }
  }

  // Caller holds base's write lock; base is valid. The slot holding base
  // cannot change while base is write-locked and valid, so it is written
  // without taking the parent's routing lock.
  void high_contention_split(BaseNode& base, const DescentPath& path) {
    auto halves = treap::split_median(base.root.load(std::memory_order_relaxed));
    auto* left = new BaseNode{std::move(halves.left), base.begin, halves.split_key};
    auto* right = new BaseNode{std::move(halves.right), halves.split_key, base.end};
    auto* routing = new RoutingNode{std::move(halves.split_key), left, right};
    Hooks::interleave(InterleavePoint::adaptation);
    slot_of(path).store(routing, std::memory_order_release);
    base.valid.store(false, std::memory_order_release);
    epoch::retire(&base);
  }

  // Caller holds base's write lock; base is valid. Every secondary lock is
  // only tried, and any failure gives up before the first invalidation.
  void low_contention_join(BaseNode& base, const DescentPath& path) {
    const auto give_up = [&] { base.lock.stat_set(0); };
    if (path.empty()) return give_up();

    RoutingNode* parent = path.back().node;
    const bool base_is_left = path.back().went_left;
    if (!parent->lock.try_lock()) return give_up();
    std::unique_lock parent_lock{parent->lock, std::adopt_lock};
    if (!parent->valid.load(std::memory_order_acquire)) return give_up();

    // Neighbour: the extreme base node of the parent's other subtree that is
    // adjacent to base.
    RoutingNode* neighbor_parent = parent;
    bool neighbor_is_left = !base_is_left;
    NodeHeader* n = parent->child(!base_is_left).load(std::memory_order_acquire);
    while (!n->is_base) {
      neighbor_parent = static_cast<RoutingNode*>(n);
      neighbor_is_left = base_is_left;
      n = neighbor_parent->child(base_is_left).load(std::memory_order_acquire);
    }
    auto* neighbor = static_cast<BaseNode*>(n);
    if (!neighbor->lock.try_write_lock()) return give_up();
    WriteUnlock neighbor_unlock{neighbor->lock};
    if (!neighbor->valid.load(std::memory_order_relaxed)) return give_up();

    RoutingNode* grandparent = path.size() >= 2 ? path[path.size() - 2].node : nullptr;
    std::unique_lock<std::mutex> grandparent_lock;
    std::atomic<NodeHeader*>* parent_slot = &root_;
    if (grandparent != nullptr) {
      if (!grandparent->lock.try_lock()) return give_up();
      grandparent_lock = std::unique_lock{grandparent->lock, std::adopt_lock};
      if (!grandparent->valid.load(std::memory_order_acquire)) return give_up();
      if (grandparent->left.load(std::memory_order_acquire) == parent)
        parent_slot = &grandparent->left;
      else if (grandparent->right.load(std::memory_order_acquire) == parent)
        parent_slot = &grandparent->right;
      else
        return give_up();
    } else if (root_.load(std::memory_order_acquire) != parent) {
      return give_up();
    }

    BaseNode& low = base_is_left ? base : *neighbor;
    BaseNode& high = base_is_left ? *neighbor : base;
    auto joined = treap::join(low.root.load(std::memory_order_relaxed),
                              high.root.load(std::memory_order_relaxed),
                              detail::thread_rng());
    auto* merged = new BaseNode{std::move(joined), low.begin, high.end};
    Hooks::interleave(InterleavePoint::adaptation);

    parent->valid.store(false, std::memory_order_release);
    base.valid.store(false, std::memory_order_release);
    neighbor->valid.store(false, std::memory_order_release);
    neighbor_parent->child(neighbor_is_left).store(merged, std::memory_order_release);
    parent_slot->store(parent->child(!base_is_left).load(std::memory_order_relaxed),
                       std::memory_order_release);

    epoch::retire(parent);
    epoch::retire(&base);
    epoch::retire(neighbor);
  }

  // Copies the treap root of the base node covering key.
  const node_type* copy_root_for(const Key& key) const {
    DescentPath path;
    for (unsigned attempt = 0; attempt < config_.optimistic_attempts; ++attempt) {
      const BaseNode* base = find_base(key, path);
      Hooks::interleave(InterleavePoint::after_descent);
      const auto seq = base->lock.read_sequence_spin(kSequenceSpins);
      if (StatSeqLock::is_write_locked(seq)) continue;
      if (!base->valid.load(std::memory_order_acquire)) continue;
      const auto* root = base->root.load(std::memory_order_acquire);
      Hooks::interleave(InterleavePoint::before_validate);
      if (Hooks::skip_sequence_validation || base->lock.validate(seq)) return root;
    }
    for (;;) {
      BaseNode* base = find_base(key, path);
      Hooks::interleave(InterleavePoint::after_descent);
      base->lock.read_lock();
      if (!base->valid.load(std::memory_order_acquire)) {
        base->lock.read_unlock();
        continue;
      }
      const auto* root = base->root.load(std::memory_order_acquire);
      base->lock.read_unlock();
      return root;
    }
  }

  // Collects (sequence, root) of every base node the range spans without
  // locking, then revalidates all sequences.
  bool optimistic_range(const Key& lo, const Key& hi, Snapshot& snap) {
    snap.clear();
    DescentPath path;
    BaseNode* base = find_base(lo, path);
    const Key* must_cover = &lo;
    for (;;) {
      Hooks::interleave(InterleavePoint::after_descent);
      if (!base->covers(*must_cover)) return false;
      const auto seq = base->lock.read_sequence_spin(kSequenceSpins);
      if (StatSeqLock::is_write_locked(seq)) return false;
      if (!base->valid.load(std::memory_order_acquire)) return false;
      snap.push_back({base, seq, base->root.load(std::memory_order_acquire), false});
      if (!base->end || hi < *base->end) break;
      must_cover = &*base->end;
      Hooks::interleave(InterleavePoint::range_step);
      base = successor(path, *must_cover);
    }
    Hooks::interleave(InterleavePoint::before_validate);
    if constexpr (!Hooks::skip_sequence_validation) {
      for (const auto& c : snap)
        if (!c.base->lock.validate(c.seq)) return false;
    }
    return true;
  }

  // Read-locks every spanned base node in ascending key order, copies the
  // roots, applies the range statistics and releases everything.
  void locked_range(const Key& lo, const Key& hi, Snapshot& snap) {
    const auto release_all = [&] {
      for (auto& c : snap)
        if (c.read_locked) c.base->lock.read_unlock();
    };
    for (;;) {
      snap.clear();
      DescentPath path;
      BaseNode* base = find_base(lo, path);
      const Key* must_cover = &lo;
      bool restart = false;
      for (;;) {
        Hooks::interleave(InterleavePoint::after_descent);
        base->lock.read_lock();
        if (!base->valid.load(std::memory_order_acquire) || !base->covers(*must_cover)) {
          base->lock.read_unlock();
          restart = true;
          break;
        }
        if constexpr (Hooks::unlock_before_copy) {
          base->lock.read_unlock();
          Hooks::interleave(InterleavePoint::range_step);
          snap.push_back({base, 0, base->root.load(std::memory_order_acquire), false});
        } else {
          snap.push_back({base, 0, base->root.load(std::memory_order_acquire), true});
        }
        if (!base->end || hi < *base->end) break;
        must_cover = &*base->end;
        Hooks::interleave(InterleavePoint::range_step);
        base = successor(path, *must_cover);
      }
      if (restart) {
        release_all();
        continue;
      }
      if (snap.size() > 1)
        for (auto& c : snap) c.base->lock.stat_add(-config_.range_delta);
      release_all();
      return;
    }
  }

  // Next base node along path; falls back to a fresh descent when the path
  // went stale and the found node does not start where the previous ended.
  BaseNode* successor(DescentPath& path, const Key& start) const {
    BaseNode* next = next_base(path);
    if (next != nullptr && next->covers(start)) return next;
    return find_base(start, path);
  }

  // Range queries only read-lock, so the join they motivate is attempted here
  // on the first spanned base node whose statistics fell below the threshold.
  void join_after_range(const Snapshot& snap) {
    for (const auto& c : snap) {
      BaseNode* base = c.base;
      if (base->lock.stat_get() >= config_.join_threshold) continue;
      if (!base->lock.try_write_lock()) return;
      WriteUnlock unlock{base->lock};
      if (!base->valid.load(std::memory_order_relaxed) ||
          base->lock.stat_get() >= config_.join_threshold)
        return;
      DescentPath path;
      BaseNode* found = base->begin ? find_base(*base->begin, path) : find_leftmost(path);
      if (found == base) low_contention_join(*base, path);
      return;
    }
  }

  void collect_stats(const NodeHeader* n, std::size_t depth, DebugStats& s) const {
    if (n->is_base) {
      ++s.base_nodes;
      s.items += treap::size(as_base(n)->root.load(std::memory_order_acquire));
      s.depth = std::max(s.depth, depth);
      return;
    }
    const auto* r = as_routing(n);
    collect_stats(r->left.load(std::memory_order_acquire), depth + 1, s);
    collect_stats(r->right.load(std::memory_order_acquire), depth + 1, s);
  }

  static void destroy(NodeHeader* n) {
    if (n->is_base) {
      delete static_cast<BaseNode*>(n);
      return;
    }
    auto* r = static_cast<RoutingNode*>(n);
    destroy(r->left.load(std::memory_order_relaxed));
    destroy(r->right.load(std::memory_order_relaxed));
    delete r;
  }

  Config config_;
  std::atomic<NodeHeader*> root_;
};

}  // namespace catree

#endif  // CATREE_CA_TREE_HPP
