#ifndef CATREE_COARSE_SET_HPP
#define CATREE_COARSE_SET_HPP

/// \file
/// Baseline set: one atomic reference to an immutable treap. Updates derive a
/// new version and publish it with compare-and-swap, retrying on conflict.
/// Reads copy the reference and never retry.

#include <atomic>
#include <optional>

#include "catree/epoch.hpp"
#include "catree/immutable_treap.hpp"
#include "catree/thread_rng.hpp"

namespace catree {

template <typename Key, typename Value>
class CoarseSet {
 public:
  using item_type = Item<Key, Value>;
  using node_type = treap::Node<Key, Value>;

  CoarseSet() = default;
  ~CoarseSet() { treap::unref(root_.load(std::memory_order_relaxed)); }

  CoarseSet(const CoarseSet&) = delete;
  CoarseSet& operator=(const CoarseSet&) = delete;

  std::optional<item_type> insert(Key key, Value value) {
    const item_type item{std::move(key), std::move(value)};
    return update([&](const node_type* root) {
      auto r = treap::insert(root, item, detail::thread_rng());
      return std::pair{std::move(r.root), std::move(r.previous)};
    });
  }

  std::optional<item_type> remove(const Key& key) {
    return update([&](const node_type* root) {
      auto r = treap::remove(root, key);
      return std::pair{std::move(r.root), std::move(r.removed)};
    });
  }

  [[nodiscard]] std::optional<item_type> lookup(const Key& key) const {
    const auto guard = epoch::pin();
    const auto* item = treap::lookup(root_.load(std::memory_order_acquire), key);
    if (item == nullptr) return std::nullopt;
    return *item;
  }

  template <typename Visitor>
  void range_query(const Key& lo, const Key& hi, Visitor&& visit) const {
    if (hi < lo) return;
    const auto guard = epoch::pin();
    treap::for_each_in_range(root_.load(std::memory_order_acquire), lo, hi, visit);
  }

  [[nodiscard]] std::size_t size() const {
    const auto guard = epoch::pin();
    return treap::size(root_.load(std::memory_order_acquire));
  }

  [[nodiscard]] const node_type* root() const noexcept {
    return root_.load(std::memory_order_acquire);
  }

 private:
  static void unref_root(void* p) noexcept {
    treap::unref(static_cast<const node_type*>(p));
  }

  template <typename Op>
  std::optional<item_type> update(Op&& op) {
    const auto guard = epoch::pin();
    auto* expected = root_.load(std::memory_order_acquire);
    for (;;) {
      auto [next, result] = op(expected);
      if (next.get() == expected) return std::move(result);
      const auto* desired = next.get();
      if (root_.compare_exchange_weak(expected, desired, std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
        (void)next.detach();
        if (expected != nullptr)
          epoch::retire(const_cast<node_type*>(expected), &unref_root);
        return std::move(result);
      }
    }
  }

  std::atomic<const node_type*> root_{nullptr};
};

}  // namespace catree

#endif  // CATREE_COARSE_SET_HPP
