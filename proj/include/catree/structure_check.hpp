#ifndef CATREE_STRUCTURE_CHECK_HPP
#define CATREE_STRUCTURE_CHECK_HPP

/// \file
/// Full structural validation of a quiescent CATree.

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "catree/ca_tree.hpp"

namespace catree {

struct StructureReport {
  /// Empty when every invariant holds; otherwise the first violation found.
  std::string error;
  std::size_t base_nodes = 0;
  std::size_t items = 0;
  /// Routing nodes on the longest root-to-base path.
  std::size_t depth = 0;
  /// Item count of each base node in key order.
  std::vector<std::size_t> base_sizes;

  [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

namespace detail {

template <typename Tree>
class StructureWalker {
 public:
  using Key = typename Tree::key_type;
  using Header = typename Tree::NodeHeader;

  StructureReport run(const Tree& tree) {
    walk(tree.root_node(), std::nullopt, std::nullopt, 0);
    return std::move(report_);
  }

 private:
  template <typename... Parts>
  void fail(const Parts&... parts) {
    if (!report_.error.empty()) return;
    std::ostringstream s;
    (s << ... << parts);
    report_.error = s.str();
  }

  static bool below(const std::optional<Key>& lo, const Key& k) { return !lo || *lo < k; }
  static bool above(const std::optional<Key>& hi, const Key& k) { return !hi || k < *hi; }

  void walk(const Header* n, const std::optional<Key>& lo, const std::optional<Key>& hi,
            std::size_t depth) {
    if (!report_.error.empty()) return;
    if (n == nullptr) return fail("null child reference at depth ", depth);
    if (!n->is_base) {
      const auto* r = Tree::as_routing(n);
      if (!r->valid.load()) return fail("reachable routing node ", r->key, " is invalid");
      if (!below(lo, r->key) || !above(hi, r->key))
        return fail("routing key ", r->key, " outside the range of its subtree");
      walk(r->left.load(), lo, r->key, depth + 1);
      walk(r->right.load(), r->key, hi, depth + 1);
      return;
    }
    const auto* b = Tree::as_base(n);
    const auto index = report_.base_nodes++;
    report_.depth = std::max(report_.depth, depth);
    if (!b->valid.load()) return fail("reachable base node #", index, " is invalid");
    if (b->begin != lo || b->end != hi)
      return fail("base node #", index, " range does not match its routing position");
    if (StatSeqLock::is_write_locked(b->lock.read_sequence()) || b->lock.reader_count() != 0)
      return fail("base node #", index, " is locked at quiescence");
    const auto* root = b->root.load();
    if (auto err = treap::check_invariants(root); !err.empty())
      return fail("base node #", index, " treap: ", err);
    const auto* first = treap::first_key(root);
    const auto* last = treap::last_key(root);
    if (first != nullptr && ((lo && *first < *lo) || (hi && !(*last < *hi))))
      return fail("base node #", index, " holds a key outside its range");
    const auto size = treap::size(root);
    report_.base_sizes.push_back(size);
    report_.items += size;
  }

  StructureReport report_;
};

}  // namespace detail

/// Checks routing order, validity of every reachable node, base-node ranges,
/// lock state and the treap invariants of every base node. Requires that no
/// operation runs concurrently.
template <typename Key, typename Value, typename Hooks>
StructureReport validate_structure(const CATree<Key, Value, Hooks>& tree) {
  return detail::StructureWalker<CATree<Key, Value, Hooks>>{}.run(tree);
}

}  // namespace catree

#endif  // CATREE_STRUCTURE_CHECK_HPP
