#ifndef CATREE_ORACLE_HPP
#define CATREE_ORACLE_HPP

/// \file
/// Sequential reference set with the same semantics as the concurrent
/// structures: insert replaces, remove reports the removed item, ranges are
/// inclusive on both ends.

#include <map>
#include <optional>
#include <vector>

#include "catree/immutable_treap.hpp"

namespace catree {

template <typename Key, typename Value>
class OracleSet {
 public:
  using item_type = Item<Key, Value>;

  std::optional<item_type> insert(Key key, Value value) {
    auto [it, inserted] = map_.try_emplace(key, value);
    if (inserted) return std::nullopt;
    item_type previous{it->first, std::move(it->second)};
    it->second = std::move(value);
    return previous;
  }

  std::optional<item_type> remove(const Key& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    item_type removed{it->first, std::move(it->second)};
    map_.erase(it);
    return removed;
  }

  [[nodiscard]] std::optional<item_type> lookup(const Key& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return item_type{it->first, it->second};
  }

  template <typename Visitor>
  void range_query(const Key& lo, const Key& hi, Visitor&& visit) const {
    if (hi < lo) return;
    for (auto it = map_.lower_bound(lo); it != map_.end() && !(hi < it->first); ++it)
      visit(item_type{it->first, it->second});
  }

  [[nodiscard]] std::vector<item_type> range(const Key& lo, const Key& hi) const {
    std::vector<item_type> out;
    range_query(lo, hi, [&](const item_type& i) { out.push_back(i); });
    return out;
  }

  [[nodiscard]] std::size_t size() const noexcept { return map_.size(); }
  [[nodiscard]] const std::map<Key, Value>& map() const noexcept { return map_; }

 private:
  std::map<Key, Value> map_;
};

}  // namespace catree

#endif  // CATREE_ORACLE_HPP
