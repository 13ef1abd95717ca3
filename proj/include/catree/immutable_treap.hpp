#ifndef CATREE_IMMUTABLE_TREAP_HPP
#define CATREE_IMMUTABLE_TREAP_HPP

/// \file
/// Fully persistent treap with fat leaves.
///
/// Items live only in leaves, each holding a sorted array of 1 to 64 items.
/// Internal nodes carry a routing key, a random priority and a cached item
/// count: everything left of an internal node has a key less than its key,
/// everything right has a key greater or equal, and an internal node's
/// priority is not smaller than the priority of an internal child.
///
/// Nodes never change after construction. Updates copy the root-to-leaf path
/// and share every other subtree with the input version, so any number of
/// threads may read any version while others derive new ones. Nodes are
/// reference counted; the count is only touched by code building or dropping
/// versions, never by readers.

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace catree {

/// A key with its payload. Ordering and equality consider the key only.
template <typename Key, typename Value>
struct Item {
  Key key;
  Value value;

  friend bool operator==(const Item& a, const Item& b) { return a.key == b.key; }
  friend bool operator<(const Item& a, const Item& b) { return a.key < b.key; }
};

namespace treap {

inline constexpr std::size_t kLeafCapacity = 64;

template <typename Key, typename Value>
class InternalNode;
template <typename Key, typename Value>
class LeafNode;

namespace detail {

inline std::uint64_t& thread_allocations() noexcept {
  thread_local std::uint64_t count = 0;
  return count;
}

}  // namespace detail

/// Nodes allocated by the calling thread so far.
inline std::uint64_t allocation_count() noexcept {
  return detail::thread_allocations();
}

template <typename Key, typename Value>
class Node {
 public:
  using internal_type = InternalNode<Key, Value>;
  using leaf_type = LeafNode<Key, Value>;

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  [[nodiscard]] bool is_leaf() const noexcept { return leaf_; }
  [[nodiscard]] const internal_type* as_internal() const noexcept {
    assert(!leaf_);
    return static_cast<const internal_type*>(this);
  }
  [[nodiscard]] const leaf_type* as_leaf() const noexcept {
    assert(leaf_);
    return static_cast<const leaf_type*>(this);
  }

  void add_ref() const noexcept { refs_.fetch_add(1, std::memory_order_relaxed); }
  [[nodiscard]] std::uint32_t ref_count() const noexcept {
    return refs_.load(std::memory_order_relaxed);
  }

 protected:
  explicit Node(bool leaf) noexcept : leaf_{leaf} {}
  ~Node() = default;

 private:
  template <typename K, typename V>
  friend void unref(const Node<K, V>* n) noexcept;

  mutable std::atomic<std::uint32_t> refs_{1};
  const bool leaf_;
};

/// Drops one reference, destroying every node that becomes unreferenced.
template <typename Key, typename Value>
void unref(const Node<Key, Value>* n) noexcept {
  while (n != nullptr) {
    if (n->refs_.fetch_sub(1, std::memory_order_acq_rel) != 1) return;
    if (n->is_leaf()) {
      LeafNode<Key, Value>::destroy(n->as_leaf());
      return;
    }
    const auto* in = n->as_internal();
    const auto* left = in->left();
    const auto* right = in->right();
    delete in;
    unref(left);
    n = right;
  }
}

/// Owning handle to one reference of a node; empty means the empty treap.
template <typename Key, typename Value>
class Ref {
 public:
  using node_type = Node<Key, Value>;

  Ref() noexcept = default;
  Ref(const Ref& other) noexcept : node_{other.node_} {
    if (node_ != nullptr) node_->add_ref();
  }
  Ref(Ref&& other) noexcept : node_{std::exchange(other.node_, nullptr)} {}
  Ref& operator=(Ref other) noexcept {
    std::swap(node_, other.node_);
    return *this;
  }
  ~Ref() { unref(node_); }

  [[nodiscard]] static Ref adopt(const node_type* n) noexcept { return Ref{n}; }
  [[nodiscard]] static Ref share(const node_type* n) noexcept {
    if (n != nullptr) n->add_ref();
    return Ref{n};
  }

  [[nodiscard]] const node_type* get() const noexcept { return node_; }
  const node_type* operator->() const noexcept { return node_; }
  explicit operator bool() const noexcept { return node_ != nullptr; }

  /// Gives up ownership without dropping the reference.
  [[nodiscard]] const node_type* detach() noexcept {
    return std::exchange(node_, nullptr);
  }

 private:
  explicit Ref(const node_type* n) noexcept : node_{n} {}

  const node_type* node_ = nullptr;
};

template <typename Key, typename Value>
[[nodiscard]] std::size_t size(const Node<Key, Value>* n) noexcept;

template <typename Key, typename Value>
class InternalNode final : public Node<Key, Value> {
 public:
  using ref_type = Ref<Key, Value>;
  using node_type = Node<Key, Value>;

  InternalNode(Key key, std::uint64_t priority, ref_type left, ref_type right)
      : node_type{false},
        key_{std::move(key)},
        priority_{priority},
        size_{treap::size(left.get()) + treap::size(right.get())},
        left_{left.detach()},
        right_{right.detach()} {
    assert(left_ != nullptr && right_ != nullptr);
  }

  [[nodiscard]] const Key& key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t priority() const noexcept { return priority_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] const node_type* left() const noexcept { return left_; }
  [[nodiscard]] const node_type* right() const noexcept { return right_; }

 private:
  const Key key_;
  const std::uint64_t priority_;
  const std::size_t size_;
  const node_type* const left_;
  const node_type* const right_;
};

template <typename Key, typename Value>
class alignas(Item<Key, Value>) alignas(Node<Key, Value>) LeafNode final
    : public Node<Key, Value> {
 public:
  using item_type = Item<Key, Value>;
  using ref_type = Ref<Key, Value>;

  static_assert(alignof(item_type) <= __STDCPP_DEFAULT_NEW_ALIGNMENT__);

  [[nodiscard]] std::span<const item_type> items() const noexcept {
    return {data(), count_};
  }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }

  /// Builds a leaf of n items where item i is gen(i).
  template <typename Gen>
  [[nodiscard]] static ref_type make(std::size_t n, Gen&& gen) {
    assert(n >= 1 && n <= kLeafCapacity);
    void* mem = ::operator new(sizeof(LeafNode) + n * sizeof(item_type));
    auto* leaf = ::new (mem) LeafNode{};
    try {
      for (; leaf->count_ < n; ++leaf->count_)
        ::new (leaf->data() + leaf->count_) item_type(gen(leaf->count_));
    } catch (...) {
      destroy(leaf);
      throw;
    }
    ++detail::thread_allocations();
    return ref_type::adopt(leaf);
  }

  static void destroy(const LeafNode* leaf) noexcept {
    auto* self = const_cast<LeafNode*>(leaf);
    std::destroy_n(self->data(), self->count_);
    self->~LeafNode();
    ::operator delete(static_cast<void*>(self));
  }

 private:
  LeafNode() noexcept : Node<Key, Value>{true} {}
  ~LeafNode() = default;

  item_type* data() noexcept { return reinterpret_cast<item_type*>(this + 1); }
  const item_type* data() const noexcept {
    return reinterpret_cast<const item_type*>(this + 1);
  }

  std::uint32_t count_ = 0;
};

template <typename Key, typename Value>
std::size_t size(const Node<Key, Value>* n) noexcept {
  if (n == nullptr) return 0;
  return n->is_leaf() ? n->as_leaf()->size() : n->as_internal()->size();
}

/// Smallest key, or nullptr for the empty treap.
template <typename Key, typename Value>
[[nodiscard]] const Key* first_key(const Node<Key, Value>* n) noexcept {
  if (n == nullptr) return nullptr;
  while (!n->is_leaf()) n = n->as_internal()->left();
  return &n->as_leaf()->items().front().key;
}

/// Largest key, or nullptr for the empty treap.
template <typename Key, typename Value>
[[nodiscard]] const Key* last_key(const Node<Key, Value>* n) noexcept {
  if (n == nullptr) return nullptr;
  while (!n->is_leaf()) n = n->as_internal()->right();
  return &n->as_leaf()->items().back().key;
}

/// The stored item with the given key, or nullptr. The pointer is valid for as
/// long as the version it was found in is kept alive.
template <typename Key, typename Value>
[[nodiscard]] const Item<Key, Value>* lookup(const Node<Key, Value>* n,
                                             const Key& key) noexcept {
  if (n == nullptr) return nullptr;
  while (!n->is_leaf()) {
    const auto* in = n->as_internal();
    n = key < in->key() ? in->left() : in->right();
  }
  const auto items = n->as_leaf()->items();
  const auto it = std::lower_bound(
      items.begin(), items.end(), key,
      [](const Item<Key, Value>& item, const Key& k) { return item.key < k; });
  if (it == items.end() || key < it->key) return nullptr;
  return &*it;
}

/// Calls visit(item) for every item with lo <= key <= hi, in key order.
template <typename Key, typename Value, typename Visitor>
void for_each_in_range(const Node<Key, Value>* n, const Key& lo, const Key& hi,
                       Visitor&& visit) {
  if (n == nullptr) return;
  while (!n->is_leaf()) {
    const auto* in = n->as_internal();
    const bool go_left = lo < in->key();
    const bool go_right = !(hi < in->key());
    if (go_left && go_right) {
      for_each_in_range(in->left(), lo, hi, visit);
      n = in->right();
    } else {
      n = go_left ? in->left() : in->right();
    }
  }
  const auto items = n->as_leaf()->items();
  auto it = std::lower_bound(
      items.begin(), items.end(), lo,
      [](const Item<Key, Value>& item, const Key& k) { return item.key < k; });
  for (; it != items.end() && !(hi < it->key); ++it) visit(*it);
}

/// The item at zero-based position rank in key order. rank < size(n).
template <typename Key, typename Value>
[[nodiscard]] const Item<Key, Value>& select(const Node<Key, Value>* n,
                                             std::size_t rank) noexcept {
  assert(rank < size(n));
  while (!n->is_leaf()) {
    const auto* in = n->as_internal();
    const auto left_size = size(in->left());
    if (rank < left_size) {
      n = in->left();
    } else {
      rank -= left_size;
      n = in->right();
    }
  }
  return n->as_leaf()->items()[rank];
}

template <typename Key, typename Value>
struct InsertResult {
  Ref<Key, Value> root;
  std::optional<Item<Key, Value>> previous;
};

template <typename Key, typename Value>
struct RemoveResult {
  Ref<Key, Value> root;
  std::optional<Item<Key, Value>> removed;
};

template <typename Key, typename Value>
struct SplitResult {
  Ref<Key, Value> left;
  Ref<Key, Value> right;
  Key split_key;
};

namespace detail {

template <typename Rng>
std::uint64_t draw_priority(Rng& rng) {
  return std::uniform_int_distribution<std::uint64_t>{}(rng);
}

template <typename Key, typename Value>
Ref<Key, Value> make_internal(Key key, std::uint64_t priority,
                              Ref<Key, Value> left, Ref<Key, Value> right) {
  auto* n = new InternalNode<Key, Value>{std::move(key), priority,
                                         std::move(left), std::move(right)};
  ++thread_allocations();
  return Ref<Key, Value>::adopt(n);
}

template <typename Key, typename Value>
std::uint64_t priority_of(const Node<Key, Value>* n) noexcept {
  return n->as_internal()->priority();
}

template <typename Key, typename Value>
auto lower_bound_key(std::span<const Item<Key, Value>> items, const Key& key) {
  return static_cast<std::size_t>(
      std::lower_bound(items.begin(), items.end(), key,
                       [](const Item<Key, Value>& item, const Key& k) {
                         return item.key < k;
                       }) -
      items.begin());
}

template <typename Key, typename Value, typename Rng>
Ref<Key, Value> insert_into_leaf(const LeafNode<Key, Value>* leaf,
                                 const Item<Key, Value>& item, Rng& rng,
                                 std::optional<Item<Key, Value>>& previous) {
  using leaf_type = LeafNode<Key, Value>;
  const auto items = leaf->items();
  const auto n = items.size();
  const auto pos = lower_bound_key(items, item.key);
  if (pos < n && !(item.key < items[pos].key)) {
    previous = items[pos];
    return leaf_type::make(n, [&](std::size_t i) -> const Item<Key, Value>& {
      return i == pos ? item : items[i];
    });
  }
  // Position i of the logical n + 1 item sequence.
  const auto at = [&](std::size_t i) -> const Item<Key, Value>& {
    return i < pos ? items[i] : i == pos ? item : items[i - 1];
  };
  if (n < kLeafCapacity) return leaf_type::make(n + 1, at);

  const auto total = n + 1;
  const auto left_count = (total + 1) / 2;
  auto left = leaf_type::make(left_count, at);
  auto right = leaf_type::make(total - left_count, [&](std::size_t i) {
    return at(left_count + i);
  });
  Key separator = at(left_count).key;
  return make_internal(std::move(separator), draw_priority(rng),
                       std::move(left), std::move(right));
}

template <typename Key, typename Value, typename Rng>
Ref<Key, Value> insert_rec(const Node<Key, Value>* n,
                           const Item<Key, Value>& item, Rng& rng,
                           std::optional<Item<Key, Value>>& previous) {
  using ref_type = Ref<Key, Value>;
  if (n->is_leaf()) return insert_into_leaf(n->as_leaf(), item, rng, previous);

  const auto* in = n->as_internal();
  if (item.key < in->key()) {
    auto sub = insert_rec(in->left(), item, rng, previous);
    if (!sub->is_leaf() && priority_of(sub.get()) > in->priority()) {
      // Rotate right: only a node born from a leaf split can outrank us.
      const auto* s = sub->as_internal();
      return make_internal(
          s->key(), s->priority(), ref_type::share(s->left()),
          make_internal(in->key(), in->priority(), ref_type::share(s->right()),
                        ref_type::share(in->right())));
    }
    return make_internal(in->key(), in->priority(), std::move(sub),
                         ref_type::share(in->right()));
  }
  auto sub = insert_rec(in->right(), item, rng, previous);
  if (!sub->is_leaf() && priority_of(sub.get()) > in->priority()) {
    const auto* s = sub->as_internal();
    return make_internal(
        s->key(), s->priority(),
        make_internal(in->key(), in->priority(), ref_type::share(in->left()),
                      ref_type::share(s->left())),
        ref_type::share(s->right()));
  }
  return make_internal(in->key(), in->priority(), ref_type::share(in->left()),
                       std::move(sub));
}

template <typename Key, typename Value>
Ref<Key, Value> remove_rec(const Node<Key, Value>* n, const Key& key,
                           std::optional<Item<Key, Value>>& removed) {
  using ref_type = Ref<Key, Value>;
  if (n->is_leaf()) {
    const auto items = n->as_leaf()->items();
    const auto pos = lower_bound_key(items, key);
    if (pos == items.size() || key < items[pos].key) return ref_type::share(n);
    removed = items[pos];
    if (items.size() == 1) return {};
    return LeafNode<Key, Value>::make(
        items.size() - 1,
        [&](std::size_t i) -> const Item<Key, Value>& {
          return items[i < pos ? i : i + 1];
        });
  }
  const auto* in = n->as_internal();
  if (key < in->key()) {
    auto sub = remove_rec(in->left(), key, removed);
    if (sub.get() == in->left()) return ref_type::share(n);
    if (!sub) return ref_type::share(in->right());
    return make_internal(in->key(), in->priority(), std::move(sub),
                         ref_type::share(in->right()));
  }
  auto sub = remove_rec(in->right(), key, removed);
  if (sub.get() == in->right()) return ref_type::share(n);
  if (!sub) return ref_type::share(in->left());
  return make_internal(in->key(), in->priority(), ref_type::share(in->left()),
                       std::move(sub));
}

template <typename Key, typename Value>
std::pair<Ref<Key, Value>, Ref<Key, Value>> split_rec(
    const Node<Key, Value>* n, const Key& key) {
  using ref_type = Ref<Key, Value>;
  using leaf_type = LeafNode<Key, Value>;
  if (n->is_leaf()) {
    const auto items = n->as_leaf()->items();
    const auto pos = lower_bound_key(items, key);
    if (pos == 0) return {ref_type{}, ref_type::share(n)};
    if (pos == items.size()) return {ref_type::share(n), ref_type{}};
    auto left = leaf_type::make(pos, [&](std::size_t i) -> const auto& {
      return items[i];
    });
    auto right = leaf_type::make(items.size() - pos,
                                 [&](std::size_t i) -> const auto& {
                                   return items[pos + i];
                                 });
    return {std::move(left), std::move(right)};
  }
  const auto* in = n->as_internal();
  if (key < in->key()) {
    auto [a, b] = split_rec(in->left(), key);
    auto right = b ? make_internal(in->key(), in->priority(), std::move(b),
                                   ref_type::share(in->right()))
                   : ref_type::share(in->right());
    return {std::move(a), std::move(right)};
  }
  if (in->key() < key) {
    auto [a, b] = split_rec(in->right(), key);
    auto left = a ? make_internal(in->key(), in->priority(),
                                  ref_type::share(in->left()), std::move(a))
                  : ref_type::share(in->left());
    return {std::move(left), std::move(b)};
  }
  return {ref_type::share(in->left()), ref_type::share(in->right())};
}

// Joins a and b (all keys of a below separator <= all keys of b) as if a node
// (separator, priority) sat between them, then dropped if it ends up directly
// above two leaves that fit in one.
template <typename Key, typename Value>
Ref<Key, Value> join_rec(const Node<Key, Value>* a, const Key& separator,
                         std::uint64_t priority, const Node<Key, Value>* b) {
  using ref_type = Ref<Key, Value>;
  const bool a_internal = !a->is_leaf();
  const bool b_internal = !b->is_leaf();
  if (a_internal && priority_of(a) >= priority &&
      (!b_internal || priority_of(a) >= priority_of(b))) {
    const auto* ia = a->as_internal();
    return make_internal(ia->key(), ia->priority(), ref_type::share(ia->left()),
                         join_rec(ia->right(), separator, priority, b));
  }
  if (b_internal && priority_of(b) >= priority) {
    const auto* ib = b->as_internal();
    return make_internal(ib->key(), ib->priority(),
                         join_rec(a, separator, priority, ib->left()),
                         ref_type::share(ib->right()));
  }
  if (!a_internal && !b_internal) {
    const auto left = a->as_leaf()->items();
    const auto right = b->as_leaf()->items();
    if (left.size() + right.size() <= kLeafCapacity) {
      return LeafNode<Key, Value>::make(
          left.size() + right.size(),
          [&](std::size_t i) -> const Item<Key, Value>& {
            return i < left.size() ? left[i] : right[i - left.size()];
          });
    }
  }
  return make_internal(separator, priority, ref_type::share(a),
                       ref_type::share(b));
}

template <typename Key, typename Value>
bool check_rec(const Node<Key, Value>* n, const Key* lo, const Key* hi,
               std::size_t& count, std::string& error) {
  if (n->is_leaf()) {
    const auto items = n->as_leaf()->items();
    if (items.empty() || items.size() > kLeafCapacity) {
      error = "leaf size out of bounds: " + std::to_string(items.size());
      return false;
    }
    for (std::size_t i = 1; i < items.size(); ++i) {
      if (!(items[i - 1].key < items[i].key)) {
        error = "leaf items not strictly sorted";
        return false;
      }
    }
    if ((lo != nullptr && items.front().key < *lo) ||
        (hi != nullptr && !(items.back().key < *hi))) {
      error = "leaf item outside routing bounds";
      return false;
    }
    count = items.size();
    return true;
  }
  const auto* in = n->as_internal();
  if (in->left() == nullptr || in->right() == nullptr) {
    error = "internal node with a missing child";
    return false;
  }
  for (const auto* child : {in->left(), in->right()}) {
    if (!child->is_leaf() && priority_of(child) > in->priority()) {
      error = "heap order violated";
      return false;
    }
  }
  if ((lo != nullptr && in->key() < *lo) ||
      (hi != nullptr && !(in->key() < *hi))) {
    error = "routing key outside ancestor bounds";
    return false;
  }
  std::size_t left_count = 0;
  std::size_t right_count = 0;
  if (!check_rec(in->left(), lo, &in->key(), left_count, error)) return false;
  if (!check_rec(in->right(), &in->key(), hi, right_count, error)) return false;
  count = left_count + right_count;
  if (count != in->size()) {
    error = "cached size mismatch";
    return false;
  }
  return true;
}

}  // namespace detail

/// New version containing item; an item with an equal key is replaced and
/// reported in `previous`.
template <typename Key, typename Value, typename Rng>
[[nodiscard]] InsertResult<Key, Value> insert(const Node<Key, Value>* root,
                                              Item<Key, Value> item, Rng& rng) {
  InsertResult<Key, Value> result;
  if (root == nullptr) {
    result.root = LeafNode<Key, Value>::make(
        1, [&](std::size_t) -> const Item<Key, Value>& { return item; });
    return result;
  }
  result.root = detail::insert_rec(root, item, rng, result.previous);
  return result;
}

/// New version without key. If key is absent the input version is shared.
template <typename Key, typename Value>
[[nodiscard]] RemoveResult<Key, Value> remove(const Node<Key, Value>* root,
                                              const Key& key) {
  RemoveResult<Key, Value> result;
  if (root != nullptr) result.root = detail::remove_rec(root, key, result.removed);
  return result;
}

/// (keys < key, keys >= key).
template <typename Key, typename Value>
[[nodiscard]] std::pair<Ref<Key, Value>, Ref<Key, Value>> split(
    const Node<Key, Value>* root, const Key& key) {
  if (root == nullptr) return {};
  return detail::split_rec(root, key);
}

/// Splits at the key of the item with rank size/2, so both halves differ in
/// size by at most one. Throws std::invalid_argument for fewer than 2 items.
template <typename Key, typename Value>
[[nodiscard]] SplitResult<Key, Value> split_median(const Node<Key, Value>* root) {
  const auto n = size(root);
  if (n < 2)
    throw std::invalid_argument("treap::split_median: needs at least 2 items");
  Key key = select(root, n / 2).key;
  auto [left, right] = detail::split_rec(root, key);
  return {std::move(left), std::move(right), std::move(key)};
}

/// Union of two versions where every key of left is below every key of right.
template <typename Key, typename Value, typename Rng>
[[nodiscard]] Ref<Key, Value> join(const Node<Key, Value>* left,
                                   const Node<Key, Value>* right, Rng& rng) {
  using ref_type = Ref<Key, Value>;
  if (left == nullptr) return ref_type::share(right);
  if (right == nullptr) return ref_type::share(left);
  assert(*last_key(left) < *first_key(right));
  const Key& separator = *first_key(right);
  return detail::join_rec(left, separator, detail::draw_priority(rng), right);
}

/// Checks BST order, heap order, leaf bounds and cached sizes. Returns an
/// empty string when everything holds.
template <typename Key, typename Value>
[[nodiscard]] std::string check_invariants(const Node<Key, Value>* root) {
  if (root == nullptr) return {};
  std::string error;
  std::size_t count = 0;
  detail::check_rec<Key, Value>(root, nullptr, nullptr, count, error);
  return error;
}

}  // namespace treap

/// Persistent treap value. Copies share structure; every operation returning
/// a Treap leaves *this untouched.
template <typename Key, typename Value>
class Treap {
 public:
  using key_type = Key;
  using item_type = Item<Key, Value>;
  using node_type = treap::Node<Key, Value>;
  using ref_type = treap::Ref<Key, Value>;

  Treap() noexcept = default;
  explicit Treap(ref_type root) noexcept : root_{std::move(root)} {}

  template <typename Rng>
  [[nodiscard]] Treap insert(item_type item, Rng& rng,
                             std::optional<item_type>* previous = nullptr) const {
    auto r = treap::insert(root_.get(), std::move(item), rng);
    if (previous != nullptr) *previous = std::move(r.previous);
    return Treap{std::move(r.root)};
  }

  [[nodiscard]] Treap remove(const Key& key,
                             std::optional<item_type>* removed = nullptr) const {
    auto r = treap::remove(root_.get(), key);
    if (removed != nullptr) *removed = std::move(r.removed);
    return Treap{std::move(r.root)};
  }

  [[nodiscard]] std::optional<item_type> lookup(const Key& key) const {
    const auto* item = treap::lookup(root_.get(), key);
    if (item == nullptr) return std::nullopt;
    return *item;
  }

  template <typename Visitor>
  void for_each_in_range(const Key& lo, const Key& hi, Visitor&& visit) const {
    treap::for_each_in_range(root_.get(), lo, hi, visit);
  }

  struct Halves {
    Treap left;
    Treap right;
    Key split_key;
  };

  [[nodiscard]] Halves split_median() const {
    auto r = treap::split_median(root_.get());
    return {Treap{std::move(r.left)}, Treap{std::move(r.right)},
            std::move(r.split_key)};
  }

  template <typename Rng>
  [[nodiscard]] static Treap join(const Treap& left, const Treap& right,
                                  Rng& rng) {
    return Treap{treap::join(left.root_.get(), right.root_.get(), rng)};
  }

  [[nodiscard]] std::size_t size() const noexcept {
    return treap::size(root_.get());
  }
  [[nodiscard]] bool empty() const noexcept { return !root_; }
  [[nodiscard]] std::optional<Key> first_key() const {
    const auto* k = treap::first_key(root_.get());
    return k == nullptr ? std::nullopt : std::optional<Key>{*k};
  }
  [[nodiscard]] std::optional<Key> last_key() const {
    const auto* k = treap::last_key(root_.get());
    return k == nullptr ? std::nullopt : std::optional<Key>{*k};
  }

  [[nodiscard]] std::string check_invariants() const {
    return treap::check_invariants(root_.get());
  }

  [[nodiscard]] const node_type* root() const noexcept { return root_.get(); }

 private:
  ref_type root_;
};

}  // namespace catree

#endif  // CATREE_IMMUTABLE_TREAP_HPP
