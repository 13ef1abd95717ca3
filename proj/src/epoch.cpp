#include "catree/epoch.hpp"

#include <array>
#include <cassert>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace catree::epoch {
namespace {

constexpr std::size_t kMaxThreads = 1024;
constexpr std::size_t kAdvanceInterval = 64;
// Starts at 2 so that "retired epoch + 2 <= global" never underflows.
constexpr std::uint64_t kFirstEpoch = 2;

struct alignas(64) Slot {
  // 0 while the owning thread is not pinned.
  std::atomic<std::uint64_t> epoch{0};
  std::atomic<bool> in_use{false};
};

struct Retired {
  void* ptr;
  deleter_fn fn;
};

struct Bucket {
  std::uint64_t epoch = 0;
  std::vector<Retired> items;
};

class Domain {
 public:
  ~Domain() {
    for (auto& b : orphans_) run(b.items);
  }

  std::uint64_t epoch() const noexcept {
    return global_.load(std::memory_order_seq_cst);
  }

  Slot* acquire_slot() {
    for (std::size_t i = 0; i < kMaxThreads; ++i) {
      bool expected = false;
      if (!slots_[i].in_use.load(std::memory_order_relaxed) &&
          slots_[i].in_use.compare_exchange_strong(expected, true)) {
        auto hw = high_water_.load();
        while (hw < i + 1 && !high_water_.compare_exchange_weak(hw, i + 1)) {
        }
        return &slots_[i];
      }
    }
    throw std::runtime_error("epoch: more than 1024 concurrent threads");
  }

  void release_slot(Slot* s) noexcept {
    s->epoch.store(0, std::memory_order_release);
    s->in_use.store(false, std::memory_order_release);
  }

  bool try_advance() noexcept {
    auto e = global_.load(std::memory_order_seq_cst);
    const auto hw = high_water_.load(std::memory_order_acquire);
    for (std::size_t i = 0; i < hw; ++i) {
      const auto local = slots_[i].epoch.load(std::memory_order_seq_cst);
      if (local != 0 && local != e) return false;
    }
    return global_.compare_exchange_strong(e, e + 1);
  }

  void adopt_orphans(std::array<Bucket, 3>& limbo) {
    std::lock_guard lock{orphan_mu_};
    for (auto& b : limbo) {
      if (b.items.empty()) continue;
      orphans_.push_back(std::move(b));
      b = Bucket{};
    }
    has_orphans_.store(!orphans_.empty(), std::memory_order_release);
  }

  void collect_orphans(bool everything) {
    if (!has_orphans_.load(std::memory_order_acquire)) return;
    std::vector<Bucket> ready;
    {
      std::lock_guard lock{orphan_mu_};
      const auto g = epoch();
      for (auto it = orphans_.begin(); it != orphans_.end();) {
        if (everything || it->epoch + 2 <= g) {
          ready.push_back(std::move(*it));
          it = orphans_.erase(it);
        } else {
          ++it;
        }
      }
      has_orphans_.store(!orphans_.empty(), std::memory_order_release);
    }
    for (auto& b : ready) run(b.items);
  }

  void run(std::vector<Retired>& items) noexcept {
    // Deleters may retire further objects, so detach the list first.
    auto local = std::move(items);
    items.clear();
    for (const auto& r : local) r.fn(r.ptr);
    pending_.fetch_sub(local.size(), std::memory_order_relaxed);
  }

  void note_retired() noexcept {
    pending_.fetch_add(1, std::memory_order_relaxed);
  }
  std::size_t pending() const noexcept {
    return pending_.load(std::memory_order_relaxed);
  }

 private:
  std::atomic<std::uint64_t> global_{kFirstEpoch};
  std::array<Slot, kMaxThreads> slots_{};
  std::atomic<std::size_t> high_water_{0};
  std::mutex orphan_mu_;
  std::vector<Bucket> orphans_;
  std::atomic<bool> has_orphans_{false};
  std::atomic<std::size_t> pending_{0};
};

Domain& domain() {
  static Domain d;
  return d;
}

struct ThreadState {
  Slot* slot = nullptr;
  unsigned nesting = 0;
  std::size_t since_advance = 0;
  std::array<Bucket, 3> limbo;

  ThreadState() { domain(); }

  ~ThreadState() {
    auto& d = domain();
    d.adopt_orphans(limbo);
    if (slot != nullptr) d.release_slot(slot);
  }

  void collect(std::uint64_t global) {
    for (auto& b : limbo) {
      if (!b.items.empty() && b.epoch + 2 <= global) domain().run(b.items);
    }
  }
};

ThreadState& state() {
  thread_local ThreadState ts;
  return ts;
}

}  // namespace

Guard::Guard() noexcept {
  auto& ts = state();
  if (ts.nesting++ != 0) return;
  if (ts.slot == nullptr) ts.slot = domain().acquire_slot();
  ts.slot->epoch.store(domain().epoch(), std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

Guard::~Guard() {
  auto& ts = state();
  assert(ts.nesting > 0);
  if (--ts.nesting == 0) ts.slot->epoch.store(0, std::memory_order_release);
}

void retire(void* ptr, deleter_fn deleter) {
  auto& d = domain();
  auto& ts = state();
  const auto e = d.epoch();
  auto& bucket = ts.limbo[e % 3];
  if (bucket.epoch != e) {
    // Whatever is left in this bucket was retired at e - 3 or earlier.
    d.run(bucket.items);
    bucket.epoch = e;
  }
  bucket.items.push_back({ptr, deleter});
  d.note_retired();
  if (++ts.since_advance >= kAdvanceInterval) {
    ts.since_advance = 0;
    d.try_advance();
    ts.collect(d.epoch());
    d.collect_orphans(false);
  }
}

void drain_quiescent() {
  auto& d = domain();
  auto& ts = state();
  assert(ts.nesting == 0);
  for (int i = 0; i < 3; ++i) d.try_advance();
  for (auto& b : ts.limbo) d.run(b.items);
  d.collect_orphans(true);
}

std::size_t pending() { return domain().pending(); }

std::uint64_t current_epoch() noexcept { return domain().epoch(); }

}  // namespace catree::epoch
