#ifndef CATREE_EPOCH_HPP
#define CATREE_EPOCH_HPP

/// \file
/// Epoch-based deferred reclamation.
///
/// Readers pin the current epoch for the duration of an operation. Memory
/// unlinked from a shared structure is handed to retire() together with a
/// deleter and is only destroyed once every thread that could still hold a
/// reference to it has unpinned. The global epoch advances when all pinned
/// threads have observed it; objects retired in epoch e are destroyed once the
/// global epoch reaches e + 2.

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace catree::epoch {

using deleter_fn = void (*)(void*);

/// RAII pin of the calling thread. Nesting is allowed.
class [[nodiscard]] Guard {
 public:
  Guard() noexcept;
  ~Guard();

  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;
  Guard(Guard&&) = delete;
  Guard& operator=(Guard&&) = delete;
};

inline Guard pin() noexcept { return {}; }

/// Schedules deleter(ptr) to run once no pinned thread can observe ptr.
/// ptr must already be unreachable for threads that pin after this call.
void retire(void* ptr, deleter_fn deleter);

template <typename T>
void retire(T* ptr) {
  retire(const_cast<void*>(static_cast<const void*>(ptr)),
         [](void* p) { delete static_cast<T*>(p); });
}

/// Frees everything retired so far. Only valid at quiescence: no other thread
/// may be pinned or touching any retired object.
void drain_quiescent();

/// Objects retired but not yet destroyed, across all threads (approximate
/// while other threads run).
std::size_t pending();

/// Current global epoch, exposed for tests.
std::uint64_t current_epoch() noexcept;

}  // namespace catree::epoch

#endif  // CATREE_EPOCH_HPP
