#ifndef CATREE_STAT_SEQLOCK_HPP
#define CATREE_STAT_SEQLOCK_HPP

/// \file
/// Base-node lock: a reader/writer sequence lock with an embedded contention
/// statistics counter.
///
/// The sequence word is even while no writer holds the lock and odd while one
/// does. Every write-mode acquisition and release bumps it by one, so two
/// equal even reads of the sequence certify that no writer held the lock in
/// between. Shared (read-mode) holders never touch the sequence.
///
/// Optimistic read protocol:
/// \code{.cpp}
/// const auto s = lock.read_sequence();
/// if (StatSeqLock::is_write_locked(s)) restart();
/// const auto copy = protected_atomic.load(std::memory_order_acquire);
/// if (!lock.validate(s)) restart();
/// use(copy);
/// \endcode
///
/// Data protected by the lock must be accessed through atomics (relaxed is
/// enough for fields only read optimistically) since optimistic readers race
/// with the writer.

#include <atomic>
#include <cstdint>

namespace catree {

class alignas(64) StatSeqLock {
 public:
  using sequence_type = std::uint64_t;

  StatSeqLock() noexcept = default;
  StatSeqLock(const StatSeqLock&) = delete;
  StatSeqLock& operator=(const StatSeqLock&) = delete;

  [[nodiscard]] static constexpr bool is_write_locked(sequence_type s) noexcept {
    return (s & 1U) != 0;
  }

  /// Blocks until write mode is held. Returns true if the first acquisition
  /// attempt failed, i.e. the caller had to wait.
  bool write_lock() noexcept {
    auto s = seq_.load(std::memory_order_relaxed);
    if (!is_write_locked(s) &&
        seq_.compare_exchange_strong(s, s + 1, std::memory_order_seq_cst)) {
      if (readers_.load(std::memory_order_seq_cst) == 0) return false;
      wait_for_readers();
      return true;
    }
    write_lock_slow();
    return true;
  }

  /// Never blocks. On failure the lock, including its sequence, is unchanged.
  [[nodiscard]] bool try_write_lock() noexcept;

  /// Throws std::logic_error if the lock is not write-held.
  void write_unlock();

  void read_lock() noexcept {
    readers_.fetch_add(1, std::memory_order_seq_cst);
    if (!is_write_locked(seq_.load(std::memory_order_seq_cst))) return;
    read_lock_slow();
  }

  /// Throws std::logic_error if no reader holds the lock.
  void read_unlock();

  [[nodiscard]] sequence_type read_sequence() const noexcept {
    return seq_.load(std::memory_order_acquire);
  }

  /// True iff s is even and no write-mode acquisition happened since s was
  /// read. Orders all preceding loads before the check.
  [[nodiscard]] bool validate(sequence_type s) const noexcept {
    std::atomic_thread_fence(std::memory_order_acquire);
    return !is_write_locked(s) && seq_.load(std::memory_order_relaxed) == s;
  }

  /// Spins until the sequence is even or the spin budget runs out; returns the
  /// last sequence observed.
  [[nodiscard]] sequence_type read_sequence_spin(unsigned spins) const noexcept;

  // Contention statistics. Written by the write-mode holder; range queries
  // also subtract from it under read mode, where lost updates are tolerated.
  [[nodiscard]] std::int64_t stat_get() const noexcept {
    return stats_.load(std::memory_order_relaxed);
  }
  void stat_add(std::int64_t delta) noexcept {
    stats_.store(stats_.load(std::memory_order_relaxed) + delta,
                 std::memory_order_relaxed);
  }
  void stat_set(std::int64_t value) noexcept {
    stats_.store(value, std::memory_order_relaxed);
  }

  [[nodiscard]] std::uint32_t reader_count() const noexcept {
    return readers_.load(std::memory_order_relaxed);
  }

 private:
  void write_lock_slow() noexcept;
  void read_lock_slow() noexcept;
  void wait_for_readers() const noexcept;

  std::atomic<sequence_type> seq_{0};
  std::atomic<std::uint32_t> readers_{0};
  std::atomic<std::int64_t> stats_{0};
};

namespace detail {

/// Bounded busy-wait step: pause for the first iterations, then yield.
void backoff(unsigned& iteration) noexcept;

}  // namespace detail

}  // namespace catree

#endif  // CATREE_STAT_SEQLOCK_HPP
