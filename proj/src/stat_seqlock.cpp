#include "catree/stat_seqlock.hpp"

#include <stdexcept>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace catree {

namespace detail {

void backoff(unsigned& iteration) noexcept {
  constexpr unsigned kSpinLimit = 64;
  if (iteration++ < kSpinLimit) {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#elif defined(__aarch64__)
    asm volatile("yield");
#endif
  } else {
    std::this_thread::yield();
  }
}

}  // namespace detail

bool StatSeqLock::try_write_lock() noexcept {
  auto s = seq_.load(std::memory_order_relaxed);
  if (is_write_locked(s) || readers_.load(std::memory_order_relaxed) != 0)
    return false;
  if (!seq_.compare_exchange_strong(s, s + 1, std::memory_order_seq_cst))
    return false;
  if (readers_.load(std::memory_order_seq_cst) == 0) return true;
  // A reader slipped in. Nothing was written, so restoring the old even value
  // keeps concurrent optimistic validations sound.
  seq_.store(s, std::memory_order_release);
  return false;
}

void StatSeqLock::write_unlock() {
  const auto s = seq_.load(std::memory_order_relaxed);
  if (!is_write_locked(s))
    throw std::logic_error("StatSeqLock::write_unlock: lock not write-held");
  seq_.store(s + 1, std::memory_order_release);
}

void StatSeqLock::read_unlock() {
  auto n = readers_.load(std::memory_order_relaxed);
  do {
    if (n == 0)
      throw std::logic_error("StatSeqLock::read_unlock: lock not read-held");
  } while (!readers_.compare_exchange_weak(n, n - 1, std::memory_order_release,
                                           std::memory_order_relaxed));
}

StatSeqLock::sequence_type StatSeqLock::read_sequence_spin(
    unsigned spins) const noexcept {
  auto s = read_sequence();
  for (unsigned i = 0; is_write_locked(s) && i < spins;) {
    detail::backoff(i);
    s = read_sequence();
  }
  return s;
}

void StatSeqLock::write_lock_slow() noexcept {
  unsigned it = 0;
  for (;;) {
    auto s = seq_.load(std::memory_order_relaxed);
    if (!is_write_locked(s) &&
        seq_.compare_exchange_weak(s, s + 1, std::memory_order_seq_cst)) {
      break;
    }
    detail::backoff(it);
  }
  wait_for_readers();
}

void StatSeqLock::read_lock_slow() noexcept {
  unsigned it = 0;
  for (;;) {
    readers_.fetch_sub(1, std::memory_order_release);
    while (is_write_locked(seq_.load(std::memory_order_relaxed)))
      detail::backoff(it);
    readers_.fetch_add(1, std::memory_order_seq_cst);
    if (!is_write_locked(seq_.load(std::memory_order_seq_cst))) return;
  }
}

void StatSeqLock::wait_for_readers() const noexcept {
  unsigned it = 0;
  while (readers_.load(std::memory_order_seq_cst) != 0) detail::backoff(it);
}

}  // namespace catree
