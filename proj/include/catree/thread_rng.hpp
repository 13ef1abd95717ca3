#ifndef CATREE_THREAD_RNG_HPP
#define CATREE_THREAD_RNG_HPP

#include <atomic>
#include <cstdint>
#include <random>

namespace catree::detail {

/// Per-thread generator for treap priorities. Each thread gets a distinct
/// stream; streams are not reproducible across runs.
inline std::mt19937_64& thread_rng() {
  static std::atomic<std::uint64_t> next_stream{1};
  thread_local std::mt19937_64 rng{0x9E3779B97F4A7C15ULL *
                                   next_stream.fetch_add(1, std::memory_order_relaxed)};
  return rng;
}

}  // namespace catree::detail

#endif  // CATREE_THREAD_RNG_HPP
