#pragma once

#include <cstdint>

namespace sdig {

/// SplitMix64 finalizer. Bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent sub-seed from a parent seed and a stream label.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) noexcept {
  return mix64(mix64(parent) ^ mix64(label + 0x632be59bd9b4e019ULL));
}

/// Counter-based stream: the n-th output is a pure function of (key, n).
///
/// Each agent owns one stream keyed by (experiment seed, agent id), so the
/// index sequence an agent sees does not depend on how agents are scheduled.
/// The counter is the whole mutable state, which makes checkpointing trivial.
class CounterStream {
 public:
  CounterStream() = default;
  CounterStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(derive_seed(seed, stream_id)) {}

  std::uint64_t next() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform integer in [0, bound). Rejection keeps it exactly uniform.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept {
    if (bound <= 1) {
      ++counter_;
      return 0;
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % bound;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }
  void set_counter(std::uint64_t c) noexcept { counter_ = c; }
  void set_key(std::uint64_t k) noexcept { key_ = k; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace sdig
