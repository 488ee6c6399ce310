#pragma once

#include <cstdint>
#include <string_view>

namespace dikl {

// Counter-based splittable RNG. A draw is a pure function of
// (seed, stream id, counter), so any substream can be replayed or handed to
// another thread without coordination. A stream must not be advanced
// concurrently.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t id) : seed_(seed), id_(id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t id() const { return id_; }
  std::uint64_t counter() const { return counter_; }

  // Derived stream with an unrelated id and a fresh counter.
  RngStream substream(std::uint64_t key) const;
  RngStream substream(std::string_view label) const;

  std::uint64_t next_u64();
  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1]
  double normal();        // standard normal, Box-Muller (two u64 per draw)
  std::uint64_t below(std::uint64_t n);  // uniform in {0, ..., n-1}

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t id_ = 0;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; the avalanche core of the counter-based generator.
std::uint64_t mix64(std::uint64_t z);

// FNV-1a, used to turn substream labels into keys.
std::uint64_t hash_label(std::string_view label);

}  // namespace dikl
