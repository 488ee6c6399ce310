#include "dikl/rng.hpp"

#include <cmath>

namespace dikl {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kGolden2 = 0x61c8864680b583ebULL;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream RngStream::substream(std::uint64_t key) const {
  // Mixing the parent id with the key keeps sibling streams decorrelated even
  // for adjacent keys.
  return RngStream(seed_, mix64(id_ + kGolden2) ^ mix64(key + kGolden));
}

RngStream RngStream::substream(std::string_view label) const {
  return substream(hash_label(label));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t key =
      mix64(seed_ + kGolden) ^ mix64(id_ + kGolden2);
  return mix64(key + (counter_++) * kGolden);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
  // Box-Muller, cosine branch only. Always consumes exactly two u64 so that
  // counters stay aligned across coupled runs.
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Bounded rejection sampling to avoid modulo bias.
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

}  // namespace dikl
