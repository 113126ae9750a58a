#pragma once

#include <cstdint>
#include <string_view>

namespace dsg {

// Counter-based 64-bit generator built on splitmix64 finalization.
// Sub-streams are derived as hash(master_seed, purpose_tag, index), so
// independent consumers (trials, hallucinations, node programs) never
// share mutable state.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    // rejection sampling to avoid modulo bias
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  uint64_t state_;
};

inline uint64_t hash_tag(std::string_view tag) {
  // FNV-1a
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive an independent sub-stream seed from a master seed, a purpose tag,
// and an index.
inline uint64_t derive_seed(uint64_t master, std::string_view tag,
                            uint64_t index = 0) {
  uint64_t h = mix64(master ^ hash_tag(tag));
  return mix64(h ^ (index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag,
                            uint64_t i, uint64_t j) {
  return derive_seed(derive_seed(master, tag, i), tag, j + 1);
}

}  // namespace dsg
