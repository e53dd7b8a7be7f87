#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace svqe {

// splitmix64 finalizer; used both as a stream-derivation hash and to seed
// mt19937_64 engines from a single 64-bit master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministically derives an independent stream seed from a master seed,
// a textual role tag and an index.  Distinct (tag, index) pairs give
// decorrelated streams, so parallel evaluation order never changes results.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master);
  for (unsigned char c : tag) h = splitmix64(h ^ c);
  return splitmix64(h ^ index);
}

// Thin wrapper around mt19937_64 with named-substream spawning.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)), seed_(seed) {}

  std::mt19937_64& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }

  Rng spawn(std::string_view tag, std::uint64_t index = 0) const {
    return Rng(derive_seed(seed_, tag, index));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  std::uint64_t integer(std::uint64_t bound) {  // uniform in [0, bound)
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  // Rademacher +-1 draw.
  int sign() { return engine_() & 1u ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// Multinomial sample via the conditional-binomial chain: exact distribution,
// one pass, no per-trial loop.
inline std::vector<std::uint64_t> multinomial(std::mt19937_64& gen,
                                              std::uint64_t trials,
                                              const std::vector<double>& probs) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double remaining_p = 1.0;
  std::uint64_t remaining_n = trials;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining_n > 0; ++k) {
    double p = probs[k] / remaining_p;
    if (p > 1.0) p = 1.0;
    if (p < 0.0) p = 0.0;
    std::binomial_distribution<std::uint64_t> bin(remaining_n, p);
    std::uint64_t c = bin(gen);
    counts[k] = c;
    remaining_n -= c;
    remaining_p -= probs[k];
    if (remaining_p <= 0.0) break;
  }
  if (!probs.empty()) counts.back() += remaining_n;
  return counts;
}

}  // namespace svqe
