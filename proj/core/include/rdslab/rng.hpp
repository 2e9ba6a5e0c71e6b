#pragma once
// Deterministic splittable randomness: a single 64-bit seed feeds SplitMix64,
// which derives per-purpose / per-worker xoshiro256++ streams. Work is split
// into a fixed number of chunks independent of worker count, so reductions in
// chunk order are value-deterministic for a given (seed, partition).

#include <cstdint>
#include <string>
#include <vector>

namespace rdslab {

struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next();
};

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed);
  uint64_t next_u64();
  // uniform in [0,1)
  double next_double();
  // uniform integer in [0, n)
  uint64_t next_below(uint64_t n);

 private:
  uint64_t s_[4];
};

// Derive a child seed from (seed, label). Stable across platforms.
uint64_t derive_seed(uint64_t seed, const std::string& label);
uint64_t derive_seed(uint64_t seed, uint64_t index);

// Fixed partition of [0, n) into `chunks` nearly equal ranges.
struct ChunkRange {
  size_t begin, end;
};
std::vector<ChunkRange> fixed_partition(size_t n, size_t chunks);

// FNV-1a 64-bit, used for config hashes and manifest checksums.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

}  // namespace rdslab
