#include "rdslab/rng.hpp"

namespace rdslab {

uint64_t SplitMix64::next() {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

static inline uint64_t rotl(uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

Xoshiro256pp::Xoshiro256pp(uint64_t seed) {
  SplitMix64 sm(seed);
  for (auto& s : s_) s = sm.next();
}

uint64_t Xoshiro256pp::next_u64() {
  uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::next_double() {
  return (next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Xoshiro256pp::next_below(uint64_t n) {
  // unbiased rejection sampling
  if (n == 0) return 0;
  uint64_t threshold = (0 - n) % n;
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

uint64_t fnv1a64(const void* data, size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

uint64_t derive_seed(uint64_t seed, const std::string& label) {
  SplitMix64 sm(seed ^ fnv1a64(label));
  return sm.next();
}

uint64_t derive_seed(uint64_t seed, uint64_t index) {
  SplitMix64 sm(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  return sm.next();
}

std::vector<ChunkRange> fixed_partition(size_t n, size_t chunks) {
  if (chunks == 0) chunks = 1;
  std::vector<ChunkRange> out;
  out.reserve(chunks);
  size_t base = n / chunks, rem = n % chunks, at = 0;
  for (size_t i = 0; i < chunks; ++i) {
    size_t len = base + (i < rem ? 1 : 0);
    out.push_back({at, at + len});
    at += len;
  }
  return out;
}

}  // namespace rdslab
