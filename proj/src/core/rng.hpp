#pragma once

#include <cstdint>
#include <random>

namespace qbeat {

// splitmix64; used to spread a (master seed, stream index) pair over the
// full 64-bit space before seeding the per-trajectory generator.
inline uint64_t splitmix64(uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent random stream for one trajectory. Streams derived from the
// same master seed but different indices are statistically independent, so
// ensemble results do not depend on worker count or scheduling.
class RngStream {
 public:
  RngStream(uint64_t master_seed, uint64_t stream_index) {
    uint64_t s = master_seed;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ull * (stream_index + 1);
    const uint64_t lo = splitmix64(s);
    const uint64_t hi = splitmix64(s);
    std::seed_seq seq{static_cast<uint32_t>(lo), static_cast<uint32_t>(lo >> 32),
                      static_cast<uint32_t>(hi), static_cast<uint32_t>(hi >> 32)};
    gen_.seed(seq);
  }

  // Uniform in [0,1). Mapped from raw 64-bit output so the value sequence is
  // a pure function of the seed, independent of libstdc++ distribution
  // internals.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0,1], safe as argument of log().
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double uniform_range(double a, double b) { return a + (b - a) * uniform(); }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qbeat
