#pragma once

#include <cstdint>

namespace fraclab {

// splitmix64: 64-bit splittable generator. Every consumer of randomness in
// the library takes an explicit seed so that runs are reproducible.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (lo, hi)
    double uniform(double lo, double hi) {
        double u = next_double();
        return lo + (hi - lo) * u;
    }

    // independent child stream
    SplitMix64 split() { return SplitMix64(next_u64() ^ 0x6a09e667f3bcc909ULL); }

  private:
    std::uint64_t state_;
};

} // namespace fraclab
