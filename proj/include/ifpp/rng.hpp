#pragma once

#include <cmath>
#include <cstdint>

namespace ifpp {

// Counter-style stream seeding: every (seed, stream) pair yields an
// independent, fully specified generator, so parallel and serial path loops
// produce bitwise-identical draws regardless of scheduling.

struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t s) : state(s) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

class Xoshiro256pp {
  public:
    Xoshiro256pp(uint64_t seed, uint64_t stream) {
        SplitMix64 sm(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on (0,1): 53-bit mantissa, never exactly 0 or 1.
    double uniform01() {
        uint64_t u = next() >> 11;
        double v = (static_cast<double>(u) + 0.5) * 0x1.0p-53;
        return v;
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

/// Standard normal draws by the polar (Marsaglia) method with one cached value.
class NormalSampler {
  public:
    NormalSampler(uint64_t seed, uint64_t stream) : rng_(seed, stream) {}

    double uniform01() { return rng_.uniform01(); }

    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.uniform01() - 1.0;
            v = 2.0 * rng_.uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * m;
        has_cache_ = true;
        return u * m;
    }

  private:
    Xoshiro256pp rng_;
    bool has_cache_ = false;
    double cache_ = 0.0;
};

}  // namespace ifpp
