#pragma once

#include <cstdint>
#include <string_view>

#include "nfcsim/time.hpp"

namespace nfcsim {

// xoshiro256++ seeded through splitmix64. Self-contained so that streams are
// bit-identical across compilers and standard libraries; std::* distributions
// are deliberately avoided for the same reason.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix(x);
    }

    // Named substream: decorrelates consumers (readiness draws, jitter,
    // workload payloads) that all hang off one scenario seed.
    Rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0)
        : Rng(seed ^ fnv1a(stream) ^ (index * 0x9e3779b97f4a7c15ULL)) {}

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    // Uniform integer in [lo, hi], inclusive.
    Micros uniform(Micros lo, Micros hi) {
        if (hi <= lo) return lo;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<Micros>(next() % span);
    }

    std::uint8_t byte() { return static_cast<std::uint8_t>(next() >> 56); }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    static std::uint64_t splitmix(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t s_[4];
};

}  // namespace nfcsim
