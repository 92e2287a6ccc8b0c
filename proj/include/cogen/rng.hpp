#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>

namespace cogen {

// Deterministic PRNG utilities. Everything here is seeded explicitly and
// produces the same stream on every platform; nothing reads entropy from
// the environment. Counter-based fills are order-independent so they can
// run under OpenMP without changing results.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable seed derivation for named substreams (step/sample/purpose).
constexpr std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + salt * 0xd1b54a32d192ed03ULL));
}

inline double u64_to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0,1), 53-bit grid
}

// Sequential generator (xoshiro256++), used for decisions that are
// inherently ordered: batch sampling, per-record parameters, dropout.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : s_) {
            s = splitmix64(s);
            w = s;
        }
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0,1) on the 2^-53 grid.
    double uniform() { return u64_to_unit(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    double normal() {
        // Box-Muller; one value per call, cached pair discarded to keep
        // the stream position independent of call pattern.
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t state_word(int i) const { return s_[i]; }
    void set_state(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
        s_[0] = a; s_[1] = b; s_[2] = c; s_[3] = d;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

// Counter-based standard-normal fill: element i depends only on (seed, i),
// so parallel and serial fills are bit-identical.
void fill_normal(std::span<double> out, std::uint64_t seed);

// Counter-based uniform [0,1) fill on the 2^-53 grid.
void fill_uniform(std::span<double> out, std::uint64_t seed);

}  // namespace cogen
