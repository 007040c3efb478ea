#pragma once

// Deterministic PRNG streams (xoshiro256** seeded via splitmix64).
// std:: distributions are avoided on purpose: their output is not pinned by
// the standard, and run traces must be reproducible from the seed alone.

#include <cstdint>
#include <string_view>

#include "bits.hpp"

namespace hardwire {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& si : s_) si = splitmix64(sm);
        bitbuf_ = 0;
        bitcnt_ = 0;
    }

    // Derive an independent stream, e.g. per node or per strategy.
    Rng fork(uint64_t stream_id) const {
        uint64_t sm = s_[0] ^ (0xd6e8feb86659fd93ull * (stream_id + 1));
        return Rng(splitmix64(sm) ^ s_[2]);
    }
    Rng fork(std::string_view tag) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (char c : tag) { h ^= uint8_t(c); h *= 0x100000001b3ull; }
        return fork(h);
    }

    uint64_t next_u64() {
        uint64_t r = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    // Uniform in [0, bound). Lemire multiply-shift; bias is < 2^-64.
    uint64_t next_below(uint64_t bound) {
        return uint64_t((__uint128_t(next_u64()) * bound) >> 64);
    }

    int next_bit() {
        if (bitcnt_ == 0) {
            bitbuf_ = next_u64();
            bitcnt_ = 64;
        }
        int b = int(bitbuf_ & 1u);
        bitbuf_ >>= 1;
        --bitcnt_;
        return b;
    }

    // k uniform random bits, k <= 64.
    uint64_t next_bits(unsigned k) {
        if (k == 0) return 0;
        return next_u64() >> (64 - k);
    }

    double next_double() { // [0,1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    BitString random_bits(size_t nbits) {
        BitString b(nbits);
        auto& w = b.words_mut();
        for (auto& word : w) word = next_u64();
        b.resize(nbits); // masks the tail
        return b;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {1, 2, 3, 4};
    uint64_t bitbuf_ = 0;
    int bitcnt_ = 0;
};

} // namespace hardwire
