#pragma once

// Binary field arithmetic.
//  - Gf2m: GF(2^b) for any 1 <= b <= 64, used by the manipulation-detection
//    tag (shift-and-xor multiply; b is small and varies per round).
//  - gf256: table-driven GF(256) used by the Reed-Solomon codec.

#include <array>
#include <cstdint>
#include <stdexcept>

namespace hardwire {

// Coefficients below x^deg of a low-weight irreducible polynomial of that
// degree (the x^deg term is implicit). Verified by Rabin's test in the suite.
inline constexpr uint64_t kIrreduciblePoly[65] = {
    0,
    0x1ull,  0x3ull,  0x3ull,  0x3ull,  0x5ull,  0x3ull,  0x3ull,  0x1bull,
    0x3ull,  0x9ull,  0x5ull,  0x9ull,  0x1bull, 0x21ull, 0x3ull,  0x2bull,
    0x9ull,  0x9ull,  0x27ull, 0x9ull,  0x5ull,  0x3ull,  0x21ull, 0x1bull,
    0x9ull,  0x1bull, 0x27ull, 0x3ull,  0x5ull,  0x3ull,  0x9ull,  0x8dull,
    0x401ull, 0x81ull, 0x5ull,  0x201ull, 0x53ull, 0x63ull, 0x11ull, 0x39ull,
    0x9ull,  0x81ull, 0x59ull, 0x21ull, 0x1bull, 0x3ull,  0x21ull, 0x2dull,
    0x201ull, 0x1dull, 0x4bull, 0x9ull,  0x47ull, 0x201ull, 0x81ull, 0x95ull,
    0x11ull, 0x80001ull, 0x95ull, 0x3ull, 0x27ull, 0x20000001ull, 0x3ull, 0x1bull,
};

// GF(2^b) with elements packed in the low b bits of a uint64.
class Gf2m {
public:
    explicit Gf2m(unsigned b) : b_(b) {
        if (b < 1 || b > 64) throw std::invalid_argument("Gf2m: degree out of range");
        low_ = kIrreduciblePoly[b];
        mask_ = (b == 64) ? ~uint64_t(0) : ((uint64_t(1) << b) - 1);
    }

    unsigned degree() const { return b_; }
    uint64_t mask() const { return mask_; }

    uint64_t mul(uint64_t a, uint64_t c) const {
        uint64_t r = 0;
        a &= mask_;
        c &= mask_;
        while (c) {
            if (c & 1) r ^= a;
            c >>= 1;
            uint64_t hi = (b_ == 64) ? (a >> 63) : ((a >> (b_ - 1)) & 1);
            a = (a << 1) & mask_;
            if (hi) a ^= low_;
        }
        return r;
    }

    uint64_t pow(uint64_t a, uint64_t e) const {
        uint64_t r = 1;
        a &= mask_;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

private:
    unsigned b_;
    uint64_t low_;
    uint64_t mask_;
};

// GF(256) modulo x^8+x^4+x^3+x^2+1 (0x11d), generator 2.
namespace gf256 {

struct Tables {
    std::array<uint8_t, 512> exp{};
    std::array<uint8_t, 256> log{};
    Tables() {
        unsigned x = 1;
        for (unsigned i = 0; i < 255; ++i) {
            exp[i] = uint8_t(x);
            log[x] = uint8_t(i);
            x <<= 1;
            if (x & 0x100) x ^= 0x11d;
        }
        for (unsigned i = 255; i < 512; ++i) exp[i] = exp[i - 255];
        log[0] = 0; // never consulted for zero
    }
};

inline const Tables& tables() {
    static const Tables t;
    return t;
}

inline uint8_t mul(uint8_t a, uint8_t b) {
    if (!a || !b) return 0;
    const auto& t = tables();
    return t.exp[t.log[a] + t.log[b]];
}

inline uint8_t div(uint8_t a, uint8_t b) {
    if (!a) return 0;
    if (!b) throw std::domain_error("gf256: divide by zero");
    const auto& t = tables();
    return t.exp[(t.log[a] + 255 - t.log[b]) % 255];
}

inline uint8_t pow_alpha(unsigned e) { return tables().exp[e % 255]; }

inline uint8_t inv(uint8_t a) {
    if (!a) throw std::domain_error("gf256: inverse of zero");
    const auto& t = tables();
    return t.exp[255 - t.log[a]];
}

} // namespace gf256

} // namespace hardwire
