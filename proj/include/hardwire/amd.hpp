#pragma once

// Algebraic manipulation detection. Information-theoretic integrity tag:
// an oblivious additive offset on a tagged word goes undetected with
// probability at most eta, no matter how the offset is chosen.
//
// Construction: the message is read as d elements s_1..s_d of GF(2^b) with
// b = ceil(log2(1/eta)); a fresh nonce x is drawn and the tag is
// f(x) = x^(D+2) + sum_i s_i x^i, with D = d rounded up to odd so that the
// leading term survives squaring in characteristic 2. Encoded layout is
// m || x || f, exactly |m| + 2b bits.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "bits.hpp"
#include "gf2.hpp"
#include "rng.hpp"

namespace hardwire {

struct AmdStrength {
    double eta;

    explicit AmdStrength(double e) : eta(e) {
        if (!(e > 0.0) || e > 0.5) throw std::invalid_argument("AmdStrength: eta outside (0, 1/2]");
        if (field_bits() > 64) throw std::invalid_argument("AmdStrength: eta below 2^-64");
    }

    // smallest b with 2^-b <= eta
    unsigned field_bits() const {
        unsigned b = 1;
        while (std::ldexp(1.0, -int(b)) > eta && b < 66) ++b;
        return b;
    }

    unsigned tag_bits() const { return 2 * field_bits(); }
};

namespace detail {

inline uint64_t amd_tag(const BitString& m, uint64_t nonce, const Gf2m& f) {
    const unsigned b = f.degree();
    const size_t d = (m.size() + b - 1) / b;
    const size_t d_eff = (d % 2 == 1) ? d : d + 1; // blocks beyond d are zero
    // Horner over s_1..s_d: P(x) = x * (s_1 + x*(s_2 + ... ))
    uint64_t acc = 0;
    for (size_t i = d; i >= 1; --i) {
        size_t lo = (i - 1) * b;
        size_t hi = lo + b <= m.size() ? lo + b : m.size();
        uint64_t block = m.read_uint(lo, hi - lo);
        acc = f.mul(acc, nonce) ^ block;
    }
    acc = f.mul(acc, nonce);
    return acc ^ f.pow(nonce, uint64_t(d_eff) + 2);
}

} // namespace detail

inline BitString amd_encode(const BitString& m, const AmdStrength& eta, Rng& rng) {
    if (m.empty()) throw std::invalid_argument("amd_encode: empty message");
    const unsigned b = eta.field_bits();
    Gf2m f(b);
    const uint64_t nonce = rng.next_u64() & f.mask();
    BitString out = m;
    out.append_uint(nonce, b);
    out.append_uint(detail::amd_tag(m, nonce, f), b);
    return out;
}

inline bool amd_is_codeword(const BitString& c, const AmdStrength& eta) {
    const unsigned b = eta.field_bits();
    if (c.size() <= 2 * b) return false; // no message fits this length
    const size_t mlen = c.size() - 2 * b;
    Gf2m f(b);
    const uint64_t nonce = c.read_uint(mlen, b);
    const uint64_t tag = c.read_uint(mlen + b, b);
    return detail::amd_tag(c.substr(0, mlen), nonce, f) == tag;
}

inline std::optional<BitString> amd_decode(const BitString& c, const AmdStrength& eta) {
    if (!amd_is_codeword(c, eta)) return std::nullopt;
    return c.substr(0, c.size() - 2 * eta.field_bits());
}

} // namespace hardwire
