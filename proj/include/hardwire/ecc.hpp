#pragma once

// Bit-oriented error correction: a rate-1/5 systematic Reed-Solomon code over
// GF(256), carried on the wire as bits. For a message of n bits the wire
// codeword is the n message bits verbatim followed by the 32*ceil(n/8) parity
// bits of RS(5k, k) over the zero-padded message bytes (k = ceil(n/8)).
// Both lengths are recoverable from |c| alone: k = ceil(|c|/40).
//
// The code is GF(2)-linear bitwise. Bounded-distance decoding corrects any
// pattern touching at most t = 2k of the 5k symbols, i.e. 40% of the
// codeword; with the symbol budget at 40% > 1/3, a third of the wire bits fit
// inside the correctable symbol span with margin (16k bits of capacity
// against a 40k/3 bit budget).

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "gf2.hpp"

namespace hardwire {

// Realized expansion constant: |ecEnc(m)| = |m| + 32*ceil(|m|/8) <= Ce*|m|
// for |m| >= 16. Exported alongside the two derived constants used by the
// schedule documentation.
inline constexpr int kEccExpansion = 7;                  // Ce
inline constexpr int kCostC1 = 12 * kEccExpansion + 76;  // 160
inline constexpr int kCostC2 = 32 * kEccExpansion + 115; // 339

inline constexpr size_t kEccMaxMessageBits = 408; // 5*ceil(n/8) <= 255

inline size_t ec_encoded_len(size_t msg_bits) {
    return msg_bits + 32 * ((msg_bits + 7) / 8);
}

namespace rs_detail {

// generator polynomial for nroots parity symbols, roots alpha^0..alpha^(nroots-1)
inline const std::vector<uint8_t>& genpoly(unsigned k) {
    static std::array<std::vector<uint8_t>, 52> cache;
    static std::once_flag once;
    std::call_once(once, [] {
        for (unsigned kk = 1; kk <= 51; ++kk) {
            unsigned nroots = 4 * kk;
            std::vector<uint8_t> g(nroots + 1, 0);
            g[0] = 1;
            for (unsigned i = 0; i < nroots; ++i) {
                uint8_t root = gf256::pow_alpha(i);
                // g *= (x - alpha^i)
                for (unsigned j = i + 1; j > 0; --j)
                    g[j] = uint8_t(g[j - 1] ^ gf256::mul(g[j], root));
                g[0] = gf256::mul(g[0], root);
            }
            cache[kk] = std::move(g);
        }
    });
    return cache[k];
}

inline void pack_bytes(const BitString& bits, std::vector<uint8_t>& out) {
    out.assign((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits.get(i)) out[i >> 3] |= uint8_t(1u << (i & 7));
}

// parity of data(x)*x^nroots mod g(x); data[0] is the highest-degree symbol
inline void rs_parity(const std::vector<uint8_t>& data, unsigned k,
                      std::vector<uint8_t>& parity) {
    const auto& g = genpoly(k);
    const unsigned nroots = 4 * k;
    parity.assign(nroots, 0);
    for (unsigned i = 0; i < k; ++i) {
        uint8_t fb = uint8_t(data[i] ^ parity[0]);
        for (unsigned j = 0; j + 1 < nroots; ++j)
            parity[j] = uint8_t(parity[j + 1] ^ gf256::mul(fb, g[nroots - 1 - j]));
        parity[nroots - 1] = gf256::mul(fb, g[0]);
    }
}

} // namespace rs_detail

inline BitString ec_encode(const BitString& m) {
    if (m.empty()) throw std::invalid_argument("ec_encode: empty message");
    if (m.size() > kEccMaxMessageBits) throw std::invalid_argument("ec_encode: message too long");
    const unsigned k = unsigned((m.size() + 7) / 8);
    std::vector<uint8_t> data, parity;
    rs_detail::pack_bytes(m, data);
    rs_detail::rs_parity(data, k, parity);
    BitString out = m;
    for (uint8_t p : parity) out.append_uint(p, 8);
    return out;
}

inline std::optional<BitString> ec_decode(const BitString& c) {
    if (c.size() < 33) return std::nullopt;
    const size_t k = (c.size() + 39) / 40;
    if (k > 51) return std::nullopt;
    const unsigned nroots = unsigned(4 * k);
    const size_t n = 5 * k;
    if (c.size() <= 32 * k) return std::nullopt;
    const size_t msg_bits = c.size() - 32 * k;
    if (msg_bits > 8 * k || msg_bits <= 8 * (k - 1)) return std::nullopt; // not a codeword length

    // assemble received symbols: data bytes (tail bits implicit zero), parity bytes
    std::vector<uint8_t> r(n, 0);
    for (size_t i = 0; i < msg_bits; ++i)
        if (c.get(i)) r[i >> 3] |= uint8_t(1u << (i & 7));
    for (size_t j = 0; j < nroots; ++j)
        r[k + j] = uint8_t(c.read_uint(msg_bits + 8 * j, 8));

    // syndromes over C(x) with r[0] the highest-degree coefficient
    std::vector<uint8_t> synd(nroots, 0);
    bool clean = true;
    for (unsigned i = 0; i < nroots; ++i) {
        uint8_t s = 0;
        uint8_t x = gf256::pow_alpha(i);
        for (size_t j = 0; j < n; ++j) s = uint8_t(gf256::mul(s, x) ^ r[j]);
        synd[i] = s;
        clean = clean && s == 0;
    }
    auto extract = [&](const std::vector<uint8_t>& symbols) {
        BitString out;
        out.reserve_bits(msg_bits);
        for (size_t i = 0; i < msg_bits; ++i)
            out.push_back((symbols[i >> 3] >> (i & 7)) & 1);
        return out;
    };
    if (clean) return extract(r);

    // Berlekamp-Massey
    std::vector<uint8_t> lambda(nroots + 1, 0), prev(nroots + 1, 0), tmp(nroots + 1, 0);
    lambda[0] = prev[0] = 1;
    unsigned L = 0, shift = 1;
    uint8_t prev_disc = 1;
    for (unsigned i = 0; i < nroots; ++i) {
        uint8_t disc = 0;
        for (unsigned j = 0; j <= L; ++j) disc ^= gf256::mul(lambda[j], synd[i - j]);
        if (disc == 0) {
            ++shift;
        } else if (2 * L <= i) {
            tmp = lambda;
            uint8_t scale = gf256::div(disc, prev_disc);
            for (unsigned j = 0; j + shift <= nroots; ++j)
                lambda[j + shift] ^= gf256::mul(scale, prev[j]);
            prev = std::move(tmp);
            prev_disc = disc;
            L = i + 1 - L;
            shift = 1;
        } else {
            uint8_t scale = gf256::div(disc, prev_disc);
            for (unsigned j = 0; j + shift <= nroots; ++j)
                lambda[j + shift] ^= gf256::mul(scale, prev[j]);
            ++shift;
        }
    }
    if (L > nroots / 2) return std::nullopt;

    // Chien search: error at byte index idx <=> lambda(alpha^-(n-1-idx)) == 0
    std::vector<unsigned> err_deg;
    for (unsigned d = 0; d < n; ++d) {
        uint8_t x = gf256::pow_alpha(255 - (d % 255)); // alpha^-d
        uint8_t v = 0;
        for (unsigned j = L + 1; j > 0; --j) v = uint8_t(gf256::mul(v, x) ^ lambda[j - 1]);
        if (v == 0) err_deg.push_back(d);
    }
    if (err_deg.size() != L) return std::nullopt;

    // Forney: Omega = S(x) * lambda(x) mod x^nroots (only low L terms needed)
    std::vector<uint8_t> omega(L, 0);
    for (unsigned i = 0; i < L; ++i) {
        uint8_t v = 0;
        for (unsigned j = 0; j <= i; ++j) v ^= gf256::mul(synd[i - j], lambda[j]);
        omega[i] = v;
    }
    for (unsigned d : err_deg) {
        uint8_t xinv = gf256::pow_alpha(255 - (d % 255));
        uint8_t num = 0;
        for (unsigned j = L; j > 0; --j) num = uint8_t(gf256::mul(num, xinv) ^ omega[j - 1]);
        // lambda'(x) over GF(2^m): odd-degree terms only
        uint8_t den = 0;
        for (unsigned j = 1; j <= L; j += 2) {
            uint8_t term = lambda[j];
            // multiply by x^(j-1) at x = xinv
            for (unsigned q = 1; q < j; ++q) term = gf256::mul(term, xinv);
            den ^= term;
        }
        if (den == 0) return std::nullopt;
        uint8_t mag = gf256::mul(gf256::pow_alpha(d % 255), gf256::div(num, den)); // X * Omega(X^-1)/lambda'(X^-1)
        r[n - 1 - d] ^= mag;
    }

    // corrected word must actually be a codeword
    for (unsigned i = 0; i < nroots; ++i) {
        uint8_t s = 0;
        uint8_t x = gf256::pow_alpha(i);
        for (size_t j = 0; j < n; ++j) s = uint8_t(gf256::mul(s, x) ^ r[j]);
        if (s != 0) return std::nullopt;
    }
    // implicit zero pad bits of the last data byte are known: reject if decoder disagrees
    if (msg_bits & 7) {
        uint8_t tail = r[msg_bits >> 3];
        if (tail >> (msg_bits & 7)) return std::nullopt;
    }
    return extract(r);
}

} // namespace hardwire
