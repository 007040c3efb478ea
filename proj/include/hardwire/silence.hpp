#pragma once

// The listener-side silence predicate and deliberate noise words.
// A window reads as silence iff it has fewer than |s|/3 bit alternations;
// deliberate words defeat this because they end in uniform random padding.

#include <stdexcept>

#include "bits.hpp"
#include "rng.hpp"

namespace hardwire {

inline bool is_silence(const BitString& s) {
    if (s.empty()) throw std::invalid_argument("is_silence: empty window");
    // strict: alternations < |s|/3
    return 3 * s.alternations() < s.size();
}

// Minimum window length for which the e^(-len/19) silence bound is proven.
inline constexpr size_t kNoiseMinLen = 95;

inline BitString noise_word(size_t len, Rng& rng) {
    if (len < kNoiseMinLen) throw std::invalid_argument("noise_word: len below 95");
    return rng.random_bits(len);
}

} // namespace hardwire
