#pragma once

// The word codec: serialize | AMD tag | Reed-Solomon | random fill to w_r.
// The decoder is told which payload kind its slot carries; that fixes the
// serialized length, hence the coded-region length, hence the pad boundary.

#include <optional>
#include <stdexcept>

#include "bits.hpp"
#include "params.hpp"
#include "payload.hpp"
#include "rng.hpp"
#include "silence.hpp"

namespace hardwire {

// Length of the coded (non-padding) region for this kind and round.
inline size_t coded_region_len(PayloadKind kind, const RoundParams& rp) {
    return ec_encoded_len(serialized_len(kind, rp) + rp.amd_strength().tag_bits());
}

inline BitString encode_word(const Payload& p, const RoundParams& rp, Rng& rng) {
    const BitString ser = serialize_payload(p, rp);
    const BitString tagged = amd_encode(ser, rp.amd_strength(), rng);
    BitString out = ec_encode(tagged);
    if (out.size() + rp.pad_len > rp.word_len)
        throw std::logic_error("encode_word: word_len cannot fit payload plus padding");
    while (out.size() < rp.word_len) out.push_back(rng.next_bit());
    return out;
}

inline std::optional<Payload> decode_word(const BitString& w, const RoundParams& rp,
                                          PayloadKind expected) {
    if (w.size() != rp.word_len) return std::nullopt;
    const size_t coded = coded_region_len(expected, rp);
    auto tagged = ec_decode(w.substr(0, coded));
    if (!tagged) return std::nullopt;
    auto ser = amd_decode(*tagged, rp.amd_strength());
    if (!ser) return std::nullopt;
    return deserialize_payload(*ser, expected, rp);
}

} // namespace hardwire
