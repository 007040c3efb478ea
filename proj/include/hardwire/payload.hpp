#pragma once

// Word payloads and their bit-exact serialization. All fields are fixed-width
// for a given (kind, round), so a decoder that knows which slot it is reading
// can derive every boundary from the round parameters alone.
//
// Layouts (LSB-first integers, kappa = key_len, Lf = chunk_field):
//   KeyRequest:   tag(2)=00 | key(kappa)                      -> 2 + kappa
//   KeyReply:     tag(2)=01 | content(kappa) | key(kappa)     -> 2 + 2*kappa
//   MessageChunk: tag(2)=10 | len(Lf) | chunk(kappa, zero-
//                 padded past len) | parity(1) | key(kappa)   -> 3 + Lf + 2*kappa
//   Raw:          tag(2)=11 | content(kappa)                  -> 2 + kappa
//
// The KEY? keyword of the round protocol is the KeyRequest tag itself.

#include <optional>
#include <stdexcept>

#include "bits.hpp"
#include "params.hpp"

namespace hardwire {

enum class PayloadKind : uint8_t { KeyRequest = 0, KeyReply = 1, MessageChunk = 2, Raw = 3 };

struct Payload {
    PayloadKind kind = PayloadKind::Raw;
    BitString content; // KeyReply: partner's fresh key; MessageChunk: the chunk; Raw: anything
    BitString key;     // authenticator key carried by the word (empty for Raw)
    bool parity = false;

    static Payload key_request(BitString k_a) {
        Payload p;
        p.kind = PayloadKind::KeyRequest;
        p.key = std::move(k_a);
        return p;
    }
    static Payload key_reply(BitString k_b, BitString k_a) {
        Payload p;
        p.kind = PayloadKind::KeyReply;
        p.content = std::move(k_b);
        p.key = std::move(k_a);
        return p;
    }
    static Payload message_chunk(BitString chunk, bool parity, BitString k_b) {
        Payload p;
        p.kind = PayloadKind::MessageChunk;
        p.content = std::move(chunk);
        p.key = std::move(k_b);
        p.parity = parity;
        return p;
    }
    static Payload raw(BitString content) {
        Payload p;
        p.kind = PayloadKind::Raw;
        p.content = std::move(content);
        return p;
    }

    bool operator==(const Payload& o) const {
        return kind == o.kind && content == o.content && key == o.key &&
               (kind != PayloadKind::MessageChunk || parity == o.parity);
    }
};

inline size_t serialized_len(PayloadKind kind, const RoundParams& p) {
    switch (kind) {
        case PayloadKind::KeyRequest: return detail::ser_len_key_request(p.key_len);
        case PayloadKind::KeyReply: return detail::ser_len_key_reply(p.key_len);
        case PayloadKind::MessageChunk: return detail::ser_len_chunk(p.key_len, p.chunk_field);
        case PayloadKind::Raw: return detail::ser_len_raw(p.key_len);
    }
    throw std::logic_error("serialized_len: bad kind");
}

inline BitString serialize_payload(const Payload& p, const RoundParams& rp) {
    const unsigned kappa = rp.key_len;
    BitString out;
    out.append_uint(uint64_t(p.kind), 2);
    switch (p.kind) {
        case PayloadKind::KeyRequest:
            if (p.key.size() != kappa) throw std::invalid_argument("payload: key length != kappa");
            out.append(p.key);
            break;
        case PayloadKind::KeyReply:
            if (p.content.size() != kappa || p.key.size() != kappa)
                throw std::invalid_argument("payload: key length != kappa");
            out.append(p.content);
            out.append(p.key);
            break;
        case PayloadKind::MessageChunk: {
            if (p.content.size() > kappa) throw std::invalid_argument("payload: chunk longer than kappa");
            if (p.key.size() != kappa) throw std::invalid_argument("payload: key length != kappa");
            out.append_uint(p.content.size(), rp.chunk_field);
            out.append(p.content);
            for (size_t i = p.content.size(); i < kappa; ++i) out.push_back(0);
            out.push_back(p.parity ? 1 : 0);
            out.append(p.key);
            break;
        }
        case PayloadKind::Raw:
            if (p.content.size() != kappa) throw std::invalid_argument("payload: raw content != kappa");
            out.append(p.content);
            break;
    }
    return out;
}

inline std::optional<Payload> deserialize_payload(const BitString& s, PayloadKind expected,
                                                  const RoundParams& rp) {
    if (s.size() != serialized_len(expected, rp)) return std::nullopt;
    if (PayloadKind(s.read_uint(0, 2)) != expected) return std::nullopt;
    const unsigned kappa = rp.key_len;
    Payload p;
    p.kind = expected;
    switch (expected) {
        case PayloadKind::KeyRequest:
            p.key = s.substr(2, 2 + kappa);
            break;
        case PayloadKind::KeyReply:
            p.content = s.substr(2, 2 + kappa);
            p.key = s.substr(2 + kappa, 2 + 2 * size_t(kappa));
            break;
        case PayloadKind::MessageChunk: {
            size_t pos = 2;
            const uint64_t len = s.read_uint(pos, rp.chunk_field);
            pos += rp.chunk_field;
            if (len > kappa) return std::nullopt;
            p.content = s.substr(pos, pos + len);
            // zero padding past len must hold, or the word is malformed
            for (size_t i = pos + len; i < pos + kappa; ++i)
                if (s.get(i)) return std::nullopt;
            pos += kappa;
            p.parity = s.get(pos) != 0;
            ++pos;
            p.key = s.substr(pos, pos + kappa);
            break;
        }
        case PayloadKind::Raw:
            p.content = s.substr(2, 2 + kappa);
            break;
    }
    return p;
}

} // namespace hardwire
