#pragma once

// The per-channel round protocol: a sender machine at the channel's
// initiating endpoint and a receiver machine at the other end, stepped at
// slot boundaries by the node runtime.
//
// Round structure on one channel (word length w_r each):
//   slot 0  initiator -> responder  key request, fresh k_A
//   slot 1  responder -> initiator  key reply (k_B, k_A), or noise on reject
//   slot 2  initiator -> responder  message chunk keyed with k_B
//   slot 3  responder -> initiator  silence on success, noise on reject
//
// Messages longer than one chunk flow across rounds; the receiver reassembles
// them against the channel's prefix-free language using the parity bit to
// separate repeats from successors.

#include <optional>

#include "events.hpp"
#include "language.hpp"
#include "silence.hpp"
#include "word.hpp"

namespace hardwire {

struct ChannelIds {
    int initiator = -1;
    int responder = -1;
};

class SenderMachine {
public:
    SenderMachine(ChannelIds ids, Rng rng) : ids_(ids), rng_(rng) {}

    bool call_active() const { return active_; }
    bool parity_bit() const { return parity_; }

    void start_call(BitString msg, uint64_t round) {
        if (active_) throw std::logic_error("sender: call already active");
        active_ = true;
        msg_ = std::move(msg);
        cursor_ = 0;
        start_round_ = round;
    }

    std::optional<BitString> begin_slot(const RoundParams& rp, unsigned slot, uint64_t step,
                                        EventLog& log) {
        if (!active_) return std::nullopt;
        if (slot == 0) {
            k_a_ = rng_.random_bits(rp.key_len);
            phase_ = Phase::WaitReply;
            Payload p = Payload::key_request(k_a_);
            return emit(p, rp, slot, step, log);
        }
        if (slot == 2 && phase_ == Phase::HaveKey) {
            chunk_ = msg_.substr(cursor_, cursor_ + rp.key_len);
            Payload p = Payload::message_chunk(chunk_, parity_, k_b_);
            phase_ = Phase::WaitAck;
            return emit(p, rp, slot, step, log);
        }
        return std::nullopt;
    }

    // partner_drove is trace truth used only to log silence forgeries.
    std::optional<ReturnReason> finish_slot(const RoundParams& rp, unsigned slot,
                                            const BitString& win, bool partner_drove,
                                            uint64_t step, EventLog& log) {
        if (!active_) return std::nullopt;
        if (slot == 1 && phase_ == Phase::WaitReply) {
            if (is_silence(win)) {
                if (partner_drove) log_silence(rp, slot, step, log);
                // the receiver has terminated; give up on this call
                active_ = false;
                phase_ = Phase::Between;
                return ReturnReason::PartnerSilent;
            }
            auto p = decode_word(win, rp, PayloadKind::KeyReply);
            if (p && p->key == k_a_) {
                k_b_ = p->content;
                phase_ = Phase::HaveKey;
                log_accept(*p, rp, slot, step, log);
            } else {
                phase_ = Phase::Between; // silent for the rest of the round
            }
            return std::nullopt;
        }
        if (slot == 3 && phase_ == Phase::WaitAck) {
            phase_ = Phase::Between;
            if (is_silence(win)) {
                // reading silence where the partner drove a noise word is the
                // conversion-to-silence failure: a false delivery conclusion
                if (partner_drove) log_silence(rp, slot, step, log);
                cursor_ += chunk_.size();
                parity_ = !parity_;
                if (cursor_ >= msg_.size()) {
                    active_ = false;
                    return ReturnReason::Acked;
                }
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

    uint64_t start_round() const { return start_round_; }
    const BitString& message() const { return msg_; }

private:
    enum class Phase : uint8_t { Between, WaitReply, HaveKey, WaitAck };

    BitString emit(const Payload& p, const RoundParams& rp, unsigned slot, uint64_t step,
                   EventLog& log) {
        Event& e = log.push(EventType::WordSent);
        e.node = int16_t(ids_.initiator);
        e.peer = int16_t(ids_.responder);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
        e.info = uint8_t(p.kind);
        e.msg = serialize_payload(p, rp);
        return encode_word(p, rp, rng_);
    }

    void log_accept(const Payload& p, const RoundParams& rp, unsigned slot, uint64_t step,
                    EventLog& log) {
        Event& e = log.push(EventType::WordAccepted);
        e.node = int16_t(ids_.initiator);
        e.peer = int16_t(ids_.responder);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
        e.info = uint8_t(p.kind);
        e.msg = serialize_payload(p, rp);
    }

    void log_silence(const RoundParams& rp, unsigned slot, uint64_t step, EventLog& log) {
        Event& e = log.push(EventType::SilenceRead);
        e.node = int16_t(ids_.initiator);
        e.peer = int16_t(ids_.responder);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
    }

    ChannelIds ids_;
    Rng rng_;
    bool active_ = false;
    // Parity of the 1-based chunk index, persistent across calls. Starting at
    // 1 makes the very first chunk differ from the receiver's initial 0, so
    // it is recorded rather than taken for a repeat.
    bool parity_ = true;
    BitString msg_;
    size_t cursor_ = 0;
    uint64_t start_round_ = 0;
    Phase phase_ = Phase::Between;
    BitString k_a_, k_b_, chunk_;
};

class ReceiverMachine {
public:
    ReceiverMachine(ChannelIds ids, const PrefixFreeLanguage* lang, Rng rng)
        : ids_(ids), lang_(lang), rng_(rng) {}

    std::optional<BitString> begin_slot(const RoundParams& rp, unsigned slot, uint64_t step,
                                        EventLog& log) {
        if (slot == 1 && phase_ == Phase::WillReply) {
            Payload p = Payload::key_reply(k_b_, k_a_);
            phase_ = Phase::WaitChunk;
            return emit(p, rp, slot, step, log);
        }
        if ((slot == 1 && phase_ == Phase::NoiseSlot1) ||
            (slot == 3 && phase_ == Phase::NoiseSlot3)) {
            phase_ = Phase::Idle;
            Event& e = log.push(EventType::NoiseSent);
            e.node = int16_t(ids_.responder);
            e.peer = int16_t(ids_.initiator);
            e.initiator = int16_t(ids_.initiator);
            e.slot = uint8_t(slot);
            e.step = step;
            e.round = rp.round;
            return noise_word(rp.word_len, rng_);
        }
        return std::nullopt;
    }

    // Returns a completed message when one is recorded at this slot boundary.
    std::optional<BitString> finish_slot(const RoundParams& rp, unsigned slot,
                                         const BitString& win, bool alive, bool partner_drove,
                                         uint64_t step, EventLog& log) {
        if (slot == 0) {
            phase_ = Phase::Idle;
            if (!alive) return std::nullopt;
            if (is_silence(win)) {
                if (partner_drove) log_silence(rp, slot, step, log);
                return std::nullopt;
            }
            auto p = decode_word(win, rp, PayloadKind::KeyRequest);
            if (!p) {
                phase_ = Phase::NoiseSlot1;
                return std::nullopt;
            }
            k_a_ = p->key;
            k_b_ = rng_.random_bits(rp.key_len);
            phase_ = Phase::WillReply;
            log_accept(*p, rp, slot, step, log);
            return std::nullopt;
        }
        if (slot == 2 && phase_ == Phase::WaitChunk) {
            auto p = decode_word(win, rp, PayloadKind::MessageChunk);
            if (!p || p->key != k_b_) {
                if (!p && is_silence(win) && partner_drove) log_silence(rp, slot, step, log);
                phase_ = Phase::NoiseSlot3;
                return std::nullopt;
            }
            phase_ = Phase::AckSilent;
            log_accept(*p, rp, slot, step, log);
            return accept_chunk(p->content, p->parity, rp, step, log);
        }
        return std::nullopt;
    }

    bool partial_empty() const { return mu_.empty(); }
    const BitString& partial() const { return mu_; }
    bool parity_hat() const { return parity_hat_; }

private:
    enum class Phase : uint8_t { Idle, WillReply, WaitChunk, NoiseSlot1, NoiseSlot3, AckSilent };

    std::optional<BitString> accept_chunk(const BitString& chunk, bool parity,
                                          const RoundParams& rp, uint64_t step, EventLog& log) {
        if (lang_ == nullptr || lang_->empty()) {
            // a chunk arrived on a channel the protocol never sends on;
            // nothing can complete here (forged traffic ends up flagged)
            Event& e = log.push(EventType::Anomaly);
            e.node = int16_t(ids_.responder);
            e.peer = int16_t(ids_.initiator);
            e.initiator = int16_t(ids_.initiator);
            e.info = uint8_t(AnomalyKind::InvalidPartial);
            e.step = step;
            e.round = rp.round;
            return std::nullopt;
        }
        if (mu_.empty()) {
            if (parity == parity_hat_) return std::nullopt; // repeat of the last accepted chunk
            mu_ = chunk;
            lambda_ = chunk.size();
            parity_hat_ = parity;
        } else if (parity != parity_hat_) {
            mu_.append(chunk);
            lambda_ = chunk.size();
            parity_hat_ = parity;
        } else {
            // the sender resent a chunk we already hold, possibly grown to the
            // current round's chunk size: swap the previous piece for it
            BitString head = mu_.substr(0, mu_.size() - lambda_);
            head.append(chunk);
            mu_ = std::move(head);
            lambda_ = chunk.size();
        }
        switch (lang_->classify(mu_)) {
            case LangClass::Complete: {
                BitString rec = std::move(mu_);
                mu_ = BitString();
                lambda_ = 0;
                return rec;
            }
            case LangClass::ProperPrefix:
                return std::nullopt;
            case LangClass::Invalid: {
                Event& e = log.push(EventType::Anomaly);
                e.node = int16_t(ids_.responder);
                e.peer = int16_t(ids_.initiator);
                e.initiator = int16_t(ids_.initiator);
                e.info = uint8_t(AnomalyKind::InvalidPartial);
                e.step = step;
                e.round = rp.round;
                mu_ = BitString();
                lambda_ = 0;
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    BitString emit(const Payload& p, const RoundParams& rp, unsigned slot, uint64_t step,
                   EventLog& log) {
        Event& e = log.push(EventType::WordSent);
        e.node = int16_t(ids_.responder);
        e.peer = int16_t(ids_.initiator);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
        e.info = uint8_t(p.kind);
        e.msg = serialize_payload(p, rp);
        return encode_word(p, rp, rng_);
    }

    void log_accept(const Payload& p, const RoundParams& rp, unsigned slot, uint64_t step,
                    EventLog& log) {
        Event& e = log.push(EventType::WordAccepted);
        e.node = int16_t(ids_.responder);
        e.peer = int16_t(ids_.initiator);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
        e.info = uint8_t(p.kind);
        e.msg = serialize_payload(p, rp);
    }

    void log_silence(const RoundParams& rp, unsigned slot, uint64_t step, EventLog& log) {
        Event& e = log.push(EventType::SilenceRead);
        e.node = int16_t(ids_.responder);
        e.peer = int16_t(ids_.initiator);
        e.initiator = int16_t(ids_.initiator);
        e.slot = uint8_t(slot);
        e.step = step;
        e.round = rp.round;
    }

    ChannelIds ids_;
    const PrefixFreeLanguage* lang_;
    Rng rng_;
    Phase phase_ = Phase::Idle;
    BitString k_a_, k_b_;
    // persistent reassembly state
    bool parity_hat_ = false;
    BitString mu_;
    size_t lambda_ = 0;
};

} // namespace hardwire
