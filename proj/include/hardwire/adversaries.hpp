#pragma once

// Budget-constrained adversary strategies. Every strategy is a deterministic
// function of (spec, seed) and of public data only: the round schedule, lane
// topology, and its own past actions. None of them can read channel bits or
// node randomness, so forged words rely on the publicly-known idle values
// (which only the adversary itself ever changes).
//
// Lane layout note: lanes come in channel pairs; a lane with forward=true at
// index i has its responder->initiator partner at index i+1.

#include <memory>
#include <string>
#include <vector>

#include "netsim.hpp"
#include "params.hpp"
#include "payload.hpp"
#include "rng.hpp"
#include "word.hpp"

namespace hardwire {

struct AdversarySpec {
    std::string kind = "none"; // none | uniform_random | burst | word_corruptor |
                               // silence_forger | key_guesser | feedback_jammer
    uint64_t budget = 0;
    uint64_t seed = 0;
    uint64_t horizon_steps = 0; // placement range for uniform_random/burst
    unsigned target_slot = 2;   // word_corruptor: which word of the round to hit
    unsigned burst_len = 64;
    uint64_t start_round = 1;
};

namespace adv_detail {

inline std::vector<uint32_t> forward_lanes(const std::vector<LaneInfo>& lanes) {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < lanes.size(); ++i)
        if (lanes[i].forward) out.push_back(i);
    return out;
}

// expected payload kind of a word slot, fixed by the round structure
inline PayloadKind slot_kind(unsigned slot) {
    switch (slot) {
        case 0: return PayloadKind::KeyRequest;
        case 1: return PayloadKind::KeyReply;
        case 2: return PayloadKind::MessageChunk;
        default: return PayloadKind::Raw; // slot 3 carries noise or silence
    }
}

} // namespace adv_detail

// Budget spent on uniformly random (step, lane) pairs drawn once at setup.
class UniformRandomAdversary : public Adversary {
public:
    UniformRandomAdversary(const AdversarySpec& spec) : spec_(spec) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (!planned_) setup(view);
        while (cursor_ < plan_.size() && plan_[cursor_].step < view.slot_start +
                                                                  view.word_len) {
            if (plan_[cursor_].step >= view.slot_start) out.push_back(plan_[cursor_]);
            ++cursor_;
        }
    }

private:
    void setup(const AdversaryView& view) {
        planned_ = true;
        Rng rng(spec_.seed ^ 0x7592d5a1c3f0e6b4ull);
        uint64_t horizon = spec_.horizon_steps ? spec_.horizon_steps : 1000000;
        for (uint64_t i = 0; i < spec_.budget; ++i) {
            AdversaryAction a;
            a.step = 1 + rng.next_below(horizon);
            a.lane = uint32_t(rng.next_below(view.lanes->size()));
            a.kind = AdversaryAction::Kind::Flip;
            plan_.push_back(a);
        }
        std::stable_sort(plan_.begin(), plan_.end(),
                         [](const auto& x, const auto& y) { return x.step < y.step; });
    }

    AdversarySpec spec_;
    bool planned_ = false;
    std::vector<AdversaryAction> plan_;
    size_t cursor_ = 0;
};

// Contiguous flip bursts at random origins.
class BurstAdversary : public Adversary {
public:
    BurstAdversary(const AdversarySpec& spec) : spec_(spec) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (!planned_) setup(view);
        while (cursor_ < plan_.size() &&
               plan_[cursor_].step < view.slot_start + view.word_len) {
            if (plan_[cursor_].step >= view.slot_start) out.push_back(plan_[cursor_]);
            ++cursor_;
        }
    }

private:
    void setup(const AdversaryView& view) {
        planned_ = true;
        Rng rng(spec_.seed ^ 0x41c64e6da3bc0074ull);
        uint64_t horizon = spec_.horizon_steps ? spec_.horizon_steps : 1000000;
        uint64_t left = spec_.budget;
        unsigned blen = spec_.burst_len ? spec_.burst_len : 1;
        while (left >= blen) {
            uint64_t start = 1 + rng.next_below(horizon);
            uint32_t lane = uint32_t(rng.next_below(view.lanes->size()));
            for (unsigned i = 0; i < blen; ++i)
                plan_.push_back({start + i, lane, AdversaryAction::Kind::Flip, 0});
            left -= blen;
        }
        std::stable_sort(plan_.begin(), plan_.end(),
                         [](const auto& x, const auto& y) { return x.step < y.step; });
    }

    AdversarySpec spec_;
    bool planned_ = false;
    std::vector<AdversaryAction> plan_;
    size_t cursor_ = 0;
};

// Kills whole words: one bit per coded symbol, pass after pass, spending
// ceil(region/3)+1 flips per attacked word. This is the cost the resource
// bound charges for a corrupted round.
class WordCorruptorAdversary : public Adversary {
public:
    WordCorruptorAdversary(const AdversarySpec& spec, SystemParams sys)
        : spec_(spec), sched_(sys), left_(spec.budget) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (view.slot != spec_.target_slot || view.round < spec_.start_round) return;
        const RoundParams& rp = sched_.params(view.round);
        const size_t coded = coded_region_len(adv_detail::slot_kind(view.slot), rp);
        const uint64_t cost = coded / 3 + 1;
        if (spec_.target_slot == 3) return; // slot 3 carries no coded word
        auto fwd = adv_detail::forward_lanes(*view.lanes);
        for (uint32_t f : fwd) {
            if (left_ < cost) return;
            left_ -= cost;
            // words of slots 0 and 2 ride the forward lane, 1 and 3 the partner
            uint32_t lane = (view.slot % 2 == 0) ? f : f + 1;
            uint64_t placed = 0;
            const size_t syms = (coded + 7) / 8;
            for (unsigned pass = 0; pass < 8 && placed < cost; ++pass)
                for (size_t s = 0; s < syms && placed < cost; ++s) {
                    size_t off = 8 * s + pass;
                    if (off >= coded) continue;
                    out.push_back({view.slot_start + off, lane,
                                   AdversaryAction::Kind::Flip, 0});
                    ++placed;
                }
        }
    }

private:
    AdversarySpec spec_;
    Schedule sched_;
    uint64_t left_;
};

// Tries to make the receiver's reject noise (slot 3) look like silence by
// xoring a fixed random pattern over it. Blind: the noise stays uniform, so
// per-word success stays at the uniform-noise silence rate.
class SilenceForgerAdversary : public Adversary {
public:
    SilenceForgerAdversary(const AdversarySpec& spec)
        : spec_(spec), rng_(spec.seed ^ 0x2545f4914f6cdd1dull), left_(spec.budget) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (view.slot != 3 || view.round < spec_.start_round) return;
        auto fwd = adv_detail::forward_lanes(*view.lanes);
        for (uint32_t f : fwd) {
            const uint64_t cost = view.word_len / 3;
            if (left_ < cost) return;
            left_ -= cost;
            // fixed oblivious pattern: `cost` distinct random offsets
            std::vector<char> used(view.word_len, 0);
            uint64_t placed = 0;
            while (placed < cost) {
                size_t off = size_t(rng_.next_below(view.word_len));
                if (used[off]) continue;
                used[off] = 1;
                out.push_back({view.slot_start + off, f + 1, AdversaryAction::Kind::Flip, 0});
                ++placed;
            }
        }
    }

private:
    AdversarySpec spec_;
    Rng rng_;
    uint64_t left_;
};

// Forges a key request on a (presumed silent) channel, then a message chunk
// authenticated with a uniformly guessed key. Succeeds only by guessing the
// responder's fresh key: probability 2^-kappa_r per attempt.
class KeyGuesserAdversary : public Adversary {
public:
    KeyGuesserAdversary(const AdversarySpec& spec, SystemParams sys)
        : spec_(spec), sched_(sys), rng_(spec.seed ^ 0x94d049bb133111ebull),
          left_(spec.budget) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (view.round < spec_.start_round) return;
        if (lines_.empty()) lines_.assign(view.lanes->size(), 0);
        const RoundParams& rp = sched_.params(view.round);
        auto fwd = adv_detail::forward_lanes(*view.lanes);
        if (fwd.empty()) return;
        // one channel per round, cycling
        uint32_t f = fwd[size_t(view.round - spec_.start_round) % fwd.size()];
        if (view.slot == 0) {
            pending_chunk_ = false;
            BitString word = encode_word(Payload::key_request(rng_.random_bits(rp.key_len)),
                                         rp, rng_);
            if (emit_word(word, f, view, out)) pending_chunk_ = true;
        } else if (view.slot == 2 && pending_chunk_) {
            // guessed key, arbitrary chunk content
            unsigned len = 1 + unsigned(rng_.next_below(rp.key_len));
            Payload p = Payload::message_chunk(rng_.random_bits(len), rng_.next_bit() != 0,
                                               rng_.random_bits(rp.key_len));
            emit_word(encode_word(p, rp, rng_), f, view, out);
        }
    }

private:
    // write `word` onto the lane via value changes from the known line value;
    // skips (and reports false) when the budget cannot cover the whole word
    bool emit_word(const BitString& word, uint32_t lane, const AdversaryView& view,
                   std::vector<AdversaryAction>& out) {
        uint8_t line = lines_[lane];
        uint64_t cost = 0;
        for (size_t i = 0; i < word.size(); ++i) {
            if (word.get(i) != line) {
                ++cost;
                line ^= 1;
            }
        }
        if (cost > left_) return false;
        left_ -= cost;
        line = lines_[lane];
        for (size_t i = 0; i < word.size(); ++i) {
            if (word.get(i) != line) {
                out.push_back({view.slot_start + i, lane, AdversaryAction::Kind::Flip, 0});
                line ^= 1;
            }
        }
        lines_[lane] = line;
        return true;
    }

    AdversarySpec spec_;
    Schedule sched_;
    Rng rng_;
    uint64_t left_;
    bool pending_chunk_ = false;
    std::vector<uint8_t> lines_;
};

// Attacks the feedback words only: kills key replies (slot 1) and converts
// ack silence to noise (slot 3), alternating by round.
class FeedbackJammerAdversary : public Adversary {
public:
    FeedbackJammerAdversary(const AdversarySpec& spec, SystemParams sys)
        : spec_(spec), sched_(sys), left_(spec.budget) {}

    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        if (view.round < spec_.start_round) return;
        const bool kill_reply = ((view.round - spec_.start_round) % 2) == 0;
        auto fwd = adv_detail::forward_lanes(*view.lanes);
        if (kill_reply && view.slot == 1) {
            const RoundParams& rp = sched_.params(view.round);
            const size_t coded = coded_region_len(PayloadKind::KeyReply, rp);
            const uint64_t cost = coded / 3 + 1;
            for (uint32_t f : fwd) {
                if (left_ < cost) return;
                left_ -= cost;
                uint64_t placed = 0;
                const size_t syms = (coded + 7) / 8;
                for (unsigned pass = 0; pass < 8 && placed < cost; ++pass)
                    for (size_t s = 0; s < syms && placed < cost; ++s) {
                        size_t off = 8 * s + pass;
                        if (off >= coded) continue;
                        out.push_back({view.slot_start + off, f + 1,
                                       AdversaryAction::Kind::Flip, 0});
                        ++placed;
                    }
            }
        } else if (!kill_reply && view.slot == 3) {
            // a value change every third step crosses the alternation threshold
            const uint64_t cost = (view.word_len + 2) / 3;
            for (uint32_t f : fwd) {
                if (left_ < cost) return;
                left_ -= cost;
                uint64_t placed = 0;
                for (size_t i = 1; i < view.word_len && placed < cost; i += 3) {
                    out.push_back({view.slot_start + i, f + 1,
                                   AdversaryAction::Kind::Flip, 0});
                    ++placed;
                }
            }
        }
    }

private:
    AdversarySpec spec_;
    Schedule sched_;
    uint64_t left_;
};

inline std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec,
                                                 const SystemParams& sys) {
    if (spec.kind == "none" || spec.budget == 0) return nullptr;
    if (spec.kind == "uniform_random") return std::make_unique<UniformRandomAdversary>(spec);
    if (spec.kind == "burst") return std::make_unique<BurstAdversary>(spec);
    if (spec.kind == "word_corruptor")
        return std::make_unique<WordCorruptorAdversary>(spec, sys);
    if (spec.kind == "silence_forger") return std::make_unique<SilenceForgerAdversary>(spec);
    if (spec.kind == "key_guesser") return std::make_unique<KeyGuesserAdversary>(spec, sys);
    if (spec.kind == "feedback_jammer")
        return std::make_unique<FeedbackJammerAdversary>(spec, sys);
    throw std::invalid_argument("unknown adversary kind: " + spec.kind);
}

} // namespace hardwire
