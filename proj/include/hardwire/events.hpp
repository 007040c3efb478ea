#pragma once

// Run event log. One global, step-ordered record of everything the protocol
// layer did: sends, word traffic, records, automaton transitions. The
// validator, the metrics pass and the failure diagnosis all work from this.

#include <cstdint>
#include <string>
#include <vector>

#include "bits.hpp"

namespace hardwire {

enum class EventType : uint8_t {
    SendEnqueued,  // node queued sendMessage(msg) toward peer
    SendStarted,   // head-of-queue call became active (round r1)
    SendReturned,  // call returned (round r3); info = return reason
    WordSent,      // a deliberate word was driven; msg = serialized payload
    NoiseSent,     // receiver drove a noise word
    SilenceRead,   // a silent window was read where the partner drove a word
    WordAccepted,  // decode_word accepted; msg = serialized payload
    Recorded,      // receiver recorded a complete message
    InputApplied,  // automaton consumed a recorded message; aux = state pair
    OutputTaken,   // automaton took an output transition; aux = state pair
    TerminatedPi,  // node set its output
    Halted,        // node finished flushing queued sends
    Anomaly,       // info = AnomalyKind
};

enum class ReturnReason : uint8_t { Acked = 0, PartnerSilent = 1 };

enum class AnomalyKind : uint8_t {
    UnmatchedInput = 0,   // no transition for a recorded message; self-loop taken
    InvalidPartial = 1,   // mu fell outside the prefix-free language
    RecordAfterTermination = 2,
};

struct Event {
    EventType type{};
    int16_t node = -1;
    int16_t peer = -1;
    // channel identity: the initiating endpoint of the channel the event
    // happened on (-1 for node-level events)
    int16_t initiator = -1;
    uint8_t slot = 0;
    uint8_t info = 0;
    uint64_t step = 0;
    uint64_t round = 0;
    uint64_t aux = 0;
    BitString msg;
};

struct EventLog {
    std::vector<Event> events;

    Event& push(EventType t) {
        events.emplace_back();
        events.back().type = t;
        return events.back();
    }
    size_t size() const { return events.size(); }
    const Event& operator[](size_t i) const { return events[i]; }
};

inline uint64_t pack_states(uint32_t from, uint32_t to) {
    return (uint64_t(from) << 32) | to;
}

} // namespace hardwire
