#pragma once

// Post-run validation and failure diagnosis.
//
// The validator checks, per directed channel, that the robust run simulated a
// FIFO message channel: recorded messages are exactly the completed sends, in
// order, each inside its send interval; sends may go unrecorded only when the
// receiver had already terminated. It also replays each node's logged state
// walk against its automaton and checks global completion.
//
// The diagnosis pass classifies failed runs with trace-side knowledge (which
// words were driven where) into the protocol's three failure events. Protocol
// decisions never see this information; it is read from the logs afterwards.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "events.hpp"
#include "oracle.hpp"
#include "runtime.hpp"

namespace hardwire {

enum class FailureKind : uint8_t {
    None = 0,
    AmdFailure,
    SilenceConversion,
    KeyInstallation,
    FifoViolation,
    IllegalWalk,
    Incomplete,
    Truncated,
    OutputMismatch,
};

inline const char* failure_kind_name(FailureKind k) {
    switch (k) {
        case FailureKind::None: return "none";
        case FailureKind::AmdFailure: return "amd_failure";
        case FailureKind::SilenceConversion: return "silence_conversion";
        case FailureKind::KeyInstallation: return "key_installation";
        case FailureKind::FifoViolation: return "fifo_violation";
        case FailureKind::IllegalWalk: return "illegal_walk";
        case FailureKind::Incomplete: return "incomplete";
        case FailureKind::Truncated: return "truncated";
        case FailureKind::OutputMismatch: return "output_mismatch";
    }
    return "?";
}

struct Verdict {
    bool pass = true;
    std::vector<std::string> violations;
    FailureKind first_violation = FailureKind::None;
    // criterion bookkeeping
    uint64_t sends_started = 0;
    uint64_t records = 0;
    bool exactly_once_ok = true;

    void add(FailureKind kind, const std::string& why) {
        pass = false;
        if (first_violation == FailureKind::None) first_violation = kind;
        violations.push_back(std::string(failure_kind_name(kind)) + ": " + why);
    }
};

// Everything the validator, metrics pass and trace dump need from one run.
struct NodeOutcome {
    bool terminated_pi = false;
    uint64_t terminated_round = 0;
    bool halted = false;
    std::optional<BitString> output;
};

struct RunRecord {
    MultiAutomaton pi;
    unsigned n = 0;
    double delta = 0.0;
    uint64_t seed = 0;
    std::string adversary_kind = "none";
    EventLog log;
    std::vector<NodeOutcome> nodes;
    uint64_t last_step = 0;
    uint64_t rounds = 0;
    bool truncated = false;
    uint64_t budget_total = 0, budget_spent = 0;
    uint64_t driven_bits = 0;
};

inline RunRecord snapshot(const ProtocolRun& run, uint64_t seed = 0,
                          const std::string& adversary_kind = "none") {
    RunRecord r;
    r.pi = run.pi();
    r.n = run.pi().n;
    r.delta = run.sim().system().delta;
    r.seed = seed;
    r.adversary_kind = adversary_kind;
    r.log = run.log();
    for (const auto& node : run.nodes()) {
        NodeOutcome o;
        o.terminated_pi = node->terminated_pi();
        o.terminated_round = node->terminated_round();
        o.halted = node->halted();
        o.output = node->output();
        r.nodes.push_back(std::move(o));
    }
    const SimTrace& tr = run.sim().trace();
    r.last_step = tr.last_step;
    r.rounds = tr.rounds;
    r.truncated = tr.truncated;
    r.budget_total = tr.budget_total;
    r.budget_spent = tr.budget_spent;
    r.driven_bits = tr.driven_bits_total();
    return r;
}

namespace detail_validate {

struct SendRec {
    BitString msg;
    uint64_t r1 = 0, r3 = 0;
    bool returned = false;
    ReturnReason reason = ReturnReason::Acked;
};

} // namespace detail_validate

inline Verdict validate_record(const RunRecord& rec) {
    using detail_validate::SendRec;
    const EventLog& log = rec.log;
    const MultiAutomaton& pi = rec.pi;
    const bool truncated = rec.truncated;
    Verdict v;

    if (truncated) v.add(FailureKind::Truncated, "step cap reached before all nodes halted");

    // channel key: (initiator, responder)
    std::map<std::pair<int, int>, std::vector<SendRec>> sends;
    std::map<std::pair<int, int>, std::vector<std::pair<BitString, uint64_t>>> records;

    for (const Event& e : log.events) {
        if (e.type == EventType::SendStarted) {
            sends[{e.node, e.peer}].push_back({e.msg, e.round, 0, false, ReturnReason::Acked});
            ++v.sends_started;
        } else if (e.type == EventType::SendReturned) {
            auto& s = sends[{e.node, e.peer}];
            if (s.empty() || s.back().returned) {
                v.add(FailureKind::IllegalWalk, "send returned without a matching start");
                continue;
            }
            s.back().returned = true;
            s.back().r3 = e.round;
            s.back().reason = ReturnReason(e.info);
        } else if (e.type == EventType::Recorded) {
            records[{e.peer, e.node}].emplace_back(e.msg, e.round);
            ++v.records;
        }
    }

    auto channel_name = [](std::pair<int, int> c) {
        std::ostringstream os;
        os << c.first << "->" << c.second;
        return os.str();
    };

    // FIFO clauses per channel
    std::vector<std::pair<int, int>> chans;
    for (const auto& [c, s] : sends) chans.push_back(c);
    for (const auto& [c, r] : records)
        if (!sends.count(c)) chans.push_back(c);
    for (auto c : chans) {
        const auto& s = sends[c];
        const auto& r = records[c];
        const NodeOutcome& responder = rec.nodes[size_t(c.second)];
        if (r.size() > s.size()) {
            v.add(FailureKind::FifoViolation,
                  "channel " + channel_name(c) + ": more records than sends");
            v.exactly_once_ok = false;
        }
        const size_t matched = std::min(r.size(), s.size());
        for (size_t i = 0; i < matched; ++i) {
            if (!(r[i].first == s[i].msg)) {
                v.add(FailureKind::FifoViolation,
                      "channel " + channel_name(c) + ": record " + std::to_string(i) +
                          " does not match the send sequence");
                v.exactly_once_ok = false;
                continue;
            }
            const uint64_t r2 = r[i].second;
            if (r2 < s[i].r1 || (s[i].returned && r2 > s[i].r3)) {
                v.add(FailureKind::FifoViolation,
                      "channel " + channel_name(c) + ": record " + std::to_string(i) +
                          " outside its send interval");
                v.exactly_once_ok = false;
            }
        }
        for (size_t i = matched; i < s.size(); ++i) {
            if (s[i].returned && s[i].reason == ReturnReason::Acked) {
                v.add(FailureKind::FifoViolation,
                      "channel " + channel_name(c) + ": acked send " + std::to_string(i) +
                          " was never recorded");
                v.exactly_once_ok = false;
            } else if (s[i].returned && !responder.terminated_pi) {
                v.add(FailureKind::FifoViolation,
                      "channel " + channel_name(c) + ": send " + std::to_string(i) +
                          " dropped although the receiver never terminated");
            }
        }
    }

    // walk legality per node
    for (unsigned u = 0; u < pi.n; ++u) {
        const Automaton& aut = pi.nodes[u];
        uint32_t cur = aut.initial;
        for (const Event& e : log.events) {
            if (e.node != int(u)) continue;
            if (e.type != EventType::InputApplied && e.type != EventType::OutputTaken) continue;
            uint32_t from = uint32_t(e.aux >> 32);
            uint32_t to = uint32_t(e.aux & 0xffffffffu);
            if (from != cur) {
                v.add(FailureKind::IllegalWalk,
                      "node " + std::to_string(u) + ": discontinuous state walk");
                break;
            }
            bool legal = false;
            if (e.type == EventType::OutputTaken) {
                for (const auto& oe : aut.states[from].outputs)
                    if (oe.next == to && oe.peer == e.peer) legal = true;
            } else {
                auto it = aut.states[from].inputs.find({e.peer, e.msg.to_string()});
                legal = (it != aut.states[from].inputs.end()) ? (it->second == to)
                                                              : (to == from); // input-enabled default
            }
            if (!legal) {
                v.add(FailureKind::IllegalWalk,
                      "node " + std::to_string(u) + ": transition not in the automaton");
                break;
            }
            cur = to;
        }
    }

    // completion: every node terminated with the automaton's output and halted
    for (unsigned u = 0; u < pi.n; ++u) {
        const NodeOutcome& node = rec.nodes[u];
        if (!node.terminated_pi) {
            v.add(FailureKind::Incomplete, "node " + std::to_string(u) + " never terminated");
            continue;
        }
        if (!node.halted)
            v.add(FailureKind::Incomplete,
                  "node " + std::to_string(u) + " still flushing queued sends");
    }
    return v;
}

inline Verdict validate_run(const ProtocolRun& run, bool truncated) {
    RunRecord rec = snapshot(run);
    rec.truncated = truncated || rec.truncated;
    return validate_record(rec);
}

// Output equivalence against a noise-free oracle transcript, meaningful for
// deterministic-confluent protocols.
inline bool outputs_match_record(const RunRecord& rec, const OracleTranscript& oracle,
                                 Verdict* v = nullptr) {
    bool ok = true;
    for (unsigned u = 0; u < rec.pi.n; ++u) {
        const auto& got = rec.nodes[u].output;
        const auto& want = oracle.outputs[u];
        bool same = got.has_value() == want.has_value() && (!got.has_value() || *got == *want);
        if (!same) {
            ok = false;
            if (v)
                v->add(FailureKind::OutputMismatch,
                       "node " + std::to_string(u) + " output differs from the oracle run");
        }
    }
    return ok;
}

inline bool outputs_match(const ProtocolRun& run, const OracleTranscript& oracle,
                          Verdict* v = nullptr) {
    return outputs_match_record(snapshot(run), oracle, v);
}

struct Diagnosis {
    FailureKind kind = FailureKind::None;
    uint64_t step = 0;
    std::string note;
};

// Classify adversarial wins using trace-side knowledge of driven words.
inline Diagnosis diagnose_failure_events(const EventLog& log) {
    // index deliberate words by (initiator, slot sender side, round, slot)
    std::map<std::tuple<int, int, uint64_t, unsigned>, const Event*> sent;
    for (const Event& e : log.events)
        if (e.type == EventType::WordSent)
            sent[{e.initiator, e.node, e.round, e.slot}] = &e;

    Diagnosis d;
    auto update = [&](FailureKind k, uint64_t step, const std::string& note) {
        if (d.kind == FailureKind::None || step < d.step) d = {k, step, note};
    };

    for (const Event& e : log.events) {
        if (e.type == EventType::SilenceRead) {
            update(FailureKind::SilenceConversion, e.step,
                   "silence read on a driven window (round " + std::to_string(e.round) + ")");
        } else if (e.type == EventType::WordAccepted) {
            // the accepting side is e.node; the word should have come from e.peer
            auto it = sent.find({e.initiator, e.peer, e.round, e.slot});
            if (it == sent.end()) {
                if (PayloadKind(e.info) != PayloadKind::KeyRequest)
                    update(FailureKind::KeyInstallation, e.step,
                           "accepted keyed word that no node sent (round " +
                               std::to_string(e.round) + ")");
                // a fabricated key request is ordinary adversary behavior
            } else if (!(it->second->msg == e.msg)) {
                update(FailureKind::AmdFailure, e.step,
                       "accepted payload differs from the driven word (round " +
                           std::to_string(e.round) + ")");
            }
        }
    }
    return d;
}

} // namespace hardwire
