#pragma once

// Run measurement: bits of the source protocol delivered, bits the robust
// protocol drove, adversary spend, rounds, latency, verdict classification.

#include <map>

#include "validate.hpp"

namespace hardwire {

struct RunMetrics {
    uint64_t run_id = 0;
    uint64_t seed = 0;
    uint64_t L = 0;        // source-protocol bits delivered
    double alpha = 0.0;    // average delivered message length
    uint64_t L_prime = 0;  // bits driven by protocol nodes
    uint64_t T_budget = 0;
    uint64_t T_spent = 0;
    uint64_t rounds = 0;
    uint64_t latency_steps = 0;
    std::map<int, uint64_t> per_path_latency; // per sink node: halt step
    bool success = false;
    FailureKind failure_kind = FailureKind::None;
    double epsilon = 0.0;  // a-posteriori rate T_spent / L'
    double overhead = 0.0; // L' / L
};

inline RunMetrics measure_record(const RunRecord& rec, const Verdict& verdict,
                                 const Diagnosis& diag) {
    RunMetrics m;
    m.seed = rec.seed;
    uint64_t messages = 0;
    for (const Event& e : rec.log.events) {
        switch (e.type) {
            case EventType::Recorded:
                m.L += e.msg.size();
                ++messages;
                break;
            case EventType::Halted:
                m.per_path_latency[e.node] = e.step;
                if (e.step > m.latency_steps) m.latency_steps = e.step;
                break;
            default:
                break;
        }
    }
    m.alpha = messages ? double(m.L) / double(messages) : 0.0;
    m.L_prime = rec.driven_bits;
    m.T_budget = rec.budget_total;
    m.T_spent = rec.budget_spent;
    m.rounds = rec.rounds;
    if (m.latency_steps == 0) m.latency_steps = rec.last_step;
    m.success = verdict.pass;
    m.failure_kind = verdict.pass
                         ? FailureKind::None
                         : (diag.kind != FailureKind::None ? diag.kind : verdict.first_violation);
    m.epsilon = m.L_prime ? double(m.T_spent) / double(m.L_prime) : 0.0;
    m.overhead = m.L ? double(m.L_prime) / double(m.L) : 0.0;
    return m;
}

inline RunMetrics measure(const ProtocolRun& run, const Verdict& verdict,
                          const Diagnosis& diag) {
    return measure_record(snapshot(run), verdict, diag);
}

} // namespace hardwire
