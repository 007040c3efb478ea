#pragma once

// Noise-free asynchronous executor for the source protocol over ideal FIFO
// channels. Ground truth for outputs and message loads: the robust simulation
// must agree with some run of this executor, and does exactly for the
// deterministic-confluent generator families.

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "automaton.hpp"
#include "rng.hpp"

namespace hardwire {

struct OracleTranscript {
    // per directed edge: messages in delivery order
    std::map<std::pair<int, int>, std::vector<BitString>> delivered;
    std::vector<std::optional<BitString>> outputs;
    std::vector<bool> terminated;
    bool truncated = false;
    uint64_t deliveries = 0;

    uint64_t total_bits() const {
        uint64_t s = 0;
        for (const auto& [edge, msgs] : delivered)
            for (const auto& m : msgs) s += m.size();
        return s;
    }
    uint64_t total_messages() const {
        uint64_t s = 0;
        for (const auto& [edge, msgs] : delivered) s += msgs.size();
        return s;
    }
};

enum class OraclePolicy { RoundRobin, Random };

inline OracleTranscript oracle_run(const MultiAutomaton& pi, OraclePolicy policy = OraclePolicy::RoundRobin,
                                   uint64_t seed = 0, uint64_t max_deliveries = 10000000) {
    OracleTranscript tr;
    tr.outputs.resize(pi.n);
    tr.terminated.assign(pi.n, false);
    Rng rng(seed ^ 0x517cc1b727220a95ull);

    std::vector<uint32_t> state(pi.n);
    std::map<std::pair<int, int>, std::deque<BitString>> queues;
    for (unsigned u = 0; u < pi.n; ++u) state[u] = pi.nodes[u].initial;

    // drain local output actions at node u until it waits or terminates
    auto drain = [&](unsigned u) {
        while (!tr.terminated[u]) {
            const auto& st = pi.nodes[u].states[state[u]];
            if (st.terminal) {
                tr.terminated[u] = true;
                tr.outputs[u] = st.output;
                break;
            }
            if (st.outputs.empty()) break;
            const auto& e = st.outputs.front();
            queues[{int(u), e.peer}].push_back(e.msg);
            state[u] = e.next;
        }
    };

    for (unsigned u = 0; u < pi.n; ++u) drain(u);

    std::vector<std::pair<int, int>> keys;
    size_t rr = 0;
    while (true) {
        keys.clear();
        for (auto& [k, q] : queues)
            if (!q.empty() && !tr.terminated[size_t(k.second)]) keys.push_back(k);
        if (keys.empty()) break;
        if (tr.deliveries >= max_deliveries) {
            tr.truncated = true;
            break;
        }
        std::pair<int, int> pick;
        if (policy == OraclePolicy::Random)
            pick = keys[size_t(rng.next_below(keys.size()))];
        else
            pick = keys[rr++ % keys.size()];
        auto& q = queues[pick];
        BitString msg = std::move(q.front());
        q.pop_front();
        ++tr.deliveries;
        unsigned v = unsigned(pick.second);
        tr.delivered[pick].push_back(msg);
        const auto& st = pi.nodes[v].states[state[v]];
        auto it = st.inputs.find({pick.first, msg.to_string()});
        if (it != st.inputs.end()) state[v] = it->second; // else input-enabled self-loop
        drain(v);
    }
    // messages still queued toward terminated nodes are dropped, matching the
    // robust simulation's behavior after a receiver terminates
    return tr;
}

} // namespace hardwire
