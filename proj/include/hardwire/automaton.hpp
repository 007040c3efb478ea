#pragma once

// I/O automata for the source protocol, their file format, and generator
// families used by the experiment harness.
//
// File grammar (one automaton block per node, '#' comments):
//   node <id>
//     state <name> [initial] [terminal [output=<bits>]]
//     <from> --out(<peer>, <bits>)--> <to>
//     <from> --in(<peer>, <bits>)--> <to>
//   end
//
// Every state is input-enabled: a received message with no explicit
// transition is consumed as a self-loop (and flagged in the run log).

#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"
#include "language.hpp"
#include "netsim.hpp"
#include "rng.hpp"

namespace hardwire {

struct Automaton {
    struct OutputEdge {
        int peer = -1;
        BitString msg;
        uint32_t next = 0;
    };
    struct State {
        std::string name;
        bool terminal = false;
        std::optional<BitString> output;
        std::vector<OutputEdge> outputs; // ordered: peer asc, then declaration
        std::map<std::pair<int, std::string>, uint32_t> inputs;
    };

    std::vector<State> states;
    uint32_t initial = 0;

    uint32_t state_index(const std::string& name) const {
        for (uint32_t i = 0; i < states.size(); ++i)
            if (states[i].name == name) return i;
        throw std::invalid_argument("automaton: unknown state " + name);
    }
};

struct MultiAutomaton {
    unsigned n = 0;
    std::vector<Automaton> nodes;

    // Directed edges that actually carry messages.
    std::vector<std::pair<int, int>> message_edges() const {
        std::vector<std::pair<int, int>> out;
        for (unsigned u = 0; u < n; ++u)
            for (const auto& st : nodes[u].states)
                for (const auto& e : st.outputs) {
                    std::pair<int, int> d{int(u), e.peer};
                    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
                }
        return out;
    }

    // Undirected topology implied by the protocol's traffic.
    Topology derived_topology() const {
        std::vector<std::pair<int, int>> edges;
        for (auto [u, v] : message_edges()) {
            auto [a, b] = std::minmax(u, v);
            if (std::find(edges.begin(), edges.end(), std::pair<int, int>(a, b)) == edges.end())
                edges.emplace_back(a, b);
        }
        return Topology::from_edges(n, std::move(edges));
    }

    // Per directed pair: the set of messages u may send to v. Throws if any
    // such set is not prefix-free.
    std::map<std::pair<int, int>, PrefixFreeLanguage> languages() const {
        std::map<std::pair<int, int>, PrefixFreeLanguage> langs;
        std::map<std::pair<int, int>, std::vector<std::string>> seen;
        for (unsigned u = 0; u < n; ++u)
            for (const auto& st : nodes[u].states)
                for (const auto& e : st.outputs) {
                    auto key = std::pair<int, int>(int(u), e.peer);
                    auto& dup = seen[key];
                    std::string text = e.msg.to_string();
                    if (std::find(dup.begin(), dup.end(), text) != dup.end()) continue;
                    dup.push_back(text);
                    langs[key].insert(e.msg);
                }
        return langs;
    }
};

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

namespace automaton_text {

inline std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline MultiAutomaton parse(const std::string& text) {
    MultiAutomaton ma;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    struct PendingEdge {
        int node;
        std::string from, to;
        bool is_out;
        int peer;
        BitString msg;
        int line;
    };
    std::vector<PendingEdge> pending;
    std::map<int, std::optional<uint32_t>> initials;
    int cur_node = -1;

    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("automaton parse, line " + std::to_string(lineno) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "node") {
            int id;
            if (!(ls >> id) || id < 0) fail("expected 'node <id>'");
            if (size_t(id) >= ma.nodes.size()) ma.nodes.resize(id + 1);
            if (!ma.nodes[id].states.empty()) fail("duplicate node block");
            cur_node = id;
            initials[id] = std::nullopt;
        } else if (tok == "end") {
            if (cur_node < 0) fail("'end' outside a node block");
            cur_node = -1;
        } else if (tok == "state") {
            if (cur_node < 0) fail("state outside a node block");
            std::string name;
            if (!(ls >> name)) fail("expected state name");
            Automaton::State st;
            st.name = name;
            std::string attr;
            bool initial = false;
            while (ls >> attr) {
                if (attr == "initial") initial = true;
                else if (attr == "terminal") st.terminal = true;
                else if (attr.rfind("output=", 0) == 0) {
                    if (!st.terminal) fail("output= requires terminal");
                    st.output = BitString::from_string(attr.substr(7));
                } else fail("unknown state attribute '" + attr + "'");
            }
            auto& aut = ma.nodes[cur_node];
            for (const auto& s : aut.states)
                if (s.name == name) fail("duplicate state " + name);
            if (initial) {
                if (initials[cur_node]) fail("two initial states");
                initials[cur_node] = uint32_t(aut.states.size());
            }
            aut.states.push_back(std::move(st));
        } else {
            // transition line: FROM --out(P, BITS)--> TO  (spaces allowed in args)
            if (cur_node < 0) fail("transition outside a node block");
            auto arrow_open = line.find("--");
            auto arrow_close = line.find(")-->");
            if (arrow_open == std::string::npos || arrow_close == std::string::npos)
                fail("malformed transition arrow");
            std::string from = strip(line.substr(0, arrow_open));
            std::string to = strip(line.substr(arrow_close + 4));
            std::string head = line.substr(arrow_open + 2, arrow_close - arrow_open - 2);
            auto lp = head.find('(');
            if (from.empty() || to.empty() || lp == std::string::npos)
                fail("malformed transition arrow");
            std::string kind = strip(head.substr(0, lp));
            std::string args = head.substr(lp + 1);
            auto comma = args.find(',');
            if (comma == std::string::npos) fail("expected (peer, bits)");
            int peer = std::stoi(args.substr(0, comma));
            std::string bits = strip(args.substr(comma + 1));
            PendingEdge e;
            e.node = cur_node;
            e.from = from;
            e.to = to;
            e.peer = peer;
            e.msg = BitString::from_string(bits);
            e.line = lineno;
            if (kind == "out") e.is_out = true;
            else if (kind == "in") e.is_out = false;
            else fail("transition must be --in or --out");
            pending.push_back(std::move(e));
        }
    }
    if (cur_node >= 0) fail("missing 'end'");
    ma.n = unsigned(ma.nodes.size());
    for (unsigned i = 0; i < ma.n; ++i) {
        if (ma.nodes[i].states.empty())
            throw std::invalid_argument("automaton: node " + std::to_string(i) + " missing");
        auto it = initials.find(int(i));
        if (it == initials.end() || !it->second)
            throw std::invalid_argument("automaton: node " + std::to_string(i) + " has no initial state");
        ma.nodes[i].initial = *it->second;
    }
    for (const auto& e : pending) {
        auto& aut = ma.nodes[e.node];
        uint32_t from = aut.state_index(e.from);
        uint32_t to = aut.state_index(e.to);
        if (e.msg.empty())
            throw std::invalid_argument("automaton: empty message in transition");
        if (e.is_out)
            aut.states[from].outputs.push_back({e.peer, e.msg, to});
        else {
            auto key = std::pair<int, std::string>(e.peer, e.msg.to_string());
            if (aut.states[from].inputs.count(key))
                throw std::invalid_argument("automaton: duplicate input transition");
            aut.states[from].inputs[key] = to;
        }
    }
    // deterministic output choice: ascending peer, then declaration order
    for (auto& aut : ma.nodes)
        for (auto& st : aut.states)
            std::stable_sort(st.outputs.begin(), st.outputs.end(),
                             [](const auto& a, const auto& b) { return a.peer < b.peer; });
    return ma;
}

inline std::string print(const MultiAutomaton& ma) {
    std::ostringstream out;
    for (unsigned u = 0; u < ma.n; ++u) {
        const auto& aut = ma.nodes[u];
        out << "node " << u << "\n";
        for (uint32_t i = 0; i < aut.states.size(); ++i) {
            const auto& st = aut.states[i];
            out << "  state " << st.name;
            if (i == aut.initial) out << " initial";
            if (st.terminal) {
                out << " terminal";
                if (st.output) out << " output=" << st.output->to_string();
            }
            out << "\n";
        }
        for (const auto& st : aut.states) {
            for (const auto& e : st.outputs)
                out << "  " << st.name << " --out(" << e.peer << ", " << e.msg.to_string()
                    << ")--> " << aut.states[e.next].name << "\n";
            for (const auto& [key, next] : st.inputs)
                out << "  " << st.name << " --in(" << key.first << ", " << key.second << ")--> "
                    << aut.states[next].name << "\n";
        }
        out << "end\n";
    }
    return out.str();
}

} // namespace automaton_text

// ---------------------------------------------------------------------------
// generator families (message lengths control the average message size)
// ---------------------------------------------------------------------------

struct GeneratorSpec {
    std::string kind = "flood"; // flood|pingpong|pipeline|token_ring|broadcast_tree
    unsigned n = 2;
    unsigned count = 16;      // messages emitted by the source pattern
    unsigned msg_len = 1;     // fixed message length
    unsigned msg_len_max = 0; // >0: lengths uniform in [msg_len, msg_len_max], framed
    uint64_t seed = 1;
};

namespace detail_gen {

// messages of varying length are framed with an 8-bit length header so each
// per-edge language stays prefix-free by construction
inline BitString gen_message(Rng& rng, const GeneratorSpec& g) {
    if (g.msg_len_max == 0) return rng.random_bits(g.msg_len);
    unsigned len = g.msg_len + unsigned(rng.next_below(g.msg_len_max - g.msg_len + 1));
    BitString m;
    m.append_uint(len, 8);
    m.append(rng.random_bits(len));
    return m;
}

inline std::string sname(const std::string& p, size_t i) { return p + std::to_string(i); }

} // namespace detail_gen

inline MultiAutomaton generate_protocol(const GeneratorSpec& g) {
    using detail_gen::gen_message;
    using detail_gen::sname;
    Rng rng(g.seed ^ 0x9a0b5c5d3e2f1810ull);
    MultiAutomaton ma;

    auto chain_sender = [&](Automaton& a, int peer, const std::vector<BitString>& msgs) {
        for (size_t i = 0; i <= msgs.size(); ++i) {
            Automaton::State st;
            st.name = sname("S", i);
            st.terminal = i == msgs.size();
            a.states.push_back(std::move(st));
        }
        for (size_t i = 0; i < msgs.size(); ++i)
            a.states[i].outputs.push_back({peer, msgs[i], uint32_t(i + 1)});
        a.initial = 0;
    };
    auto chain_receiver = [&](Automaton& a, int peer, const std::vector<BitString>& msgs) {
        for (size_t i = 0; i <= msgs.size(); ++i) {
            Automaton::State st;
            st.name = sname("R", i);
            st.terminal = i == msgs.size();
            a.states.push_back(std::move(st));
        }
        for (size_t i = 0; i < msgs.size(); ++i)
            a.states[i].inputs[{peer, msgs[i].to_string()}] = uint32_t(i + 1);
        a.initial = 0;
    };

    if (g.kind == "flood") {
        ma.n = 2;
        ma.nodes.resize(2);
        std::vector<BitString> msgs;
        for (unsigned i = 0; i < g.count; ++i) msgs.push_back(gen_message(rng, g));
        chain_sender(ma.nodes[0], 1, msgs);
        chain_receiver(ma.nodes[1], 0, msgs);
    } else if (g.kind == "pingpong") {
        ma.n = 2;
        ma.nodes.resize(2);
        std::vector<BitString> pings, pongs;
        for (unsigned i = 0; i < g.count; ++i) {
            pings.push_back(gen_message(rng, g));
            pongs.push_back(gen_message(rng, g));
        }
        Automaton& a = ma.nodes[0];
        Automaton& b = ma.nodes[1];
        for (unsigned i = 0; i <= g.count; ++i) {
            a.states.push_back({sname("P", 2 * i), i == g.count, {}, {}, {}});
            if (i < g.count) a.states.push_back({sname("P", 2 * i + 1), false, {}, {}, {}});
            b.states.push_back({sname("Q", 2 * i), i == g.count, {}, {}, {}});
            if (i < g.count) b.states.push_back({sname("Q", 2 * i + 1), false, {}, {}, {}});
        }
        for (unsigned i = 0; i < g.count; ++i) {
            a.states[2 * i].outputs.push_back({1, pings[i], 2 * i + 1});
            a.states[2 * i + 1].inputs[{1, pongs[i].to_string()}] = 2 * i + 2;
            b.states[2 * i].inputs[{0, pings[i].to_string()}] = 2 * i + 1;
            b.states[2 * i + 1].outputs.push_back({0, pongs[i], 2 * i + 2});
        }
        a.initial = 0;
        b.initial = 0;
    } else if (g.kind == "pipeline") {
        if (g.n < 2) throw std::invalid_argument("pipeline needs n >= 2");
        ma.n = g.n;
        ma.nodes.resize(g.n);
        std::vector<BitString> msgs;
        for (unsigned i = 0; i < g.count; ++i) msgs.push_back(gen_message(rng, g));
        chain_sender(ma.nodes[0], 1, msgs);
        for (unsigned u = 1; u + 1 < g.n; ++u) {
            Automaton& a = ma.nodes[u];
            for (size_t i = 0; i <= 2 * msgs.size(); ++i)
                a.states.push_back({sname("F", i), i == 2 * msgs.size(), {}, {}, {}});
            for (size_t i = 0; i < msgs.size(); ++i) {
                a.states[2 * i].inputs[{int(u - 1), msgs[i].to_string()}] = uint32_t(2 * i + 1);
                a.states[2 * i + 1].outputs.push_back({int(u + 1), msgs[i], uint32_t(2 * i + 2)});
            }
            a.initial = 0;
        }
        chain_receiver(ma.nodes[g.n - 1], int(g.n - 2), msgs);
    } else if (g.kind == "token_ring") {
        if (g.n < 3) throw std::invalid_argument("token_ring needs n >= 3");
        ma.n = g.n;
        ma.nodes.resize(g.n);
        // count laps around the ring; every hop is a fresh token value
        std::vector<std::vector<BitString>> hop(g.n); // messages leaving node u
        for (unsigned lap = 0; lap < g.count; ++lap)
            for (unsigned u = 0; u < g.n; ++u) hop[u].push_back(gen_message(rng, g));
        for (unsigned u = 0; u < g.n; ++u) {
            Automaton& a = ma.nodes[u];
            int next = int((u + 1) % g.n);
            int prev = int((u + g.n - 1) % g.n);
            size_t laps = g.count;
            // node 0 starts each lap by sending, then waits for the return
            for (size_t i = 0; i <= 2 * laps; ++i)
                a.states.push_back({sname("T", i), i == 2 * laps, {}, {}, {}});
            for (size_t lap = 0; lap < laps; ++lap) {
                if (u == 0) {
                    a.states[2 * lap].outputs.push_back({next, hop[u][lap], uint32_t(2 * lap + 1)});
                    a.states[2 * lap + 1].inputs[{prev, hop[g.n - 1][lap].to_string()}] =
                        uint32_t(2 * lap + 2);
                } else {
                    a.states[2 * lap].inputs[{prev, hop[u - 1][lap].to_string()}] =
                        uint32_t(2 * lap + 1);
                    a.states[2 * lap + 1].outputs.push_back({next, hop[u][lap], uint32_t(2 * lap + 2)});
                }
            }
            a.initial = 0;
        }
    } else if (g.kind == "broadcast_tree") {
        if (g.n < 2) throw std::invalid_argument("broadcast_tree needs n >= 2");
        ma.n = g.n;
        ma.nodes.resize(g.n);
        // binary tree over 0..n-1; the root floods `count` messages downward
        std::vector<BitString> msgs;
        for (unsigned i = 0; i < g.count; ++i) msgs.push_back(gen_message(rng, g));
        for (unsigned u = 0; u < g.n; ++u) {
            Automaton& a = ma.nodes[u];
            std::vector<int> kids;
            for (int c : {2 * int(u) + 1, 2 * int(u) + 2})
                if (unsigned(c) < g.n) kids.push_back(c);
            int parent = int(u) == 0 ? -1 : (int(u) - 1) / 2;
            size_t per_msg = (parent >= 0 ? 1 : 0) + kids.size();
            size_t total = msgs.size() * per_msg;
            for (size_t i = 0; i <= total; ++i)
                a.states.push_back({sname("B", i), i == total, {}, {}, {}});
            size_t s = 0;
            for (const auto& m : msgs) {
                if (parent >= 0) {
                    a.states[s].inputs[{parent, m.to_string()}] = uint32_t(s + 1);
                    ++s;
                }
                for (int c : kids) {
                    a.states[s].outputs.push_back({c, m, uint32_t(s + 1)});
                    ++s;
                }
            }
            a.initial = 0;
        }
    } else {
        throw std::invalid_argument("unknown generator kind: " + g.kind);
    }

    for (auto& aut : ma.nodes)
        for (auto& st : aut.states)
            std::stable_sort(st.outputs.begin(), st.outputs.end(),
                             [](const auto& a, const auto& b) { return a.peer < b.peer; });
    return ma;
}

// Structural validation against a topology; throws on violations.
inline void validate_protocol(const MultiAutomaton& ma, const Topology& topo) {
    if (ma.n != topo.n) throw std::invalid_argument("protocol/topology node count mismatch");
    for (unsigned u = 0; u < ma.n; ++u) {
        const auto& aut = ma.nodes[u];
        if (aut.states.empty()) throw std::invalid_argument("empty automaton");
        if (aut.initial >= aut.states.size()) throw std::invalid_argument("bad initial state");
        for (const auto& st : aut.states) {
            if (st.output && !st.terminal)
                throw std::invalid_argument("output value on non-terminal state");
            for (const auto& e : st.outputs) {
                if (e.peer < 0 || unsigned(e.peer) >= ma.n || e.peer == int(u))
                    throw std::invalid_argument("output to invalid peer");
                if (!topo.has_edge(int(u), e.peer))
                    throw std::invalid_argument("output along a missing edge");
                if (e.next >= aut.states.size()) throw std::invalid_argument("bad target state");
                if (e.msg.empty()) throw std::invalid_argument("empty message");
            }
            for (const auto& [key, next] : st.inputs) {
                if (key.first < 0 || unsigned(key.first) >= ma.n)
                    throw std::invalid_argument("input from invalid peer");
                if (next >= aut.states.size()) throw std::invalid_argument("bad target state");
            }
        }
    }
    (void)ma.languages(); // throws unless every per-edge language is prefix-free
}

} // namespace hardwire
