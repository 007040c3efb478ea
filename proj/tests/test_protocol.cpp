#include "doctest.h"

#include <hardwire/metrics.hpp>
#include <hardwire/oracle.hpp>
#include <hardwire/runtime.hpp>
#include <hardwire/validate.hpp>

#include <algorithm>

using namespace hardwire;

namespace {

struct ScriptedAdversary : Adversary {
    std::vector<AdversaryAction> script;
    void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) override {
        for (const auto& a : script)
            if (a.step >= view.slot_start && a.step < view.slot_start + view.word_len)
                out.push_back(a);
    }
};

size_t count_events(const EventLog& log, EventType t, int node = -1) {
    size_t c = 0;
    for (const auto& e : log.events)
        if (e.type == t && (node < 0 || e.node == node)) ++c;
    return c;
}

std::vector<const Event*> events_of(const EventLog& log, EventType t) {
    std::vector<const Event*> out;
    for (const auto& e : log.events)
        if (e.type == t) out.push_back(&e);
    return out;
}

// one flipped bit in enough distinct coded symbols to defeat the decoder
void corrupt_word_slot(std::vector<AdversaryAction>& script, uint64_t slot_start,
                       uint32_t lane, size_t coded_len) {
    const size_t syms = coded_len / 8;
    for (size_t s = 0; s < syms; ++s)
        script.push_back({slot_start + 8 * s, lane, AdversaryAction::Kind::Flip, 0});
}

// turn a silent stretch into noise: one value change every third step
void forge_noise(std::vector<AdversaryAction>& script, uint64_t slot_start, size_t word_len,
                 uint32_t lane) {
    for (size_t i = 1; i < word_len; i += 3)
        script.push_back({slot_start + i, lane, AdversaryAction::Kind::Flip, 0});
}

} // namespace

TEST_CASE("noise-free single-bit exchange: one round, four word slots") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 1;
    g.msg_len = 1;
    g.seed = 3;
    MultiAutomaton pi = generate_protocol(g);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 42);
    auto res = run.run(1000000);
    REQUIRE(res.completed);

    const size_t w1 = 1500;
    CHECK(run.sim().trace().rounds == 1);
    CHECK(run.sim().trace().last_step == 4 * w1); // the round occupies exactly 4 words

    // transcript shape: key request, key reply, chunk, then silence
    auto words = events_of(run.log(), EventType::WordSent);
    REQUIRE(words.size() == 3);
    CHECK(PayloadKind(words[0]->info) == PayloadKind::KeyRequest);
    CHECK(words[0]->node == 0);
    CHECK(words[0]->slot == 0);
    CHECK(PayloadKind(words[1]->info) == PayloadKind::KeyReply);
    CHECK(words[1]->node == 1);
    CHECK(words[1]->slot == 1);
    CHECK(PayloadKind(words[2]->info) == PayloadKind::MessageChunk);
    CHECK(words[2]->node == 0);
    CHECK(words[2]->slot == 2);
    CHECK(count_events(run.log(), EventType::NoiseSent) == 0);
    CHECK(count_events(run.log(), EventType::Recorded) == 1);

    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(v.exactly_once_ok);

    auto oracle = oracle_run(pi);
    CHECK(outputs_match(run, oracle));

    Diagnosis diag = diagnose_failure_events(run.log());
    CHECK(diag.kind == FailureKind::None);

    RunMetrics m = measure(run, v, diag);
    CHECK(m.L == 1);
    CHECK(m.alpha == doctest::Approx(1.0));
    CHECK(m.L_prime == 3 * w1); // three deliberate words; the ack slot is silence
    CHECK(m.T_spent == 0);
    CHECK(m.epsilon == doctest::Approx(0.0));
    CHECK(m.overhead == doctest::Approx(3.0 * w1));
    CHECK(m.success);
}

TEST_CASE("ping-pong terminates with both outputs and both messages") {
    GeneratorSpec g;
    g.kind = "pingpong";
    g.count = 1;
    g.msg_len = 1;
    g.seed = 9;
    MultiAutomaton pi = generate_protocol(g);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 7);
    auto res = run.run(1000000);
    REQUIRE(res.completed);
    CHECK(count_events(run.log(), EventType::Recorded) == 2);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(outputs_match(run, oracle_run(pi)));
    for (const auto& node : run.nodes()) CHECK(node->terminated_pi());
}

TEST_CASE("a pending send to a terminated receiver returns on slot-2 silence") {
    const char* text =
        "node 0\n"
        "  state S0 initial\n"
        "  state S1\n"
        "  state S2 terminal\n"
        "  S0 --out(1, 1)--> S1\n"
        "  S1 --out(1, 0)--> S2\n"
        "end\n"
        "node 1\n"
        "  state R0 initial\n"
        "  state R1 terminal output=1\n"
        "  R0 --in(0, 1)--> R1\n"
        "end\n";
    MultiAutomaton pi = automaton_text::parse(text);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 5);
    auto res = run.run(1000000);
    REQUIRE(res.completed);

    auto returned = events_of(run.log(), EventType::SendReturned);
    REQUIRE(returned.size() == 2);
    CHECK(ReturnReason(returned[0]->info) == ReturnReason::Acked);
    CHECK(ReturnReason(returned[1]->info) == ReturnReason::PartnerSilent);
    CHECK(count_events(run.log(), EventType::Recorded) == 1);

    Verdict v = validate_run(run, false);
    CHECK(v.pass); // the dropped send is excused by the receiver's termination
}

TEST_CASE("messages longer than one chunk flow across rounds") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 1;
    g.msg_len = 40; // kappa_1 = 14: at least three chunks
    g.seed = 10;
    MultiAutomaton pi = generate_protocol(g);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 11);
    auto res = run.run(10000000);
    REQUIRE(res.completed);
    CHECK(run.sim().trace().rounds >= 3);
    CHECK(count_events(run.log(), EventType::Recorded) == 1);
    auto recs = events_of(run.log(), EventType::Recorded);
    CHECK(recs[0]->msg.size() == 40);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(outputs_match(run, oracle_run(pi)));
}

TEST_CASE("a corrupted chunk word forces a retry round, recorded once") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 1;
    g.msg_len = 1;
    g.seed = 12;
    MultiAutomaton pi = generate_protocol(g);
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);

    ScriptedAdversary adv;
    // slot 2 of round 1 on the initiator's forward lane
    corrupt_word_slot(adv.script, 1 + 2 * p1.word_len, 0,
                      coded_region_len(PayloadKind::MessageChunk, p1));

    ProtocolRun run(pi, pi.derived_topology(), sys, 21);
    run.sim().set_adversary(&adv, 100000);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    CHECK(run.sim().trace().rounds >= 2);           // one extra round for the message
    CHECK(count_events(run.log(), EventType::NoiseSent) == 1); // the reject noise
    CHECK(count_events(run.log(), EventType::Recorded) == 1);  // no duplicate record
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(v.exactly_once_ok);
    CHECK(diagnose_failure_events(run.log()).kind == FailureKind::None);
}

TEST_CASE("forged noise on the ack slot causes a parity-deduplicated resend") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 2; // the second message keeps the receiver alive for the repeat
    g.msg_len = 1;
    g.seed = 13;
    MultiAutomaton pi = generate_protocol(g);
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);

    ScriptedAdversary adv;
    // the receiver acks with silence in slot 3 of round 1 (lane 1); forge noise
    forge_noise(adv.script, 1 + 3 * p1.word_len, p1.word_len, 1);

    ProtocolRun run(pi, pi.derived_topology(), sys, 31);
    run.sim().set_adversary(&adv, 100000);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    CHECK(run.sim().trace().rounds >= 3);                      // one extra for the repeat
    CHECK(count_events(run.log(), EventType::Recorded) == 2);  // no double record
    auto chunks = events_of(run.log(), EventType::WordSent);
    size_t chunk_words = 0;
    for (auto* e : chunks)
        if (PayloadKind(e->info) == PayloadKind::MessageChunk) ++chunk_words;
    CHECK(chunk_words == 3); // two messages plus one deduplicated repeat
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(v.exactly_once_ok);
    CHECK(outputs_match(run, oracle_run(pi)));
}

TEST_CASE("forged ack noise on the final message ends via termination silence") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 1;
    g.msg_len = 1;
    g.seed = 13;
    MultiAutomaton pi = generate_protocol(g);
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);

    ScriptedAdversary adv;
    forge_noise(adv.script, 1 + 3 * p1.word_len, p1.word_len, 1);

    ProtocolRun run(pi, pi.derived_topology(), sys, 31);
    run.sim().set_adversary(&adv, 100000);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    // the message was recorded in round 1; the retry meets a terminated
    // receiver and returns on slot-2 silence
    CHECK(count_events(run.log(), EventType::Recorded) == 1);
    auto returned = events_of(run.log(), EventType::SendReturned);
    REQUIRE(returned.size() == 1);
    CHECK(ReturnReason(returned[0]->info) == ReturnReason::PartnerSilent);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
}

TEST_CASE("replace path: a resent chunk grown to the new chunk size") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 1;
    g.msg_len = 20; // chunk 1 = 14 bits at r=1; the retry at r=2 carries 16
    g.seed = 14;
    MultiAutomaton pi = generate_protocol(g);
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);
    REQUIRE(round_params(sys, 2).key_len > p1.key_len);

    ScriptedAdversary adv;
    forge_noise(adv.script, 1 + 3 * p1.word_len, p1.word_len, 1);

    ProtocolRun run(pi, pi.derived_topology(), sys, 41);
    run.sim().set_adversary(&adv, 100000);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    auto recs = events_of(run.log(), EventType::Recorded);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0]->msg.size() == 20);
    // the recorded message is exactly the flooded one
    BitString sent;
    for (const auto& e : run.log().events)
        if (e.type == EventType::SendStarted) sent = e.msg;
    CHECK(recs[0]->msg == sent);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
}

TEST_CASE("a forged key request elicits a key reply and reject noise") {
    GeneratorSpec g;
    g.kind = "pipeline";
    g.n = 3;
    g.count = 1;
    g.msg_len = 40;
    g.seed = 15;
    MultiAutomaton pi = generate_protocol(g);
    SystemParams sys(3, 0.1);
    RoundParams p1 = round_params(sys, 1);

    Topology topo = pi.derived_topology();
    LaneMap lm(topo);
    uint32_t lane = lm.forward_lane(2, 1); // node 2 never actually sends to 1

    // fabricate a decodable key request on the silent lane during round 1 slot 0
    Rng arng(99);
    BitString fake = encode_word(Payload::key_request(arng.random_bits(p1.key_len)), p1, arng);
    ScriptedAdversary adv;
    int line = 0;
    for (size_t i = 0; i < fake.size(); ++i) {
        if (fake.get(i) != line) {
            adv.script.push_back({1 + i, lane, AdversaryAction::Kind::Flip, 0});
            line = fake.get(i);
        }
    }

    ProtocolRun run(pi, topo, sys, 51);
    run.sim().set_adversary(&adv, 100000);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    // Case-1 shape: node 1 replied with a key on the channel node 2 initiates,
    // then rejected the unauthenticated follow-up with noise
    bool replied = false, noised = false;
    for (const auto& e : run.log().events) {
        if (e.node == 1 && e.initiator == 2 && e.type == EventType::WordSent &&
            PayloadKind(e.info) == PayloadKind::KeyReply && e.round == 1)
            replied = true;
        if (e.node == 1 && e.initiator == 2 && e.type == EventType::NoiseSent && e.round == 1)
            noised = true;
    }
    CHECK(replied);
    CHECK(noised);

    // the pipeline itself is unharmed
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(outputs_match(run, oracle_run(pi)));
    // and the fabricated request is not classified as a protocol failure
    CHECK(diagnose_failure_events(run.log()).kind == FailureKind::None);
}

TEST_CASE("simultaneous records apply in ascending neighbor order") {
    const char* text =
        "node 0\n"
        "  state S0 initial\n"
        "  state S1 terminal\n"
        "  S0 --out(2, 1)--> S1\n"
        "end\n"
        "node 1\n"
        "  state S0 initial\n"
        "  state S1 terminal\n"
        "  S0 --out(2, 0)--> S1\n"
        "end\n"
        "node 2\n"
        "  state W initial\n"
        "  state W0\n"
        "  state W1\n"
        "  state DONE terminal output=11\n"
        "  W --in(0, 1)--> W0\n"
        "  W --in(1, 0)--> W1\n"
        "  W0 --in(1, 0)--> DONE\n"
        "  W1 --in(0, 1)--> DONE\n"
        "end\n";
    MultiAutomaton pi = automaton_text::parse(text);
    Topology topo = pi.derived_topology();
    ProtocolRun run(pi, topo, SystemParams(3, 0.1), 61);
    auto res = run.run(10000000);
    REQUIRE(res.completed);

    // both leaves deliver in round 1; the center consumes 0 before 1
    auto inputs = events_of(run.log(), EventType::InputApplied);
    REQUIRE(inputs.size() == 2);
    CHECK(inputs[0]->peer == 0);
    CHECK(inputs[1]->peer == 1);
    CHECK(inputs[0]->round == 1);
    CHECK(inputs[1]->round == 1);

    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    // either delivery order is a valid asynchronous run with the same outputs
    auto o1 = oracle_run(pi, OraclePolicy::RoundRobin);
    auto o2 = oracle_run(pi, OraclePolicy::Random, 17);
    REQUIRE(o1.outputs[2].has_value());
    REQUIRE(o2.outputs[2].has_value());
    CHECK(*o1.outputs[2] == *o2.outputs[2]);
    CHECK(outputs_match(run, o1));
}

TEST_CASE("runs are deterministic in the seed") {
    GeneratorSpec g;
    g.kind = "pingpong";
    g.count = 2;
    g.msg_len = 3;
    g.seed = 77;
    MultiAutomaton pi = generate_protocol(g);
    auto fingerprint = [&](uint64_t seed) {
        ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), seed);
        run.run(10000000);
        uint64_t h = run.sim().trace().last_step;
        for (const auto& e : run.log().events)
            h = h * 1099511628211ull + (uint64_t(e.type) ^ e.step ^ e.msg.hash());
        return h;
    };
    CHECK(fingerprint(123) == fingerprint(123));
    CHECK(fingerprint(123) != fingerprint(124));
}

TEST_CASE("automaton text round-trips through the parser") {
    GeneratorSpec g;
    g.kind = "broadcast_tree";
    g.n = 5;
    g.count = 2;
    g.msg_len = 4;
    g.seed = 19;
    MultiAutomaton pi = generate_protocol(g);
    std::string text = automaton_text::print(pi);
    MultiAutomaton back = automaton_text::parse(text);
    CHECK(automaton_text::print(back) == text);
    // still runs identically
    ProtocolRun run(back, back.derived_topology(), SystemParams(5, 0.1), 71);
    auto res = run.run(10000000);
    REQUIRE(res.completed);
    CHECK(validate_run(run, false).pass);
    CHECK(outputs_match(run, oracle_run(back)));
}

TEST_CASE("parser rejects malformed automata") {
    CHECK_THROWS(automaton_text::parse("node 0\n  state A initial\n")); // no end
    CHECK_THROWS(automaton_text::parse("state A initial\nend\n"));
    CHECK_THROWS(automaton_text::parse(
        "node 0\n  state A initial\n  state A\nend\n")); // duplicate state
    CHECK_THROWS(automaton_text::parse(
        "node 0\n  state A initial\n  A --out(1, )--> A\nend\n")); // empty message
    CHECK_THROWS(automaton_text::parse(
        "node 0\n  state A\nend\n")); // no initial
    // prefix-free violation across two outputs on the same directed pair
    const char* bad =
        "node 0\n"
        "  state A initial\n"
        "  state B\n"
        "  state C terminal\n"
        "  A --out(1, 1)--> B\n"
        "  B --out(1, 10)--> C\n"
        "end\n"
        "node 1\n"
        "  state R initial terminal\n"
        "end\n";
    MultiAutomaton pi = automaton_text::parse(bad);
    CHECK_THROWS(validate_protocol(pi, pi.derived_topology()));
}

TEST_CASE("token ring and pipeline families complete under validation") {
    for (auto kind : {"token_ring", "pipeline"}) {
        GeneratorSpec g;
        g.kind = kind;
        g.n = 4;
        g.count = 2;
        g.msg_len = 2;
        g.seed = 23;
        MultiAutomaton pi = generate_protocol(g);
        ProtocolRun run(pi, pi.derived_topology(), SystemParams(4, 0.1), 81);
        auto res = run.run(20000000);
        REQUIRE(res.completed);
        Verdict v = validate_run(run, false);
        CHECK(v.pass);
        CHECK(outputs_match(run, oracle_run(pi)));
    }
}

TEST_CASE("validator flags fabricated violations") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 2;
    g.msg_len = 1;
    g.seed = 29;
    MultiAutomaton pi = generate_protocol(g);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 91);
    run.run(10000000);
    REQUIRE(validate_run(run, false).pass);

    // a spurious record that matches no send
    {
        Event& e = run.log().push(EventType::Recorded);
        e.node = 1;
        e.peer = 0;
        e.initiator = 0;
        e.round = 5;
        e.msg = BitString::from_string("1");
    }
    Verdict v = validate_run(run, false);
    CHECK_FALSE(v.pass);
    CHECK_FALSE(v.exactly_once_ok);
    CHECK(v.first_violation == FailureKind::FifoViolation);
}

TEST_CASE("both channels of a pair can run rounds simultaneously") {
    const char* text =
        "node 0\n"
        "  state S0 initial\n"
        "  state S1\n"
        "  state S2 terminal output=1\n"
        "  S0 --out(1, 1)--> S1\n"
        "  S1 --in(1, 0)--> S2\n"
        "end\n"
        "node 1\n"
        "  state T0 initial\n"
        "  state T1\n"
        "  state T2 terminal output=0\n"
        "  T0 --out(0, 0)--> T1\n"
        "  T1 --in(0, 1)--> T2\n"
        "end\n";
    MultiAutomaton pi = automaton_text::parse(text);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 111);
    auto res = run.run(1000000);
    REQUIRE(res.completed);
    // both messages land in round 1, one per initiating channel
    CHECK(run.sim().trace().rounds == 1);
    CHECK(count_events(run.log(), EventType::Recorded) == 2);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(outputs_match(run, oracle_run(pi)));
}

TEST_CASE("a protocol with no messages halts immediately") {
    const char* text =
        "node 0\n  state A initial terminal output=1\nend\n"
        "node 1\n  state B initial terminal\nend\n";
    MultiAutomaton pi = automaton_text::parse(text);
    ProtocolRun run(pi, Topology::from_edges(2, {{0, 1}}), SystemParams(2, 0.1), 3);
    auto res = run.run(1000);
    REQUIRE(res.completed);
    CHECK(res.steps == 0);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    RunMetrics m = measure(run, v, diagnose_failure_events(run.log()));
    CHECK(m.L == 0);
    CHECK(m.L_prime == 0);
    CHECK(m.success);
}

TEST_CASE("truncated runs are failures, not successes") {
    GeneratorSpec g;
    g.kind = "flood";
    g.count = 4;
    g.msg_len = 1;
    g.seed = 31;
    MultiAutomaton pi = generate_protocol(g);
    ProtocolRun run(pi, pi.derived_topology(), SystemParams(2, 0.1), 101);
    auto res = run.run(100); // far too few steps
    CHECK_FALSE(res.completed);
    CHECK(run.sim().trace().truncated);
    Verdict v = validate_run(run, run.sim().trace().truncated);
    CHECK_FALSE(v.pass);
    CHECK(v.first_violation == FailureKind::Truncated);
}
