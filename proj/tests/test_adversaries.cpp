#include "doctest.h"

#include <hardwire/adversaries.hpp>
#include <hardwire/experiment.hpp>

#include <cmath>
#include <set>

using namespace hardwire;

namespace {

ExperimentConfig base_config(const char* kind, uint64_t budget, unsigned count = 20) {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.delta = 0.1;
    cfg.delta_text = "0.1";
    cfg.pi = "flood";
    cfg.gen.count = count;
    cfg.gen.msg_len = 1;
    cfg.gen.seed = 5;
    cfg.adversary.kind = kind;
    cfg.adversary.budget = budget;
    cfg.adversary.seed = 3;
    cfg.seeds = {1};
    cfg.threads = 1;
    return cfg;
}

uint64_t run_fingerprint(const ExperimentConfig& cfg) {
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    Topology topo = build_topology(cfg, pi);
    AdversarySpec aspec = cfg.adversary;
    aspec.horizon_steps = 100000;
    auto adv = make_adversary(aspec, sys);
    ProtocolRun run(pi, topo, sys, cfg.seeds[0]);
    if (adv) run.sim().set_adversary(adv.get(), aspec.budget);
    run.run(50000000);
    uint64_t h = run.sim().trace().budget_spent * 1000003 + run.sim().trace().last_step;
    for (const auto& a : run.sim().trace().adversary_log)
        h = h * 1099511628211ull + a.action.step * 3 + a.action.lane + (a.accepted ? 7 : 11);
    for (const auto& e : run.log().events) h = h * 31 + uint64_t(e.type) + e.step;
    return h;
}

} // namespace

TEST_CASE("budget zero is a no-adversary run") {
    auto with = base_config("uniform_random", 0);
    auto without = base_config("none", 0);
    CHECK(run_fingerprint(with) == run_fingerprint(without));
    // the factory collapses budget-0 strategies to no adversary at all
    CHECK(make_adversary(with.adversary, SystemParams(2, 0.1)) == nullptr);
}

TEST_CASE("uniform_random spends exactly its budget inside the horizon") {
    ExperimentConfig cfg = base_config("uniform_random", 150, 50);
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    AdversarySpec aspec = cfg.adversary;
    aspec.horizon_steps = 50000; // well inside the run
    auto adv = make_adversary(aspec, sys);
    ProtocolRun run(pi, pi.derived_topology(), sys, 1);
    run.sim().set_adversary(adv.get(), aspec.budget);
    auto res = run.run(50000000);
    REQUIRE(res.completed);
    CHECK(run.sim().trace().budget_spent == 150);
    // scattered flips are absorbed: the run still validates
    CHECK(validate_run(run, false).pass);
}

TEST_CASE("strategies are reproducible from (spec, seed)") {
    for (const char* kind : {"uniform_random", "burst", "word_corruptor", "silence_forger",
                             "key_guesser", "feedback_jammer"}) {
        auto cfg = base_config(kind, 4000, 10); // enough for every kind to act
        CAPTURE(kind);
        CHECK(run_fingerprint(cfg) == run_fingerprint(cfg));
        auto other = cfg;
        other.adversary.seed = 4;
        if (std::string(kind) != "word_corruptor" && std::string(kind) != "feedback_jammer") {
            // seed changes move the attack pattern for the randomized kinds
            CHECK(run_fingerprint(cfg) != run_fingerprint(other));
        }
    }
}

TEST_CASE("word corruptor forces one extra round per affordable word") {
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);
    const uint64_t one_word = coded_region_len(PayloadKind::MessageChunk, p1) / 3 + 1;

    // budget for exactly one corrupted chunk word
    auto cfg = base_config("word_corruptor", one_word, 5);
    SystemParams sp = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    ProtocolRun run(pi, pi.derived_topology(), sp, 9);
    AdversarySpec aspec = cfg.adversary;
    auto adv = make_adversary(aspec, sp);
    run.sim().set_adversary(adv.get(), aspec.budget);
    auto res = run.run(50000000);
    REQUIRE(res.completed);
    CHECK(run.sim().trace().rounds >= 6); // 5 messages + at least one retry
    Verdict v = validate_run(run, false);
    CHECK(v.pass);

    // below one word's cost the strategy cannot afford any attack
    auto cheap = base_config("word_corruptor", one_word - 1, 5);
    MultiAutomaton pi2 = build_protocol(cheap);
    ProtocolRun run2(pi2, pi2.derived_topology(), sp, 9);
    AdversarySpec aspec2 = cheap.adversary;
    auto adv2 = make_adversary(aspec2, sp);
    run2.sim().set_adversary(adv2.get(), aspec2.budget);
    auto res2 = run2.run(50000000);
    REQUIRE(res2.completed);
    CHECK(run2.sim().trace().rounds == 5); // all rounds progressive
    CHECK(run2.sim().trace().budget_spent == 0);
    CHECK(validate_run(run2, false).pass);
}

TEST_CASE("silence forger patterns stay at the uniform-noise rate") {
    // codec-level Monte-Carlo: noise xor a fixed oblivious pattern is still
    // uniform, so the silence rate keeps the e^(-b/19) bound
    Rng rng(8);
    for (auto [len, bound] : {std::pair<size_t, double>{95, std::exp(-5.0)},
                              {228, std::exp(-12.0)}}) {
        BitString pattern = rng.random_bits(len); // the forger's fixed mask
        const int trials = 100000;
        int silent = 0;
        for (int i = 0; i < trials; ++i) {
            BitString w = rng.random_bits(len);
            w ^= pattern;
            if (is_silence(w)) ++silent;
        }
        double sigma = std::sqrt(bound * (1 - bound) / trials);
        CHECK(double(silent) / trials <= bound + 3 * sigma);
    }
}

TEST_CASE("silence forger never converts a real noise word in-sim") {
    auto cfg = base_config("silence_forger", 5000, 8);
    // force reject noise every round so there are words to attack:
    // corrupt chunk words too? no - pair it with scripted chunk corruption is
    // overkill; instead check that with only the forger, runs stay clean and
    // no sender ever concludes delivery from forged silence
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    ProtocolRun run(pi, pi.derived_topology(), sys, 13);
    AdversarySpec aspec = cfg.adversary;
    auto adv = make_adversary(aspec, sys);
    run.sim().set_adversary(adv.get(), aspec.budget);
    auto res = run.run(50000000);
    REQUIRE(res.completed);
    Verdict v = validate_run(run, false);
    CHECK(v.pass);
    CHECK(diagnose_failure_events(run.log()).kind == FailureKind::None);
}

TEST_CASE("key guesser acceptance rate is the key-guessing probability") {
    // direct Monte-Carlo of the slot-2 injection: forged chunks keyed with a
    // uniform guess against a receiver holding a fresh k_B
    SystemParams sys(2, 0.1);
    RoundParams p1 = round_params(sys, 1);
    Rng rng(21);
    const int trials = 200000;
    int accepted = 0;
    BitString k_b = rng.random_bits(p1.key_len);
    for (int i = 0; i < trials; ++i) {
        Payload forged = Payload::message_chunk(rng.random_bits(1), rng.next_bit() != 0,
                                                rng.random_bits(p1.key_len));
        BitString w = encode_word(forged, p1, rng);
        auto dec = decode_word(w, p1, PayloadKind::MessageChunk);
        REQUIRE(dec.has_value()); // well-formed word decodes
        if (dec->key == k_b) ++accepted;
    }
    double p = std::pow(2.0, -double(p1.key_len));
    double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(double(accepted) / trials <= p + 3 * sigma);
}

TEST_CASE("key guesser elicits the case-1 trace shape in a live run") {
    // node 2 never sends to node 1, so that channel is silent and forgeable
    ExperimentConfig cfg;
    cfg.n = 3;
    cfg.delta = 0.1;
    cfg.delta_text = "0.1";
    cfg.pi = "pipeline";
    cfg.gen.count = 1;
    cfg.gen.msg_len = 40;
    cfg.gen.seed = 15;
    cfg.adversary.kind = "key_guesser";
    cfg.adversary.budget = 100000;
    cfg.adversary.seed = 2;
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    ProtocolRun run(pi, pi.derived_topology(), sys, 17);
    AdversarySpec aspec = cfg.adversary;
    auto adv = make_adversary(aspec, sys);
    run.sim().set_adversary(adv.get(), aspec.budget);
    auto res = run.run(50000000);
    REQUIRE(res.completed);

    // Case-1 shape: some node answered a key request on a channel whose
    // initiating endpoint never had a send call, then rejected the forged
    // follow-up chunk with noise
    std::set<std::pair<int, int>> channels_with_sends;
    for (const auto& e : run.log().events)
        if (e.type == EventType::SendStarted) channels_with_sends.insert({e.node, e.peer});
    bool forged_reply = false, reject_noise = false;
    for (const auto& e : run.log().events) {
        if (e.type == EventType::WordSent && PayloadKind(e.info) == PayloadKind::KeyReply &&
            !channels_with_sends.count({e.initiator, e.node}))
            forged_reply = true;
        if (e.type == EventType::NoiseSent && !channels_with_sends.count({e.initiator, e.node}))
            reject_noise = true;
    }
    CHECK(forged_reply);
    CHECK(reject_noise);
    CHECK(validate_run(run, false).pass);
    CHECK(diagnose_failure_events(run.log()).kind == FailureKind::None);
}

TEST_CASE("feedback jammer: corrupted reply silences the sender for the round") {
    // jam only round 1's key reply and watch the retry
    SystemParams sys(2, 0.1);
    auto cfg = base_config("feedback_jammer", 0, 1);
    MultiAutomaton pi = build_protocol(cfg);

    AdversarySpec aspec;
    aspec.kind = "feedback_jammer";
    aspec.seed = 1;
    RoundParams p1 = round_params(sys, 1);
    aspec.budget = coded_region_len(PayloadKind::KeyReply, p1) / 3 + 1; // exactly one kill
    auto adv = make_adversary(aspec, sys);

    ProtocolRun run(pi, pi.derived_topology(), sys, 23);
    run.sim().set_adversary(adv.get(), aspec.budget);
    auto res = run.run(50000000);
    REQUIRE(res.completed);
    CHECK(run.sim().trace().rounds >= 2); // round 1 lost, message lands later
    size_t chunks = 0;
    for (const auto& e : run.log().events) {
        if (e.type == EventType::WordSent && PayloadKind(e.info) == PayloadKind::MessageChunk) {
            ++chunks;
            CHECK(e.round >= 2); // no chunk in the jammed round: Case 3
        }
    }
    CHECK(chunks == 1);
    CHECK(validate_run(run, false).pass);
}

TEST_CASE("feedback jammer cost stays linear in budget") {
    std::vector<uint64_t> budgets = {0, 2000, 6000};
    std::vector<double> lprime;
    for (uint64_t T : budgets) {
        auto cfg = base_config("feedback_jammer", T, 40);
        cfg.seeds = {1, 2, 3};
        auto res = run_experiment(cfg);
        double mean = 0;
        for (auto& m : res.rows) {
            CHECK(m.success);
            mean += double(m.L_prime);
        }
        lprime.push_back(mean / double(res.rows.size()));
    }
    for (size_t i = 1; i < budgets.size(); ++i) {
        if (lprime[i] <= lprime[0]) continue;
        double slope = (lprime[i] - lprime[0]) / double(budgets[i]);
        CHECK(slope <= 500.0);
    }
}
