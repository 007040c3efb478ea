#pragma once

// Acceptance suite: ten named criteria with pinned thresholds, runnable one
// at a time (`hardwire accept N`) or together. Each returns a pass/fail line.
//
// Criterion 3 deserves a note up front: it demands recovery from any
// adversarially chosen floor(|c|/3) bit flips with zero failures. Unique
// decoding of e errors needs pairwise distance 2e+1, and by the Plotkin bound
// a binary code with distance > 2N/3 has at most two codewords, so no code
// with more than one message bit can satisfy the criterion as stated. The
// trial set below includes the symbol-spread and uniform placements that
// defeat every possible code at this radius; the criterion therefore reports
// its honest result instead of testing a weaker claim. Patterns confined to
// the code's 40%-of-symbols budget — including full floor(|c|/3)-bit bursts —
// are recovered, and are covered by the unit suite.

#include <chrono>
#include <cstdio>
#include <set>

#include "experiment.hpp"

namespace hardwire::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

inline double binom_sigma(double p, double trials) { return std::sqrt(p * (1 - p) / trials); }

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

// 1. Codec round-trip across rounds, users and failure budgets.
inline CriterionResult criterion1() {
    CriterionResult r{1, "codec round-trip", true, "", 0};
    Rng rng(0xC0DEC);
    size_t cases = 0, failures = 0;
    const PayloadKind kinds[4] = {PayloadKind::KeyRequest, PayloadKind::KeyReply,
                                  PayloadKind::MessageChunk, PayloadKind::Raw};
    for (unsigned n : {2u, 8u})
        for (double delta : {0.1, 0.01}) {
            SystemParams sys(n, delta);
            for (uint64_t round = 1; round <= 64; ++round) {
                RoundParams p = round_params(sys, round);
                for (int i = 0; i < 4; ++i) {
                    PayloadKind kind = kinds[(round + i) % 4];
                    Payload pl;
                    switch (kind) {
                        case PayloadKind::KeyRequest:
                            pl = Payload::key_request(rng.random_bits(p.key_len));
                            break;
                        case PayloadKind::KeyReply:
                            pl = Payload::key_reply(rng.random_bits(p.key_len),
                                                    rng.random_bits(p.key_len));
                            break;
                        case PayloadKind::MessageChunk:
                            pl = Payload::message_chunk(
                                rng.random_bits(1 + rng.next_below(p.key_len)),
                                rng.next_bit() != 0, rng.random_bits(p.key_len));
                            break;
                        case PayloadKind::Raw:
                            pl = Payload::raw(rng.random_bits(p.key_len));
                            break;
                    }
                    ++cases;
                    BitString w = encode_word(pl, p, rng);
                    auto back = decode_word(w, p, kind);
                    if (!back || !(*back == pl) || w.size() != p.word_len) ++failures;
                }
            }
        }
    r.pass = failures == 0 && cases >= 1000;
    r.detail = std::to_string(cases) + " payloads, " + std::to_string(failures) + " failures";
    return r;
}

// 2. AMD oblivious-offset detection bound at eta in {1/4, 1/16}.
inline CriterionResult criterion2() {
    CriterionResult r{2, "amd detection bound", true, "", 0};
    Rng rng(0xA3D);
    const int trials = 200000;
    for (double eta : {0.25, 0.0625}) {
        AmdStrength s(eta);
        int fooled = 0;
        BitString m = rng.random_bits(48);
        for (int i = 0; i < trials; ++i) {
            BitString c = amd_encode(m, s, rng);
            BitString offset = rng.random_bits(c.size());
            if (offset.count_ones() == 0) continue;
            c ^= offset;
            if (amd_is_codeword(c, s)) ++fooled;
        }
        double rate = double(fooled) / trials;
        double bound = eta + 3 * detail::binom_sigma(eta, trials);
        if (rate > bound) r.pass = false;
        r.detail += "eta=" + detail::fmt(eta) + ": rate " + detail::fmt(rate) + " vs bound " +
                    detail::fmt(bound) + "; ";
    }
    return r;
}

// 3. ECC tolerance at floor(|c|/3) adversarially placed bit flips.
inline CriterionResult criterion3() {
    CriterionResult r{3, "ecc third-of-bits tolerance", true, "", 0};
    Rng rng(0xECC);
    const size_t sizes[] = {8, 24, 55, 104, 168, 264};
    size_t failures = 0, trials_total = 0;
    std::string per_class;
    size_t class_fail[3] = {0, 0, 0}; // uniform, burst, symbol-spread
    for (size_t nbits : sizes) {
        for (int trial = 0; trial < 1000; ++trial) {
            BitString m = rng.random_bits(nbits);
            BitString c = ec_encode(m);
            const size_t budget = c.size() / 3;
            BitString w = c;
            int cls = trial % 3;
            if (cls == 0) {
                // uniformly random distinct positions
                std::set<size_t> pos;
                while (pos.size() < budget) pos.insert(rng.next_below(c.size()));
                for (size_t p : pos) w.set(p, 1 - w.get(p));
            } else if (cls == 1) {
                // contiguous burst at a random start, wrapping
                size_t start = rng.next_below(c.size());
                for (size_t i = 0; i < budget; ++i) {
                    size_t p = (start + i) % c.size();
                    w.set(p, 1 - w.get(p));
                }
            } else {
                // one bit per symbol, pass after pass
                const size_t k = (nbits + 7) / 8;
                const size_t syms = 5 * k;
                size_t placed = 0;
                for (unsigned pass = 0; pass < 8 && placed < budget; ++pass)
                    for (size_t s = 0; s < syms && placed < budget; ++s) {
                        size_t p;
                        if (s < k) {
                            p = 8 * s + pass;
                            if (p >= nbits) continue;
                        } else {
                            p = nbits + 8 * (s - k) + pass;
                        }
                        w.set(p, 1 - w.get(p));
                        ++placed;
                    }
            }
            ++trials_total;
            auto back = ec_decode(w);
            if (!back || !(*back == m)) {
                ++failures;
                ++class_fail[cls];
            }
        }
    }
    r.pass = failures == 0;
    r.detail = std::to_string(trials_total) + " trials, " + std::to_string(failures) +
               " failures (uniform " + std::to_string(class_fail[0]) + ", burst " +
               std::to_string(class_fail[1]) + ", symbol-spread " +
               std::to_string(class_fail[2]) + ")";
    if (!r.pass)
        r.detail += "; unattainable as stated: unique decoding at radius N/3 implies <= 2 "
                    "codewords (Plotkin); patterns within the code's 40%-symbol budget "
                    "(incl. bursts at in-protocol sizes) are recovered, see unit suite";
    return r;
}

// 4. Anti-silence of uniform random strings at b = 95.
inline CriterionResult criterion4() {
    CriterionResult r{4, "anti-silence rate", true, "", 0};
    Rng rng(0x51);
    const int trials = 100000;
    int silent = 0;
    for (int i = 0; i < trials; ++i)
        if (is_silence(rng.random_bits(95))) ++silent;
    double rate = double(silent) / trials;
    double bound = std::exp(-5.0) + 3 * detail::binom_sigma(std::exp(-5.0), trials);
    r.pass = rate <= bound;
    r.detail = "rate " + detail::fmt(rate) + " vs bound " + detail::fmt(bound);
    return r;
}

// 5 + 9. End-to-end ensemble and the exactly-once delivery bookkeeping.
struct EnsembleOutcome {
    bool pass5 = true;
    bool pass9 = true;
    std::string detail5, detail9;
};

inline EnsembleOutcome run_ensemble(unsigned threads, bool progress) {
    EnsembleOutcome out;
    const unsigned ns[] = {2, 4, 8};
    const unsigned Ls[] = {100, 1000};
    const char* kinds[] = {"uniform_random", "word_corruptor", "feedback_jammer",
                           "key_guesser", "silence_forger"};
    const uint64_t budgets[] = {0, 100, 1000};
    double worst_rate = 1.0;
    std::string worst_cell = "-";
    size_t cells = 0, cell_fail = 0, runs_total = 0;
    size_t exactly_once_violations = 0, failure_event_runs = 0;

    for (unsigned n : ns)
        for (unsigned L : Ls)
            for (const char* kind : kinds)
                for (uint64_t T : budgets) {
                    ExperimentConfig cfg;
                    cfg.n = n;
                    cfg.delta = 0.1;
                    cfg.delta_text = "0.1";
                    cfg.pi = n == 2 ? "flood" : "pipeline";
                    cfg.gen.msg_len = 1;
                    cfg.gen.count = n == 2 ? L : (L + n - 2) / (n - 1);
                    cfg.gen.seed = 1000 + n * 10 + L;
                    cfg.adversary.kind = kind;
                    cfg.adversary.budget = T;
                    cfg.adversary.seed = 7 * n + T;
                    cfg.seeds.clear();
                    for (uint64_t s = 1; s <= 200; ++s) cfg.seeds.push_back(s);
                    cfg.threads = threads;
                    auto res = run_experiment(cfg);
                    ++cells;
                    runs_total += res.rows.size();
                    double rate = res.agg.success_rate;
                    bool ok = T == 0 ? (rate == 1.0) : (rate >= 1.0 - cfg.delta);
                    if (!ok) ++cell_fail;
                    if (rate < worst_rate) {
                        worst_rate = rate;
                        worst_cell = "n=" + std::to_string(n) + ",L=" + std::to_string(L) +
                                     "," + kind + ",T=" + std::to_string(T);
                    }
                    if (!res.exactly_once_all) ++exactly_once_violations;
                    failure_event_runs += res.failure_event_runs;
                    if (progress)
                        std::fprintf(stderr,
                                     "  cell n=%u L=%u %s T=%llu: pass %.3f (%zu/200)\n", n, L,
                                     kind, (unsigned long long)T, rate,
                                     size_t(rate * res.rows.size() + 0.5));
                }

    out.pass5 = cell_fail == 0;
    out.detail5 = std::to_string(cells) + " cells x 200 runs (" + std::to_string(runs_total) +
                  " runs), " + std::to_string(cell_fail) + " cells under threshold; worst " +
                  detail::fmt(worst_rate) + " at " + worst_cell;
    out.pass9 = exactly_once_violations == 0;
    out.detail9 = std::to_string(exactly_once_violations) +
                  " exactly-once violations among runs without a diagnosed failure event (" +
                  std::to_string(failure_event_runs) + " runs had one)";
    return out;
}

// 6. Cost scaling in L at T=0, alpha=1.
inline CriterionResult criterion6(unsigned threads) {
    CriterionResult r{6, "cost scaling in L", true, "", 0};
    std::vector<RunMetrics> rows;
    for (unsigned L : {16u, 64u, 256u, 1024u, 4096u}) {
        ExperimentConfig cfg;
        cfg.n = 2;
        cfg.delta = 0.1;
        cfg.delta_text = "0.1";
        cfg.pi = "flood";
        cfg.gen.count = L;
        cfg.gen.msg_len = 1;
        cfg.gen.seed = 40 + L;
        cfg.seeds = {1, 2, 3};
        cfg.threads = threads;
        auto res = run_experiment(cfg);
        for (auto& m : res.rows) {
            if (!m.success) r.pass = false;
            rows.push_back(m);
        }
    }
    FitResult fit = fit_overhead(rows, 2, 0.1, false);
    if (fit.max_residual_ratio > 3.0) r.pass = false;
    r.detail = "fit C=" + detail::fmt(fit.C) + ", max residual ratio " +
               detail::fmt(fit.max_residual_ratio) + " (limit 3)";
    return r;
}

// 7. Cost scaling in T under the word corruptor, pinned C' = 500.
inline CriterionResult criterion7(unsigned threads) {
    CriterionResult r{7, "cost scaling in T", true, "", 0};
    const double c_prime = 500.0;
    double base = 0.0;
    std::string pts;
    for (uint64_t T : {0ull, 1000ull, 2000ull, 5000ull, 10000ull}) {
        ExperimentConfig cfg;
        cfg.n = 2;
        cfg.delta = 0.1;
        cfg.delta_text = "0.1";
        cfg.pi = "flood";
        cfg.gen.count = 1000;
        cfg.gen.msg_len = 1;
        cfg.gen.seed = 55;
        cfg.adversary.kind = "word_corruptor";
        cfg.adversary.budget = T;
        cfg.adversary.seed = 5;
        cfg.seeds = {1, 2, 3};
        cfg.threads = threads;
        auto res = run_experiment(cfg);
        double mean = 0;
        for (auto& m : res.rows) {
            if (!m.success) r.pass = false;
            mean += double(m.L_prime);
        }
        mean /= double(res.rows.size());
        if (T == 0) {
            base = mean;
        } else {
            double slope = (mean - base) / double(T);
            if (mean > base && slope > c_prime) r.pass = false;
            pts += "T=" + std::to_string(T) + ": dL'/T " + detail::fmt(slope) + "; ";
        }
    }
    r.detail = pts + "limit " + detail::fmt(c_prime);
    return r;
}

// 8. Constant overhead when alpha dominates the log term.
inline CriterionResult criterion8(unsigned threads) {
    CriterionResult r{8, "alpha scaling", true, "", 0};
    // msg_len 32 >= log2(n L / delta) across the sweep (max ~21)
    double min_oh = 1e18, max_oh = 0;
    const double pinned_max = 2500.0, pinned_ratio = 4.0;
    for (unsigned count : {32u, 320u, 3200u}) { // L = 32 * count: 2 decades
        ExperimentConfig cfg;
        cfg.n = 2;
        cfg.delta = 0.1;
        cfg.delta_text = "0.1";
        cfg.pi = "flood";
        cfg.gen.count = count;
        cfg.gen.msg_len = 32;
        cfg.gen.seed = 70 + count;
        cfg.seeds = {1, 2};
        cfg.threads = threads;
        auto res = run_experiment(cfg);
        for (auto& m : res.rows) {
            if (!m.success) r.pass = false;
            min_oh = std::min(min_oh, m.overhead);
            max_oh = std::max(max_oh, m.overhead);
        }
    }
    if (max_oh > pinned_max || max_oh / min_oh > pinned_ratio) r.pass = false;
    r.detail = "overhead in [" + detail::fmt(min_oh) + ", " + detail::fmt(max_oh) +
               "], limits: max " + detail::fmt(pinned_max) + ", spread " +
               detail::fmt(pinned_ratio) + "x";
    return r;
}

// 10. Schedule law: recurrence exact, ratio within documented constants.
inline CriterionResult criterion10() {
    CriterionResult r{10, "schedule law", true, "", 0};
    const double c1 = 500.0, c2 = 1300.0;
    double lo_seen = 1e18, hi_seen = 0;
    for (unsigned n : {2u, 4u, 8u})
        for (double delta : {0.1, 0.01}) {
            SystemParams sys(n, delta);
            Schedule sched(sys);
            uint64_t tau_check = 1;
            for (uint64_t round = 1; round <= 10000; ++round) {
                if (round > 1) tau_check += 4 * sched.params(round - 1).word_len;
                if (sched.tau(round) != tau_check) {
                    r.pass = false;
                    r.detail = "recurrence broken at r=" + std::to_string(round);
                    return r;
                }
                if (round >= 2) {
                    double ratio = double(sched.tau(round)) /
                                   (double(round) * std::log2(double(n) * double(round) / delta));
                    lo_seen = std::min(lo_seen, ratio);
                    hi_seen = std::max(hi_seen, ratio);
                }
            }
        }
    if (lo_seen < c1 || hi_seen > c2) r.pass = false;
    r.detail = "tau(r)/(r log2(nr/delta)) in [" + detail::fmt(lo_seen) + ", " +
               detail::fmt(hi_seen) + "], documented [" + detail::fmt(c1) + ", " +
               detail::fmt(c2) + "]";
    return r;
}

inline std::vector<CriterionResult> run_criteria(const std::vector<int>& which,
                                                 unsigned threads = 0, bool progress = false) {
    std::vector<CriterionResult> out;
    auto wants = [&](int id) {
        return which.empty() || std::find(which.begin(), which.end(), id) != which.end();
    };
    auto timed = [&](CriterionResult r, std::chrono::steady_clock::time_point t0) {
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    };
    using Clock = std::chrono::steady_clock;
    if (wants(1)) { auto t0 = Clock::now(); timed(criterion1(), t0); }
    if (wants(2)) { auto t0 = Clock::now(); timed(criterion2(), t0); }
    if (wants(3)) { auto t0 = Clock::now(); timed(criterion3(), t0); }
    if (wants(4)) { auto t0 = Clock::now(); timed(criterion4(), t0); }
    if (wants(5) || wants(9)) {
        auto t0 = Clock::now();
        EnsembleOutcome e = run_ensemble(threads, progress);
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (wants(5))
            out.push_back({5, "end-to-end correctness", e.pass5, e.detail5, secs});
        if (wants(9))
            out.push_back({9, "exactly-once delivery", e.pass9, e.detail9, wants(5) ? 0.0 : secs});
    }
    if (wants(6)) { auto t0 = Clock::now(); timed(criterion6(threads), t0); }
    if (wants(7)) { auto t0 = Clock::now(); timed(criterion7(threads), t0); }
    if (wants(8)) { auto t0 = Clock::now(); timed(criterion8(threads), t0); }
    if (wants(10)) { auto t0 = Clock::now(); timed(criterion10(), t0); }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

inline int print_results(const std::vector<CriterionResult>& results, std::FILE* f = stdout) {
    int failures = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failures;
        std::fprintf(f, "criterion %2d %-28s %s  (%s) [%.1fs]\n", r.id, r.name.c_str(),
                     r.pass ? "PASS" : "FAIL", r.detail.c_str(), r.seconds);
    }
    return failures;
}

} // namespace hardwire::acceptance
