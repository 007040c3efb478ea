// hardwire command line: run experiments, sweep cost curves, re-validate
// dumped traces, benchmark the word codec, and execute the acceptance
// criteria. See README.md for the config schema and output formats.

#include <CLI11.hpp>

#include <hardwire/acceptance.hpp>
#include <hardwire/report_json.hpp>
#include <hardwire/trace_io.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace hardwire;
namespace fs = std::filesystem;

namespace {

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& flag_override) {
    if (!flag_override.empty()) return flag_override;
    if (const char* env = std::getenv("HARDWIRE_OUT")) return env; // the one env override
    return cfg.out_dir;
}

void apply_flags(ExperimentConfig& cfg, uint64_t seed, unsigned nseeds, uint64_t max_steps,
                 bool keep_traces, const std::string& format, unsigned threads) {
    if (seed) cfg.seeds = {seed};
    if (nseeds) {
        cfg.seeds.clear();
        for (uint64_t s = 1; s <= nseeds; ++s) cfg.seeds.push_back(s);
    }
    if (max_steps) cfg.max_steps = max_steps;
    if (keep_traces) cfg.keep_traces = true;
    if (!format.empty()) cfg.format = format;
    if (threads) cfg.threads = threads;
}

int emit_reports(const ExperimentConfig& cfg, const ExperimentResult& res,
                 const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (cfg.format == "csv" || cfg.format == "both") {
        std::ofstream f(out_dir + "/runs.csv", std::ios::binary);
        write_csv(res.rows, f);
        std::cout << "wrote " << out_dir << "/runs.csv\n";
    }
    if (cfg.format == "json" || cfg.format == "both") {
        auto j = aggregate_json(cfg, res);
        std::ofstream f(out_dir + "/aggregate.json", std::ios::binary);
        f << j.dump(2) << "\n";
        std::cout << "wrote " << out_dir << "/aggregate.json\n";
    }
    std::cout << "runs " << res.agg.runs << ", pass " << res.agg.passes << " ("
              << res.agg.success_rate * 100 << "%), mean overhead " << res.agg.mean_overhead
              << ", mean epsilon " << res.agg.mean_epsilon << "\n";
    return res.agg.passes == res.agg.runs ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust-protocol simulator harness"};
    app.require_subcommand(1);

    std::string config_path, vary, trace_path, format, out_override, accept_arg = "all";
    uint64_t seed = 0, max_steps = 0;
    unsigned nseeds = 0, threads = 0;
    bool keep_traces = false, progress = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "run a single seed");
        cmd->add_option("--seeds", nseeds, "run seeds 1..N");
        cmd->add_option("--max-steps", max_steps, "override the step cap");
        cmd->add_flag("--keep-traces", keep_traces, "dump per-run binary traces");
        cmd->add_option("--format", format, "csv|json|both");
        cmd->add_option("--out", out_override, "output directory");
        cmd->add_option("--threads", threads, "worker threads (default: hardware)");
    };

    auto* run_cmd = app.add_subcommand("run", "execute one experiment config");
    run_cmd->add_option("config", config_path, "config file")->required();
    add_common(run_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "sweep L, T or alpha from a base config");
    sweep_cmd->add_option("config", config_path, "config file")->required();
    sweep_cmd->add_option("--vary", vary, "L|T|alpha")->required();
    add_common(sweep_cmd);

    auto* val_cmd = app.add_subcommand("validate", "re-validate a dumped trace");
    val_cmd->add_option("trace", trace_path, "trace file (.hwtr)")->required();

    auto* bench_cmd = app.add_subcommand("codec-bench", "word codec timing table");

    auto* accept_cmd = app.add_subcommand("accept", "run acceptance criteria");
    accept_cmd->add_option("which", accept_arg, "criterion number, preset file, or 'all'");
    accept_cmd->add_option("--threads", threads, "worker threads");
    accept_cmd->add_flag("--progress", progress, "print per-cell progress to stderr");

    auto* print_cmd = app.add_subcommand("pi-print", "print the generated protocol of a config");
    print_cmd->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            ExperimentConfig cfg = load_config(config_path);
            apply_flags(cfg, seed, nseeds, max_steps, keep_traces, format, threads);
            std::string out_dir = resolve_out_dir(cfg, out_override);
            std::string trace_dir;
            if (cfg.keep_traces) {
                trace_dir = out_dir + "/traces";
                fs::create_directories(trace_dir);
            }
            auto res = run_experiment(cfg, trace_dir);
            return emit_reports(cfg, res, out_dir);
        }

        if (*sweep_cmd) {
            ExperimentConfig base = load_config(config_path);
            apply_flags(base, seed, nseeds, max_steps, keep_traces, format, threads);
            std::string out_dir = resolve_out_dir(base, out_override);
            std::vector<RunMetrics> all;
            uint64_t next_id = 0;
            bool ok = true;
            auto collect = [&](ExperimentConfig cfg) {
                auto res = run_experiment(cfg);
                for (auto m : res.rows) {
                    m.run_id = next_id++;
                    ok = ok && m.success;
                    all.push_back(m);
                }
            };
            bool variable_alpha = false;
            if (vary == "L") {
                for (unsigned L : {16u, 64u, 256u, 1024u, 4096u}) {
                    ExperimentConfig cfg = base;
                    cfg.gen.count = std::max(1u, L / std::max(1u, cfg.gen.msg_len));
                    collect(cfg);
                }
                variable_alpha = base.gen.msg_len > 1 || base.gen.msg_len_max > 0;
            } else if (vary == "T") {
                uint64_t L = oracle_run(build_protocol(base)).total_bits();
                for (uint64_t f : {0ull, 1ull, 2ull, 5ull, 10ull}) {
                    ExperimentConfig cfg = base;
                    if (cfg.adversary.kind == "none") cfg.adversary.kind = "word_corruptor";
                    cfg.adversary.budget = f * L;
                    collect(cfg);
                }
            } else if (vary == "alpha") {
                uint64_t bits = uint64_t(base.gen.count) * std::max(1u, base.gen.msg_len);
                for (unsigned len : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
                    ExperimentConfig cfg = base;
                    cfg.gen.msg_len = len;
                    cfg.gen.msg_len_max = 0;
                    cfg.gen.count = std::max<unsigned>(1, unsigned(bits / len));
                    collect(cfg);
                }
                variable_alpha = true;
            } else {
                std::cerr << "--vary must be L, T or alpha\n";
                return 2;
            }
            fs::create_directories(out_dir);
            {
                std::ofstream f(out_dir + "/sweep.csv", std::ios::binary);
                write_csv(all, f);
                std::cout << "wrote " << out_dir << "/sweep.csv\n";
            }
            if (vary == "L") {
                try {
                    FitResult fit = fit_overhead(all, base.n, base.delta, variable_alpha);
                    std::cout << "fit: C = " << fit.C
                              << ", max residual ratio = " << fit.max_residual_ratio << " over "
                              << fit.points << " points\n";
                } catch (const std::exception& e) {
                    std::cout << "fit skipped: " << e.what() << "\n";
                }
            } else if (vary == "alpha") {
                // overhead per alpha at (roughly) constant L
                std::map<long, std::pair<double, int>> by_alpha;
                for (const auto& m : all) {
                    auto& acc = by_alpha[std::lround(m.alpha)];
                    acc.first += m.overhead;
                    ++acc.second;
                }
                for (const auto& [a, acc] : by_alpha)
                    std::cout << "alpha ~ " << a << ": mean overhead "
                              << acc.first / acc.second << "\n";
            }
            return ok ? 0 : 1;
        }

        if (*val_cmd) {
            RunRecord rec = load_record_file(trace_path);
            Verdict v = validate_record(rec);
            Diagnosis d = diagnose_failure_events(rec.log);
            RunMetrics m = measure_record(rec, v, d);
            std::cout << "verdict: " << (v.pass ? "pass" : "FAIL") << "\n";
            for (const auto& s : v.violations) std::cout << "  " << s << "\n";
            if (d.kind != FailureKind::None)
                std::cout << "diagnosed failure event: " << failure_kind_name(d.kind) << " ("
                          << d.note << ")\n";
            std::cout << "L=" << m.L << " L'=" << m.L_prime << " rounds=" << m.rounds
                      << " T_spent=" << m.T_spent << " epsilon=" << m.epsilon
                      << " overhead=" << m.overhead << "\n";
            return v.pass ? 0 : 1;
        }

        if (*bench_cmd) {
            using Clock = std::chrono::steady_clock;
            Rng rng(1);
            std::printf("%6s %8s %7s %7s %9s %9s %12s %12s\n", "round", "w_r", "kappa", "pad",
                        "eta_r", "coded", "enc us/word", "dec us/word");
            SystemParams sys(2, 0.1);
            for (uint64_t round : {1, 4, 16, 64, 256, 1024, 4096}) {
                RoundParams p = round_params(sys, round);
                Payload pl = Payload::message_chunk(rng.random_bits(p.key_len), false,
                                                    rng.random_bits(p.key_len));
                const int reps = 200;
                auto t0 = Clock::now();
                BitString w;
                for (int i = 0; i < reps; ++i) w = encode_word(pl, p, rng);
                auto t1 = Clock::now();
                for (int i = 0; i < reps; ++i) (void)decode_word(w, p, PayloadKind::MessageChunk);
                auto t2 = Clock::now();
                std::printf("%6llu %8zu %7u %7zu %9.2e %9zu %12.2f %12.2f\n",
                            (unsigned long long)round, p.word_len, p.key_len, p.pad_len,
                            p.eta_r, coded_region_len(PayloadKind::MessageChunk, p),
                            std::chrono::duration<double, std::micro>(t1 - t0).count() / reps,
                            std::chrono::duration<double, std::micro>(t2 - t1).count() / reps);
            }
            return 0;
        }

        if (*accept_cmd) {
            std::vector<int> which;
            if (accept_arg != "all") {
                if (fs::exists(accept_arg)) {
                    // preset file: [accept] criterion = N
                    std::ifstream f(accept_arg);
                    std::string line;
                    while (std::getline(f, line)) {
                        auto eq = line.find('=');
                        if (eq == std::string::npos) continue;
                        auto key = line.substr(0, eq);
                        if (key.find("criterion") != std::string::npos)
                            which.push_back(std::stoi(line.substr(eq + 1)));
                    }
                    if (which.empty()) {
                        std::cerr << "preset file names no criterion\n";
                        return 2;
                    }
                } else {
                    which.push_back(std::stoi(accept_arg));
                }
            }
            auto results = acceptance::run_criteria(which, threads, progress);
            int failures = acceptance::print_results(results);
            return failures == 0 ? 0 : 1;
        }

        if (*print_cmd) {
            ExperimentConfig cfg = load_config(config_path);
            std::cout << automaton_text::print(build_protocol(cfg));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
