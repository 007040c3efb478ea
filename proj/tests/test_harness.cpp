#include "doctest.h"

#include <hardwire/experiment.hpp>
#include <hardwire/report_json.hpp>
#include <hardwire/trace_io.hpp>

#include <sstream>

using namespace hardwire;

namespace {

const char* kSampleConfig =
    "# sample\n"
    "[run]\n"
    "n = 2\n"
    "delta = 0.1\n"
    "topology = auto\n"
    "pi = flood\n"
    "count = 6\n"
    "msg_len = 1\n"
    "pi_seed = 3\n"
    "[adversary]\n"
    "kind = uniform_random\n"
    "budget = 40\n"
    "seed = 9\n"
    "[sim]\n"
    "seeds = 1..4\n"
    "max_steps = auto\n"
    "keep_traces = false\n"
    "threads = 1\n"
    "[report]\n"
    "format = both\n"
    "out_dir = out\n";

} // namespace

TEST_CASE("config parsing: sections, seeds, errors") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    CHECK(cfg.n == 2);
    CHECK(cfg.delta == doctest::Approx(0.1));
    CHECK(cfg.pi == "flood");
    CHECK(cfg.gen.count == 6);
    CHECK(cfg.adversary.kind == "uniform_random");
    CHECK(cfg.adversary.budget == 40);
    CHECK(cfg.seeds.size() == 4);
    CHECK(cfg.seeds.front() == 1);
    CHECK(cfg.seeds.back() == 4);
    CHECK(cfg.format == "both");

    CHECK_THROWS(parse_config("[run]\nbogus_key = 1\n"));
    CHECK_THROWS(parse_config("[nosuch]\nn = 2\n"));
    CHECK_THROWS(parse_config("[run\nn = 2\n"));
    CHECK_THROWS(parse_config("[run]\nn\n"));
    CHECK_THROWS(parse_config("[sim]\nseeds = 9..2\n"));

    // exact decimal fraction for the word-length formula
    SystemParams sys = system_params_of(cfg);
    CHECK(sys.delta_num == 1);
    CHECK(sys.delta_den == 10);
}

TEST_CASE("experiment runs are reproducible byte for byte") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    auto res1 = run_experiment(cfg);
    auto res2 = run_experiment(cfg);
    CHECK(csv_text(res1.rows) == csv_text(res2.rows));
    CHECK(res1.agg.passes == res2.agg.passes);
    // threads must not change results, only wall time
    cfg.threads = 2;
    auto res3 = run_experiment(cfg);
    CHECK(csv_text(res1.rows) == csv_text(res3.rows));
}

TEST_CASE("csv columns are exactly the declared metrics fields") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    cfg.seeds = {1};
    auto res = run_experiment(cfg);
    std::string csv = csv_text(res.rows);
    CHECK(csv.rfind("run_id,seed,L,alpha,L_prime,T_budget,T_spent,rounds,latency_steps,"
                    "per_path_latency,success,failure_kind,epsilon,overhead\n",
                    0) == 0);
    // one row per run plus header
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == res.rows.size() + 1);
}

TEST_CASE("aggregate json carries the ensemble facts") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    cfg.seeds = {1, 2};
    auto res = run_experiment(cfg);
    auto j = aggregate_json(cfg, res);
    CHECK(j["runs"] == 2);
    CHECK(j["config"]["n"] == 2);
    CHECK(j.contains("success_rate"));
    CHECK(j.contains("failures"));
    std::string once = j.dump();
    CHECK(once == aggregate_json(cfg, res).dump());
}

TEST_CASE("fit_overhead recovers a planted constant") {
    // oracle data: y = C x exactly, with L spanning two decades
    std::vector<RunMetrics> rows;
    const double C = 123.0;
    for (uint64_t L : {16, 64, 256, 1024, 4096}) {
        RunMetrics m;
        m.L = L;
        m.alpha = 1.0;
        m.success = true;
        double x = double(L) * std::log2(2.0 * double(L) / 0.1);
        m.L_prime = uint64_t(C * x);
        rows.push_back(m);
    }
    FitResult fit = fit_overhead(rows, 2, 0.1, false);
    CHECK(fit.C == doctest::Approx(C).epsilon(1e-3));
    CHECK(fit.max_residual_ratio <= 1.001);

    // insufficient data must be an error
    rows.resize(3);
    CHECK_THROWS(fit_overhead(rows, 2, 0.1, false));
    // five points inside one decade is also insufficient
    std::vector<RunMetrics> narrow;
    for (uint64_t L : {100, 120, 140, 160, 180}) {
        RunMetrics m;
        m.L = L;
        m.alpha = 1;
        m.success = true;
        m.L_prime = L * 100;
        narrow.push_back(m);
    }
    CHECK_THROWS(fit_overhead(narrow, 2, 0.1, false));
}

TEST_CASE("trace dump round-trips and re-validates") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    cfg.seeds = {2};
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    ProtocolRun run(pi, pi.derived_topology(), sys, 2);
    run.run(10000000);
    RunRecord rec = snapshot(run, 2, "none");

    std::stringstream buf;
    dump_record(rec, buf);
    RunRecord back = load_record(buf);

    CHECK(back.n == rec.n);
    CHECK(back.seed == rec.seed);
    CHECK(back.log.size() == rec.log.size());
    CHECK(back.driven_bits == rec.driven_bits);
    CHECK(automaton_text::print(back.pi) == automaton_text::print(rec.pi));

    Verdict v1 = validate_record(rec);
    Verdict v2 = validate_record(back);
    CHECK(v1.pass == v2.pass);
    CHECK(v1.violations == v2.violations);
    RunMetrics m1 = measure_record(rec, v1, diagnose_failure_events(rec.log));
    RunMetrics m2 = measure_record(back, v2, diagnose_failure_events(back.log));
    CHECK(m1.L == m2.L);
    CHECK(m1.L_prime == m2.L_prime);

    std::stringstream bad;
    bad << "nonsense";
    CHECK_THROWS(load_record(bad));
}

TEST_CASE("run_experiment rejects inconsistent configs") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    cfg.n = 3; // flood generates a 2-node protocol
    CHECK_THROWS(run_experiment(cfg));

    ExperimentConfig disc = parse_config(kSampleConfig);
    disc.pi = "pipeline";
    disc.n = 4;
    disc.gen.count = 2;
    disc.topology = "0-1,2-3"; // disconnected over the protocol's nodes
    CHECK_THROWS(run_experiment(disc));
}

TEST_CASE("explicit topology may widen the derived one") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    cfg.adversary.kind = "none";
    cfg.topology = "0-1";
    cfg.seeds = {5};
    auto res = run_experiment(cfg);
    CHECK(res.agg.passes == 1);
}

TEST_CASE("schedule guard: tau growth ratio within documented constants") {
    // the harness-level regression guard over r <= 1e4 (criterion-10 core)
    for (unsigned n : {2u, 8u}) {
        SystemParams sys(n, 0.1);
        Schedule sched(sys);
        double lo = 1e18, hi = 0;
        for (uint64_t r = 2; r <= 10000; ++r) {
            double ratio =
                double(sched.tau(r)) / (double(r) * std::log2(double(n) * double(r) / 0.1));
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        CHECK(lo >= 500.0);
        CHECK(hi <= 1300.0);
    }
}
