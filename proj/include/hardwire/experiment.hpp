#pragma once

// Experiment harness: configuration files, seeded parallel runs, cost fits,
// and machine-readable reports (CSV per run, JSON aggregate).

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adversaries.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "runtime.hpp"
#include "trace_io.hpp"
#include "validate.hpp"

namespace hardwire {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    unsigned n = 2;
    double delta = 0.1;
    std::string delta_text = "0.1";
    std::string topology = "auto"; // auto | "0-1,1-2,..."
    std::string pi = "flood";      // generator kind or file:<path>
    GeneratorSpec gen;
    AdversarySpec adversary;
    std::vector<uint64_t> seeds = {1};
    uint64_t max_steps = 0; // 0 = auto
    bool keep_traces = false;
    unsigned threads = 0; // 0 = hardware concurrency
    std::string format = "csv"; // csv | json | both
    std::string out_dir = "out";
    std::string check_outputs = "auto"; // auto | on | off
};

namespace config_detail {

inline std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<uint64_t> parse_seeds(const std::string& text) {
    std::vector<uint64_t> out;
    auto range = text.find("..");
    if (range != std::string::npos) {
        uint64_t lo = std::stoull(text.substr(0, range));
        uint64_t hi = std::stoull(text.substr(range + 2));
        if (hi < lo || hi - lo > 1000000) throw std::invalid_argument("config: bad seed range");
        for (uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(std::stoull(item));
    }
    if (out.empty()) throw std::invalid_argument("config: empty seed list");
    return out;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: bad boolean '" + v + "'");
}

// exact decimal fraction for the word-length formula
inline std::pair<uint64_t, uint64_t> decimal_fraction(const std::string& text) {
    auto dot = text.find('.');
    std::string ip = dot == std::string::npos ? text : text.substr(0, dot);
    std::string fp = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (fp.size() > 9) fp = fp.substr(0, 9);
    uint64_t den = 1;
    for (size_t i = 0; i < fp.size(); ++i) den *= 10;
    uint64_t num = (ip.empty() ? 0 : std::stoull(ip)) * den + (fp.empty() ? 0 : std::stoull(fp));
    return {num, den};
}

} // namespace config_detail

inline ExperimentConfig parse_config(const std::string& text) {
    using config_detail::parse_bool;
    using config_detail::strip;
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": bad section");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = strip(line.substr(0, eq));
        std::string val = strip(line.substr(eq + 1));
        auto unknown = [&]() {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + section + "." + key + "'");
        };
        if (section == "run") {
            if (key == "n") cfg.n = unsigned(std::stoul(val));
            else if (key == "delta") { cfg.delta = std::stod(val); cfg.delta_text = val; }
            else if (key == "topology") cfg.topology = val;
            else if (key == "pi") cfg.pi = val;
            else if (key == "count") cfg.gen.count = unsigned(std::stoul(val));
            else if (key == "msg_len") cfg.gen.msg_len = unsigned(std::stoul(val));
            else if (key == "msg_len_max") cfg.gen.msg_len_max = unsigned(std::stoul(val));
            else if (key == "pi_seed") cfg.gen.seed = std::stoull(val);
            else unknown();
        } else if (section == "adversary") {
            if (key == "kind") cfg.adversary.kind = val;
            else if (key == "budget") cfg.adversary.budget = std::stoull(val);
            else if (key == "seed") cfg.adversary.seed = std::stoull(val);
            else if (key == "target_slot") cfg.adversary.target_slot = unsigned(std::stoul(val));
            else if (key == "burst_len") cfg.adversary.burst_len = unsigned(std::stoul(val));
            else if (key == "start_round") cfg.adversary.start_round = std::stoull(val);
            else if (key == "horizon_steps") cfg.adversary.horizon_steps = std::stoull(val);
            else unknown();
        } else if (section == "sim") {
            if (key == "seeds") cfg.seeds = config_detail::parse_seeds(val);
            else if (key == "max_steps") cfg.max_steps = (val == "auto") ? 0 : std::stoull(val);
            else if (key == "keep_traces") cfg.keep_traces = parse_bool(val);
            else if (key == "threads") cfg.threads = (val == "auto") ? 0 : unsigned(std::stoul(val));
            else unknown();
        } else if (section == "report") {
            if (key == "format") cfg.format = val;
            else if (key == "out_dir") cfg.out_dir = val;
            else if (key == "check_outputs") cfg.check_outputs = val;
            else unknown();
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown section '" + section + "'");
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline SystemParams system_params_of(const ExperimentConfig& cfg) {
    SystemParams sys;
    sys.n = cfg.n;
    sys.delta = cfg.delta;
    auto [num, den] = config_detail::decimal_fraction(cfg.delta_text);
    if (num > 0 && num < den) {
        sys.delta_num = num;
        sys.delta_den = den;
    }
    sys.normalize();
    return sys;
}

// ---------------------------------------------------------------------------
// protocol and topology construction
// ---------------------------------------------------------------------------

inline MultiAutomaton build_protocol(const ExperimentConfig& cfg) {
    if (cfg.pi.rfind("file:", 0) == 0) {
        std::ifstream f(cfg.pi.substr(5));
        if (!f) throw std::runtime_error("cannot open protocol file " + cfg.pi.substr(5));
        std::ostringstream ss;
        ss << f.rdbuf();
        return automaton_text::parse(ss.str());
    }
    GeneratorSpec g = cfg.gen;
    g.kind = cfg.pi;
    g.n = cfg.n;
    return generate_protocol(g);
}

inline Topology build_topology(const ExperimentConfig& cfg, const MultiAutomaton& pi) {
    if (cfg.topology == "auto") {
        Topology t = pi.derived_topology();
        t.n = std::max(t.n, cfg.n);
        return t;
    }
    std::vector<std::pair<int, int>> edges;
    std::istringstream ss(cfg.topology);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto dash = item.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("topology: expected u-v");
        edges.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    }
    return Topology::from_edges(cfg.n, std::move(edges));
}

// ---------------------------------------------------------------------------
// step caps and adversary horizon from the oracle load
// ---------------------------------------------------------------------------

struct LoadEstimate {
    uint64_t max_channel_chunks = 1; // pessimistic, at round-1 chunk size
    uint64_t depth = 1;              // edges, a loose chain-length bound
    uint64_t nominal_rounds = 8;
    uint64_t cap_rounds = 16;
};

inline LoadEstimate estimate_load(const MultiAutomaton& pi, const Topology& topo,
                                  const SystemParams& sys, uint64_t budget,
                                  const OracleTranscript& oracle) {
    LoadEstimate e;
    const unsigned kappa1 = round_params(sys, 1).key_len;
    for (const auto& [edge, msgs] : oracle.delivered) {
        uint64_t chunks = 0;
        for (const auto& m : msgs) chunks += (m.size() + kappa1 - 1) / kappa1;
        e.max_channel_chunks = std::max(e.max_channel_chunks, chunks);
    }
    e.depth = std::max<uint64_t>(1, topo.edges.size());
    // corrupting one round costs at least a fifth of a coded region, which is
    // never below 8 bits; budget/8 over-counts the rounds the adversary can kill
    e.nominal_rounds = e.max_channel_chunks + e.depth + 4 + budget / 64;
    e.cap_rounds = (e.max_channel_chunks + 2) * (e.depth + 2) + budget / 8 + 16;
    return e;
}

// ---------------------------------------------------------------------------
// the runner
// ---------------------------------------------------------------------------

inline void parallel_for(size_t count, unsigned threads, const std::function<void(size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(count ? count : 1));
    if (threads <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct Aggregate {
    size_t runs = 0, passes = 0;
    double success_rate = 0.0;
    double mean_overhead = 0.0, max_overhead = 0.0;
    double mean_epsilon = 0.0;
    uint64_t total_driven_bits = 0;
    bool exactly_once_all = true;
    std::map<std::string, size_t> failures;
};

inline Aggregate aggregate_rows(const std::vector<RunMetrics>& rows) {
    Aggregate a;
    a.runs = rows.size();
    double oh_sum = 0, eps_sum = 0;
    for (const auto& m : rows) {
        if (m.success) ++a.passes;
        else ++a.failures[failure_kind_name(m.failure_kind)];
        oh_sum += m.overhead;
        eps_sum += m.epsilon;
        a.max_overhead = std::max(a.max_overhead, m.overhead);
        a.total_driven_bits += m.L_prime;
    }
    if (a.runs) {
        a.success_rate = double(a.passes) / double(a.runs);
        a.mean_overhead = oh_sum / double(a.runs);
        a.mean_epsilon = eps_sum / double(a.runs);
    }
    return a;
}

struct ExperimentResult {
    std::vector<RunMetrics> rows;
    Aggregate agg;
    bool exactly_once_all = true; // criterion-9 bookkeeping across the ensemble
    size_t failure_event_runs = 0;
};

// Documented schedule-growth constants: tau(r)/(r*log2(nr/delta)) must stay
// inside [kTauRatioLo, kTauRatioHi] (guards against silent word-sizing
// regressions; verified to r = 1e4 by the acceptance suite).
inline constexpr double kTauRatioLo = 500.0;
inline constexpr double kTauRatioHi = 1300.0;

inline void schedule_growth_guard(const SystemParams& sys, uint64_t upto = 2048) {
    Schedule sched(sys);
    for (uint64_t r = 2; r <= upto; r = r < 16 ? r + 1 : r * 2) {
        double ratio =
            double(sched.tau(r)) / (double(r) * std::log2(double(sys.n) * double(r) / sys.delta));
        if (ratio < kTauRatioLo || ratio > kTauRatioHi)
            throw std::logic_error("schedule growth guard tripped at r=" + std::to_string(r));
    }
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::string& trace_dir = "") {
    SystemParams sys = system_params_of(cfg);
    MultiAutomaton pi = build_protocol(cfg);
    if (pi.n != cfg.n)
        throw std::invalid_argument("config: n does not match the protocol's node count");
    Topology topo = build_topology(cfg, pi);
    validate_protocol(pi, topo);
    {
        std::vector<int> referenced;
        for (auto [u, v] : pi.message_edges()) {
            referenced.push_back(u);
            referenced.push_back(v);
        }
        if (!topo.connected_over(referenced))
            throw std::invalid_argument("config: topology not connected over protocol nodes");
    }
    OracleTranscript oracle = oracle_run(pi);
    LoadEstimate load = estimate_load(pi, topo, sys, cfg.adversary.budget, oracle);
    schedule_growth_guard(sys);
    Schedule sched(sys);
    const uint64_t cap =
        cfg.max_steps ? cfg.max_steps : 10 * sched.tau(load.cap_rounds);
    const uint64_t horizon = cfg.adversary.horizon_steps
                                 ? cfg.adversary.horizon_steps
                                 : sched.tau(load.nominal_rounds);
    const bool check_outputs =
        cfg.check_outputs == "on" ||
        (cfg.check_outputs == "auto" && cfg.pi.rfind("file:", 0) != 0);

    ExperimentResult result;
    result.rows.resize(cfg.seeds.size());
    std::atomic<size_t> failure_event_runs{0};
    std::atomic<bool> exactly_once_all{true};

    parallel_for(cfg.seeds.size(), cfg.threads, [&](size_t idx) {
        const uint64_t seed = cfg.seeds[idx];
        AdversarySpec aspec = cfg.adversary;
        uint64_t mix = aspec.seed ^ (seed * 0x9e3779b97f4a7c15ull);
        aspec.seed = splitmix64(mix);
        aspec.horizon_steps = horizon;
        auto adversary_inst = make_adversary(aspec, sys);

        ProtocolRun run(pi, topo, sys, seed);
        if (adversary_inst) run.sim().set_adversary(adversary_inst.get(), aspec.budget);
        if (cfg.keep_traces) run.sim().keep_history(true);
        run.run(cap);

        RunRecord rec = snapshot(run, seed, aspec.kind);
        Verdict v = validate_record(rec);
        if (check_outputs) outputs_match_record(rec, oracle, &v);
        Diagnosis diag = diagnose_failure_events(rec.log);
        if (diag.kind != FailureKind::None) failure_event_runs.fetch_add(1);
        if (diag.kind == FailureKind::None && !v.exactly_once_ok)
            exactly_once_all.store(false);
        RunMetrics m = measure_record(rec, v, diag);
        m.run_id = idx;
        m.seed = seed;
        result.rows[idx] = m;
        if (!trace_dir.empty())
            dump_record_file(rec, trace_dir + "/trace_" + std::to_string(idx) + ".hwtr");
    });

    result.agg = aggregate_rows(result.rows);
    result.exactly_once_all = exactly_once_all.load();
    result.failure_event_runs = failure_event_runs.load();
    return result;
}

// ---------------------------------------------------------------------------
// cost fit
// ---------------------------------------------------------------------------

struct FitResult {
    double C = 0.0;
    double max_residual_ratio = 0.0;
    size_t points = 0;
};

// Least squares through the origin of L' against the model term
//   alpha = 1:        x = L * log2(n L / delta)
//   variable alpha:   x = L * (1 + (1/alpha) * log2(n L / delta))
inline FitResult fit_overhead(const std::vector<RunMetrics>& rows, unsigned n, double delta,
                              bool variable_alpha) {
    std::vector<std::pair<double, double>> pts; // (x, y)
    std::vector<uint64_t> distinct;
    for (const auto& m : rows) {
        if (m.L == 0 || !m.success) continue;
        double logterm = std::log2(double(n) * double(m.L) / delta);
        double x = variable_alpha ? double(m.L) * (1.0 + logterm / m.alpha)
                                  : double(m.L) * logterm;
        pts.emplace_back(x, double(m.L_prime));
        if (std::find(distinct.begin(), distinct.end(), m.L) == distinct.end())
            distinct.push_back(m.L);
    }
    if (distinct.size() < 5)
        throw std::invalid_argument("fit_overhead: need at least 5 distinct L values");
    auto [lo, hi] = std::minmax_element(distinct.begin(), distinct.end());
    if (double(*hi) / double(*lo) < 100.0)
        throw std::invalid_argument("fit_overhead: L must span at least two decades");
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
        sxy += x * y;
        sxx += x * x;
    }
    FitResult fit;
    fit.C = sxy / sxx;
    fit.points = pts.size();
    for (auto [x, y] : pts) {
        double r = y / (fit.C * x);
        fit.max_residual_ratio = std::max({fit.max_residual_ratio, r, 1.0 / r});
    }
    return fit;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

namespace report_detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string per_path_text(const std::map<int, uint64_t>& m) {
    std::string s;
    for (const auto& [node, steps] : m) {
        if (!s.empty()) s += '|';
        s += std::to_string(node) + ':' + std::to_string(steps);
    }
    return s;
}

} // namespace report_detail

inline void write_csv(const std::vector<RunMetrics>& rows, std::ostream& out) {
    out << "run_id,seed,L,alpha,L_prime,T_budget,T_spent,rounds,latency_steps,"
           "per_path_latency,success,failure_kind,epsilon,overhead\n";
    for (const auto& m : rows) {
        out << m.run_id << ',' << m.seed << ',' << m.L << ','
            << report_detail::fmt_double(m.alpha) << ',' << m.L_prime << ',' << m.T_budget
            << ',' << m.T_spent << ',' << m.rounds << ',' << m.latency_steps << ','
            << report_detail::per_path_text(m.per_path_latency) << ','
            << (m.success ? "true" : "false") << ',' << failure_kind_name(m.failure_kind)
            << ',' << report_detail::fmt_double(m.epsilon) << ','
            << report_detail::fmt_double(m.overhead) << '\n';
    }
}

inline std::string csv_text(const std::vector<RunMetrics>& rows) {
    std::ostringstream ss;
    write_csv(rows, ss);
    return ss.str();
}

} // namespace hardwire
