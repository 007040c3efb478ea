#pragma once

// JSON aggregate report. Kept out of experiment.hpp so that only report
// consumers pay for the json header.

#include <json.hpp>

#include "experiment.hpp"

namespace hardwire {

inline nlohmann::ordered_json aggregate_json(const ExperimentConfig& cfg,
                                             const ExperimentResult& res) {
    nlohmann::ordered_json j;
    j["config"] = {{"n", cfg.n},
                   {"delta", cfg.delta},
                   {"pi", cfg.pi},
                   {"count", cfg.gen.count},
                   {"msg_len", cfg.gen.msg_len},
                   {"msg_len_max", cfg.gen.msg_len_max},
                   {"pi_seed", cfg.gen.seed},
                   {"topology", cfg.topology},
                   {"adversary", cfg.adversary.kind},
                   {"budget", cfg.adversary.budget},
                   {"adversary_seed", cfg.adversary.seed},
                   {"runs", cfg.seeds.size()}};
    j["runs"] = res.agg.runs;
    j["passes"] = res.agg.passes;
    j["success_rate"] = res.agg.success_rate;
    j["mean_overhead"] = res.agg.mean_overhead;
    j["max_overhead"] = res.agg.max_overhead;
    j["mean_epsilon"] = res.agg.mean_epsilon;
    j["total_driven_bits"] = res.agg.total_driven_bits;
    j["exactly_once_all"] = res.exactly_once_all;
    j["failure_event_runs"] = res.failure_event_runs;
    nlohmann::ordered_json fails = nlohmann::ordered_json::object();
    for (const auto& [kind, count] : res.agg.failures) fails[kind] = count;
    j["failures"] = fails;
    return j;
}

inline nlohmann::ordered_json fit_json(const FitResult& fit, const std::string& model) {
    return {{"model", model},
            {"C", fit.C},
            {"max_residual_ratio", fit.max_residual_ratio},
            {"points", fit.points}};
}

} // namespace hardwire
