#pragma once

// Deterministic global-clock simulator of directed bit lanes.
//
// Model: one bit per lane per step, always defined. While a lane is driven it
// carries the driver's bits; while undriven it carries the lane's idle value.
// The idle value starts at 0, may be set for free by the adversary on the
// first step of a contiguous silent stretch, and costs one budget unit to
// change mid-stretch. Flips cost one unit each; a flip during silence also
// changes the persisted idle value (the line keeps the last received bit).
//
// The adversary is consulted once per slot with a public view (clock, round
// geometry, topology, system parameters, protocol source) and returns actions
// for steps inside that slot. Views never expose channel contents or node
// randomness. run() advances slot-by-slot with a bulk fill; step() exposes
// the same semantics one step at a time and both paths are bit-identical.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"
#include "params.hpp"

namespace hardwire {

struct Topology {
    unsigned n = 0;
    std::vector<std::pair<int, int>> edges; // undirected, normalized u < v

    static Topology from_edges(unsigned n, std::vector<std::pair<int, int>> e) {
        Topology t;
        t.n = n;
        for (auto [u, v] : e) {
            if (u == v || u < 0 || v < 0 || unsigned(u) >= n || unsigned(v) >= n)
                throw std::invalid_argument("Topology: bad edge");
            t.edges.emplace_back(u < v ? u : v, u < v ? v : u);
        }
        return t;
    }

    bool has_edge(int u, int v) const {
        auto [a, b] = std::minmax(u, v);
        return std::find(edges.begin(), edges.end(), std::pair<int, int>(a, b)) != edges.end();
    }

    bool connected_over(const std::vector<int>& nodes) const {
        if (nodes.empty()) return true;
        std::vector<std::vector<int>> adj(n);
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::vector<char> seen(n, 0);
        std::vector<int> stack{nodes[0]};
        seen[nodes[0]] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (!seen[v]) { seen[v] = 1; stack.push_back(v); }
        }
        for (int u : nodes)
            if (!seen[u]) return false;
        return true;
    }
};

struct LaneInfo {
    int src = -1, dst = -1;
    int edge = -1;        // index into Topology::edges
    int initiator = -1;   // endpoint that initiates rounds on this channel
    bool forward = false; // true: initiator -> responder
};

// Two bidirectional channels per edge, one per initiating endpoint; each
// bidirectional channel is two directed lanes. Lane layout per edge e with
// endpoints u < v:
//   4e+0: u initiates, u->v      4e+1: u initiates, v->u
//   4e+2: v initiates, v->u      4e+3: v initiates, u->v
struct LaneMap {
    explicit LaneMap(const Topology& topo) : topo_(&topo) {
        lanes.reserve(topo.edges.size() * 4);
        for (size_t e = 0; e < topo.edges.size(); ++e) {
            auto [u, v] = topo.edges[e];
            lanes.push_back({u, v, int(e), u, true});
            lanes.push_back({v, u, int(e), u, false});
            lanes.push_back({v, u, int(e), v, true});
            lanes.push_back({u, v, int(e), v, false});
        }
    }

    int edge_index(int u, int v) const {
        auto [a, b] = std::minmax(u, v);
        for (size_t e = 0; e < topo_->edges.size(); ++e)
            if (topo_->edges[e] == std::pair<int, int>(a, b)) return int(e);
        throw std::invalid_argument("LaneMap: no such edge");
    }

    // lane carrying words from the initiator on channel (initiator, peer)
    uint32_t forward_lane(int initiator, int peer) const {
        int e = edge_index(initiator, peer);
        return uint32_t(4 * e + (topo_->edges[e].first == initiator ? 0 : 2));
    }
    // lane carrying words from the responder back to the initiator
    uint32_t backward_lane(int initiator, int peer) const {
        int e = edge_index(initiator, peer);
        return uint32_t(4 * e + (topo_->edges[e].first == initiator ? 1 : 3));
    }

    std::vector<LaneInfo> lanes;

private:
    const Topology* topo_;
};

struct AdversaryAction {
    uint64_t step = 0;
    uint32_t lane = 0;
    enum class Kind : uint8_t { Flip, SetIdle } kind = Kind::Flip;
    uint8_t value = 0; // for SetIdle
};

struct AdversaryView {
    uint64_t slot_start = 0;
    uint64_t round = 0;
    unsigned slot = 0;
    size_t word_len = 0;
    unsigned n = 0;
    double delta = 0.0;
    const std::vector<LaneInfo>* lanes = nullptr;
    const std::string* pi_source = nullptr;
};

class Adversary {
public:
    virtual ~Adversary() = default;
    // Append actions whose steps lie inside [slot_start, slot_start + word_len).
    virtual void plan_slot(const AdversaryView& view, std::vector<AdversaryAction>& out) = 0;
};

struct SlotContext {
    uint64_t round = 0;
    unsigned slot = 0; // 0..3
    uint64_t start_step = 0;
    const RoundParams* params = nullptr;
};

class Simulator;

class NodeRuntime {
public:
    virtual ~NodeRuntime() = default;
    virtual int node_id() const = 0;
    // Consume the windows of the slot that just ended. Local computation is
    // instantaneous: recording, state transitions and queueing happen here.
    virtual void on_slot_finish(const SlotContext& ctx, Simulator& sim) = 0;
    // Arm drivers for the slot that is about to run.
    virtual void on_slot_begin(const SlotContext& ctx, Simulator& sim) = 0;
    virtual bool halted() const = 0;
};

struct AppliedAction {
    AdversaryAction action;
    bool accepted = false; // false: rejected, budget exhausted
};

struct SimTrace {
    uint64_t last_step = 0;
    uint64_t rounds = 0;    // last round that ran
    bool truncated = false; // hit the step cap before all nodes halted
    uint64_t budget_total = 0;
    uint64_t budget_spent = 0;
    std::vector<AppliedAction> adversary_log;
    std::vector<uint64_t> driven_bits_per_lane;
    std::vector<BitString> lane_history; // only when keep_history
    bool keep_history = false;

    uint64_t driven_bits_total() const {
        uint64_t s = 0;
        for (uint64_t d : driven_bits_per_lane) s += d;
        return s;
    }
};

class Simulator {
public:
    Simulator(const Topology& topo, SystemParams sys)
        : topo_(topo), lane_map_(topo_), schedule_(sys) {
        lanes_.resize(lane_map_.lanes.size());
        trace_.driven_bits_per_lane.assign(lanes_.size(), 0);
        trace_.lane_history.resize(lanes_.size());
    }

    Schedule& schedule() { return schedule_; }
    const SystemParams& system() const { return schedule_.sys(); }
    const Topology& topology() const { return topo_; }
    const LaneMap& lane_map() const { return lane_map_; }
    SimTrace& trace() { return trace_; }
    const SimTrace& trace() const { return trace_; }

    void set_adversary(Adversary* adv, uint64_t budget) {
        adversary_ = adv;
        trace_.budget_total = budget;
    }
    void set_pi_source(std::string src) { pi_source_ = std::move(src); }
    void keep_history(bool on) { trace_.keep_history = on; }

    void attach(NodeRuntime* rt) {
        if (started_) throw std::logic_error("attach: simulation already started");
        for (auto* r : runtimes_)
            if (r->node_id() == rt->node_id())
                throw std::invalid_argument("attach: duplicate node runtime");
        if (rt->node_id() < 0 || unsigned(rt->node_id()) >= topo_.n)
            throw std::invalid_argument("attach: node id outside topology");
        runtimes_.push_back(rt);
        std::sort(runtimes_.begin(), runtimes_.end(),
                  [](auto* a, auto* b) { return a->node_id() < b->node_id(); });
    }

    // Drive `word` on `lane` for the slot being armed. One driver per lane
    // per slot; the word must fill the slot.
    void drive(uint32_t lane, BitString word) {
        LaneState& l = lanes_.at(lane);
        if (l.driver_set) throw std::logic_error("drive: lane already driven this slot");
        if (word.size() != arming_word_len_)
            throw std::invalid_argument("drive: word does not fill the slot");
        l.driver = std::move(word);
        l.driver_set = true;
    }

    // Window of bits delivered on `lane` during the slot that just finished.
    const BitString& window(uint32_t lane) const { return lanes_.at(lane).window; }

    // Trace-side truth, for diagnosis and logging only.
    bool slot_was_driven(uint32_t lane) const { return lanes_.at(lane).driver_set; }
    uint32_t slot_flips(uint32_t lane) const { return lanes_.at(lane).flips_applied; }

    uint64_t clock() const { return clock_; }

    struct RunResult {
        bool completed = false;
        uint64_t steps = 0;
    };

    // Advance until every runtime reports halted, an optional predicate says
    // stop, or the step cap is hit (the cap rounds up to a slot boundary).
    RunResult run(uint64_t max_steps, const std::function<bool()>& until = {}) {
        while (true) {
            if (!slot_open_) {
                bool all_halted = !runtimes_.empty();
                for (auto* rt : runtimes_)
                    if (!rt->halted()) { all_halted = false; break; }
                if (all_halted || (until && until())) return RunResult{true, clock_ - 1};
                if (clock_ > max_steps) {
                    trace_.truncated = true;
                    return RunResult{false, clock_ - 1};
                }
                open_slot();
            }
            if (cursor_ == 0) {
                bulk_emit();
            } else {
                // a slot left half-done by step(): finish it stepwise
                while (cursor_ < cur_.params->word_len) emit_one_step();
            }
            close_slot();
        }
    }

    // Single-step API with identical semantics; may be interleaved with run().
    void step() {
        if (!slot_open_) open_slot();
        emit_one_step();
        if (cursor_ == cur_.params->word_len) close_slot();
    }

private:
    struct LaneState {
        BitString driver;
        bool driver_set = false;
        uint8_t line = 0; // persisted idle value
        bool driven_prev_slot = false;
        BitString window;
        uint32_t flips_applied = 0;
    };

    void open_slot() {
        started_ = true;
        auto pos = schedule_.locate(clock_);
        if (pos.offset != 0) throw std::logic_error("Simulator: clock not on a slot boundary");
        cur_.round = pos.round;
        cur_.slot = pos.slot;
        cur_.start_step = clock_;
        cur_.params = &schedule_.params(pos.round);
        trace_.rounds = pos.round;
        arming_word_len_ = cur_.params->word_len;

        for (auto& l : lanes_) {
            l.driver.clear();
            l.driver_set = false;
            l.window.clear();
            l.window.reserve_bits(arming_word_len_);
            l.flips_applied = 0;
        }
        for (auto* rt : runtimes_) rt->on_slot_begin(cur_, *this);

        slot_actions_.clear();
        if (adversary_) {
            AdversaryView view;
            view.slot_start = cur_.start_step;
            view.round = cur_.round;
            view.slot = cur_.slot;
            view.word_len = cur_.params->word_len;
            view.n = topo_.n;
            view.delta = schedule_.sys().delta;
            view.lanes = &lane_map_.lanes;
            view.pi_source = &pi_source_;
            adversary_->plan_slot(view, slot_actions_);
            const uint64_t lo = cur_.start_step, hi = lo + cur_.params->word_len;
            for (const auto& a : slot_actions_)
                if (a.step < lo || a.step >= hi || a.lane >= lanes_.size())
                    throw std::invalid_argument("adversary action outside the planned slot");
            std::stable_sort(slot_actions_.begin(), slot_actions_.end(),
                             [](const auto& a, const auto& b) { return a.step < b.step; });
        }
        action_cursor_ = 0;
        cursor_ = 0;
        slot_open_ = true;
    }

    bool first_silent_step_of(const LaneState& l, uint64_t step) const {
        // driving is slot-aligned, so silent stretches begin at slot starts
        return step == cur_.start_step && !l.driver_set && (l.driven_prev_slot || step == 1);
    }

    void emit_one_step() {
        const uint64_t step = clock_;
        // base bit per lane
        pending_.resize(lanes_.size());
        for (uint32_t li = 0; li < lanes_.size(); ++li) {
            LaneState& l = lanes_[li];
            pending_[li] = l.driver_set ? uint8_t(l.driver.get(cursor_)) : l.line;
        }
        // apply this step's actions in plan order (budget charged globally)
        while (action_cursor_ < slot_actions_.size() && slot_actions_[action_cursor_].step < step)
            ++action_cursor_;
        for (size_t i = action_cursor_;
             i < slot_actions_.size() && slot_actions_[i].step == step; ++i) {
            const auto& a = slot_actions_[i];
            LaneState& l = lanes_[a.lane];
            const bool driven = l.driver_set;
            uint8_t bit = pending_[a.lane];
            uint64_t cost = 0;
            uint8_t newbit = bit;
            if (a.kind == AdversaryAction::Kind::Flip) {
                cost = 1;
                newbit = bit ^ 1;
            } else {
                if (driven) continue; // ignored, not logged
                cost = first_silent_step_of(l, step) ? 0 : ((a.value & 1) != bit ? 1 : 0);
                newbit = a.value & 1;
            }
            const bool ok = trace_.budget_spent + cost <= trace_.budget_total;
            trace_.adversary_log.push_back({a, ok});
            if (!ok) continue;
            trace_.budget_spent += cost;
            pending_[a.lane] = newbit;
            if (!driven) l.line = newbit;
            if (a.kind == AdversaryAction::Kind::Flip) ++l.flips_applied;
        }
        // deliver
        for (uint32_t li = 0; li < lanes_.size(); ++li) {
            LaneState& l = lanes_[li];
            l.window.push_back(pending_[li]);
            if (l.driver_set) ++trace_.driven_bits_per_lane[li];
        }
        ++clock_;
        ++cursor_;
    }

    // Whole-slot fast path; identical outcome to repeated emit_one_step.
    void bulk_emit() {
        const size_t w = cur_.params->word_len;
        const uint64_t lo = cur_.start_step;

        // acceptance and budget in global plan order
        accepted_.assign(slot_actions_.size(), 0); // 0 rejected, 1 accepted, 2 ignored
        line_scratch_.assign(lanes_.size(), 2);    // 2 = untouched marker
        for (size_t i = 0; i < slot_actions_.size(); ++i) {
            const auto& a = slot_actions_[i];
            LaneState& l = lanes_[a.lane];
            const bool driven = l.driver_set;
            uint8_t cur_val = line_scratch_[a.lane] == 2 ? l.line : line_scratch_[a.lane];
            uint64_t cost = 0;
            if (a.kind == AdversaryAction::Kind::Flip) {
                cost = 1;
            } else {
                if (driven) { accepted_[i] = 2; continue; }
                const bool first_silent = (a.step == lo) && (l.driven_prev_slot || lo == 1);
                cost = first_silent ? 0 : ((a.value & 1) != cur_val ? 1 : 0);
            }
            const bool ok = trace_.budget_spent + cost <= trace_.budget_total;
            accepted_[i] = ok ? 1 : 0;
            trace_.adversary_log.push_back({a, ok});
            if (!ok) continue;
            trace_.budget_spent += cost;
            if (!driven)
                line_scratch_[a.lane] =
                    (a.kind == AdversaryAction::Kind::Flip) ? uint8_t(cur_val ^ 1)
                                                            : uint8_t(a.value & 1);
        }

        // fill windows lane by lane
        for (uint32_t li = 0; li < lanes_.size(); ++li) {
            LaneState& l = lanes_[li];
            if (l.driver_set) {
                l.window = l.driver;
                trace_.driven_bits_per_lane[li] += w;
            } else {
                l.window.resize(w);
                auto& words = l.window.words_mut();
                const uint64_t fill0 = l.line ? ~uint64_t(0) : 0;
                std::fill(words.begin(), words.end(), fill0);
            }
        }
        // apply accepted actions per lane in plan order
        for (size_t i = 0; i < slot_actions_.size(); ++i) {
            if (accepted_[i] != 1) continue;
            const auto& a = slot_actions_[i];
            LaneState& l = lanes_[a.lane];
            const size_t off = size_t(a.step - lo);
            if (l.driver_set) {
                // Flip only (SetIdle on driven lanes was marked ignored)
                l.window.set(off, 1 - l.window.get(off));
                ++l.flips_applied;
            } else {
                uint8_t val;
                if (a.kind == AdversaryAction::Kind::Flip) {
                    val = uint8_t(1 - l.window.get(off));
                    ++l.flips_applied;
                } else {
                    val = a.value & 1;
                }
                // value persists through the rest of the silent stretch
                for (size_t p = off; p < w; ++p) l.window.set(p, val);
                l.line = val;
            }
        }
        // fix tail masking of silent windows filled with ~0
        for (auto& l : lanes_)
            if (!l.driver_set) l.window.resize(w);

        clock_ += w;
        cursor_ = w;
    }

    void close_slot() {
        for (auto& l : lanes_) l.driven_prev_slot = l.driver_set;
        if (trace_.keep_history)
            for (size_t i = 0; i < lanes_.size(); ++i)
                trace_.lane_history[i].append(lanes_[i].window);
        trace_.last_step = clock_ - 1;
        const SlotContext finished = cur_;
        slot_open_ = false;
        for (auto* rt : runtimes_) rt->on_slot_finish(finished, *this);
    }

    Topology topo_;
    LaneMap lane_map_;
    Schedule schedule_;
    std::vector<LaneState> lanes_;
    std::vector<NodeRuntime*> runtimes_;
    Adversary* adversary_ = nullptr;
    std::string pi_source_;
    SimTrace trace_;

    uint64_t clock_ = 1;
    SlotContext cur_{};
    size_t arming_word_len_ = 0;
    bool slot_open_ = false;
    bool started_ = false;
    std::vector<AdversaryAction> slot_actions_;
    std::vector<uint8_t> accepted_;
    std::vector<uint8_t> line_scratch_;
    std::vector<uint8_t> pending_;
    size_t action_cursor_ = 0;
    size_t cursor_ = 0;
};

} // namespace hardwire
