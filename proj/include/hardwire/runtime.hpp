#pragma once

// Node runtime for the compiled protocol: walks the node's automaton, queues
// outgoing messages per channel, runs a sender machine on every channel this
// node initiates and a receiver machine on every channel a neighbor initiates,
// and consumes recorded messages as input transitions.

#include <deque>
#include <memory>

#include "automaton.hpp"
#include "events.hpp"
#include "exchange.hpp"
#include "netsim.hpp"

namespace hardwire {

class ProtocolNode : public NodeRuntime {
public:
    ProtocolNode(int id, const MultiAutomaton* pi, const Simulator& sim,
                 const std::map<std::pair<int, int>, PrefixFreeLanguage>* langs, Rng rng,
                 EventLog* log)
        : id_(id), pi_(pi), rng_(rng), log_(log) {
        const Automaton& aut = pi_->nodes[id];
        state_ = aut.initial;
        const auto& lm = sim.lane_map();
        for (auto [u, v] : sim.topology().edges) {
            int peer = (u == id) ? v : (v == id) ? u : -1;
            if (peer < 0) continue;
            Out o;
            o.peer = peer;
            o.fwd_lane = lm.forward_lane(id, peer);
            o.back_lane = lm.backward_lane(id, peer);
            o.sender = std::make_unique<SenderMachine>(ChannelIds{id, peer},
                                                       rng_.fork(uint64_t(peer) * 2 + 0));
            outs_.push_back(std::move(o));
            In i;
            i.peer = peer;
            i.fwd_lane = lm.forward_lane(peer, id);
            i.back_lane = lm.backward_lane(peer, id);
            auto it = langs->find({peer, id});
            i.receiver = std::make_unique<ReceiverMachine>(
                ChannelIds{peer, id}, it == langs->end() ? nullptr : &it->second,
                rng_.fork(uint64_t(peer) * 2 + 1));
            ins_.push_back(std::move(i));
        }
        auto by_peer = [](const auto& a, const auto& b) { return a.peer < b.peer; };
        std::sort(outs_.begin(), outs_.end(), by_peer);
        std::sort(ins_.begin(), ins_.end(), by_peer);

        // initial local computation happens before the clock starts
        advance_walk(0, 0);
        check_halted(0, 0);
    }

    int node_id() const override { return id_; }
    bool halted() const override { return halted_; }

    bool terminated_pi() const { return terminated_pi_; }
    uint64_t terminated_round() const { return terminated_round_; }
    const std::optional<BitString>& output() const { return output_; }

    void on_slot_begin(const SlotContext& ctx, Simulator& sim) override {
        const uint64_t step = ctx.start_step;
        if (ctx.slot == 0) {
            for (auto& o : outs_) {
                if (!o.sender->call_active() && !o.queue.empty()) {
                    auto msg = std::move(o.queue.front());
                    o.queue.pop_front();
                    o.sender->start_call(std::move(msg), ctx.round);
                    Event& e = log_->push(EventType::SendStarted);
                    e.node = int16_t(id_);
                    e.peer = int16_t(o.peer);
                    e.initiator = int16_t(id_);
                    e.step = step;
                    e.round = ctx.round;
                    e.msg = o.sender->message();
                }
            }
        }
        for (auto& o : outs_)
            if (auto w = o.sender->begin_slot(*ctx.params, ctx.slot, step, *log_))
                sim.drive(o.fwd_lane, std::move(*w));
        for (auto& i : ins_)
            if (alive_for(ctx.round))
                if (auto w = i.receiver->begin_slot(*ctx.params, ctx.slot, step, *log_))
                    sim.drive(i.back_lane, std::move(*w));
    }

    void on_slot_finish(const SlotContext& ctx, Simulator& sim) override {
        const uint64_t step = ctx.start_step + ctx.params->word_len;
        for (auto& o : outs_) {
            auto reason = o.sender->finish_slot(*ctx.params, ctx.slot, sim.window(o.back_lane),
                                                sim.slot_was_driven(o.back_lane), step, *log_);
            if (reason) {
                Event& e = log_->push(EventType::SendReturned);
                e.node = int16_t(id_);
                e.peer = int16_t(o.peer);
                e.initiator = int16_t(id_);
                e.step = step;
                e.round = ctx.round;
                e.info = uint8_t(*reason);
                e.msg = o.sender->message();
            }
        }
        const bool alive = alive_for(ctx.round);
        for (auto& i : ins_) {
            auto rec = i.receiver->finish_slot(*ctx.params, ctx.slot, sim.window(i.fwd_lane),
                                               alive, sim.slot_was_driven(i.fwd_lane), step,
                                               *log_);
            if (rec) {
                Event& e = log_->push(EventType::Recorded);
                e.node = int16_t(id_);
                e.peer = int16_t(i.peer);
                e.initiator = int16_t(i.peer);
                e.step = step;
                e.round = ctx.round;
                e.msg = *rec;
                if (terminated_pi_) {
                    Event& a = log_->push(EventType::Anomaly);
                    a.node = int16_t(id_);
                    a.peer = int16_t(i.peer);
                    a.info = uint8_t(AnomalyKind::RecordAfterTermination);
                    a.step = step;
                    a.round = ctx.round;
                }
                i.inbox.push_back(std::move(*rec));
            }
        }
        advance_walk(step, ctx.round);
        check_halted(step, ctx.round);
    }

private:
    struct Out {
        int peer = -1;
        uint32_t fwd_lane = 0, back_lane = 0;
        std::unique_ptr<SenderMachine> sender;
        std::deque<BitString> queue;
    };
    struct In {
        int peer = -1;
        uint32_t fwd_lane = 0, back_lane = 0;
        std::unique_ptr<ReceiverMachine> receiver;
        std::deque<BitString> inbox;
    };

    bool alive_for(uint64_t round) const {
        return !(terminated_pi_ && round > terminated_round_);
    }

    Out& out_channel(int peer) {
        for (auto& o : outs_)
            if (o.peer == peer) return o;
        throw std::invalid_argument("node " + std::to_string(id_) +
                                    ": output action to non-neighbor " + std::to_string(peer));
    }

    void advance_walk(uint64_t step, uint64_t round) {
        const Automaton& aut = pi_->nodes[id_];
        while (!terminated_pi_) {
            const auto& st = aut.states[state_];
            if (st.terminal) {
                terminated_pi_ = true;
                terminated_round_ = round;
                output_ = st.output;
                Event& e = log_->push(EventType::TerminatedPi);
                e.node = int16_t(id_);
                e.step = step;
                e.round = round;
                if (st.output) e.msg = *st.output;
                break;
            }
            if (!st.outputs.empty()) {
                const auto& edge = st.outputs.front();
                Out& o = out_channel(edge.peer);
                Event& q = log_->push(EventType::SendEnqueued);
                q.node = int16_t(id_);
                q.peer = int16_t(edge.peer);
                q.initiator = int16_t(id_);
                q.step = step;
                q.round = round;
                q.msg = edge.msg;
                q.aux = last_input_event_;
                o.queue.push_back(edge.msg);
                Event& t = log_->push(EventType::OutputTaken);
                t.node = int16_t(id_);
                t.peer = int16_t(edge.peer);
                t.step = step;
                t.round = round;
                t.aux = pack_states(state_, edge.next);
                state_ = edge.next;
                continue;
            }
            bool consumed = false;
            for (auto& in : ins_) {
                while (!in.inbox.empty() && !aut.states[state_].terminal) {
                    BitString msg = std::move(in.inbox.front());
                    in.inbox.pop_front();
                    auto key = std::pair<int, std::string>(in.peer, msg.to_string());
                    const auto& cur = aut.states[state_];
                    auto it = cur.inputs.find(key);
                    uint32_t next = (it == cur.inputs.end()) ? state_ : it->second;
                    if (it == cur.inputs.end()) {
                        Event& a = log_->push(EventType::Anomaly);
                        a.node = int16_t(id_);
                        a.peer = int16_t(in.peer);
                        a.info = uint8_t(AnomalyKind::UnmatchedInput);
                        a.step = step;
                        a.round = round;
                        a.msg = msg;
                    }
                    Event& e = log_->push(EventType::InputApplied);
                    e.node = int16_t(id_);
                    e.peer = int16_t(in.peer);
                    e.initiator = int16_t(in.peer);
                    e.step = step;
                    e.round = round;
                    e.msg = msg;
                    e.aux = pack_states(state_, next);
                    last_input_event_ = uint64_t(log_->size() - 1);
                    state_ = next;
                    consumed = true;
                }
            }
            if (!consumed) break;
        }
    }

    void check_halted(uint64_t step, uint64_t round) {
        if (halted_ || !terminated_pi_) return;
        for (const auto& o : outs_)
            if (o.sender->call_active() || !o.queue.empty()) return;
        halted_ = true;
        Event& e = log_->push(EventType::Halted);
        e.node = int16_t(id_);
        e.step = step;
        e.round = round;
    }

    int id_;
    const MultiAutomaton* pi_;
    Rng rng_;
    EventLog* log_;
    uint32_t state_ = 0;
    bool terminated_pi_ = false;
    bool halted_ = false;
    uint64_t terminated_round_ = 0;
    std::optional<BitString> output_;
    uint64_t last_input_event_ = ~uint64_t(0);
    std::vector<Out> outs_;
    std::vector<In> ins_;
};

// Compiled protocol run: owns the simulator, the event log and the node
// runtimes for one seeded execution.
class ProtocolRun {
public:
    ProtocolRun(const MultiAutomaton& pi, const Topology& topo, SystemParams sys, uint64_t seed)
        : pi_(pi), langs_(pi.languages()), sim_(topo, sys) {
        validate_protocol(pi_, topo);
        sim_.set_pi_source(automaton_text::print(pi_));
        Rng master(seed);
        for (unsigned u = 0; u < pi_.n; ++u) {
            nodes_.push_back(std::make_unique<ProtocolNode>(int(u), &pi_, sim_, &langs_,
                                                            master.fork(u), &log_));
            sim_.attach(nodes_.back().get());
        }
    }

    Simulator& sim() { return sim_; }
    const Simulator& sim() const { return sim_; }
    EventLog& log() { return log_; }
    const EventLog& log() const { return log_; }
    const MultiAutomaton& pi() const { return pi_; }
    const std::vector<std::unique_ptr<ProtocolNode>>& nodes() const { return nodes_; }

    Simulator::RunResult run(uint64_t max_steps) { return sim_.run(max_steps); }

private:
    MultiAutomaton pi_;
    std::map<std::pair<int, int>, PrefixFreeLanguage> langs_;
    Simulator sim_;
    EventLog log_;
    std::vector<std::unique_ptr<ProtocolNode>> nodes_;
};

} // namespace hardwire
