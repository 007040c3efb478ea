#pragma once

// Versioned binary dump of a run record, so traces can be archived and
// re-validated later with `hardwire validate <file>`.

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "validate.hpp"

namespace hardwire {

namespace trace_io {

inline constexpr uint32_t kMagic = 0x52545748u; // "HWTR" little-endian
inline constexpr uint32_t kVersion = 1;

struct Writer {
    std::ostream& out;
    void u32(uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
    void u64(uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
    void f64(double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
    void str(const std::string& s) {
        u64(s.size());
        out.write(s.data(), std::streamsize(s.size()));
    }
    void bits(const BitString& b) {
        u64(b.size());
        for (uint64_t w : b.words()) u64(w);
    }
};

struct Reader {
    std::istream& in;
    uint32_t u32() {
        uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    double f64() {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    std::string str() {
        uint64_t n = u64();
        std::string s(n, '\0');
        in.read(s.data(), std::streamsize(n));
        return s;
    }
    BitString bits() {
        uint64_t n = u64();
        BitString b{size_t(n)};
        for (auto& w : b.words_mut()) w = u64();
        b.resize(size_t(n));
        return b;
    }
};

} // namespace trace_io

inline void dump_record(const RunRecord& rec, std::ostream& out) {
    trace_io::Writer w{out};
    w.u32(trace_io::kMagic);
    w.u32(trace_io::kVersion);
    w.str(automaton_text::print(rec.pi));
    w.u32(rec.n);
    w.f64(rec.delta);
    w.u64(rec.seed);
    w.str(rec.adversary_kind);
    w.u64(rec.last_step);
    w.u64(rec.rounds);
    w.u32(rec.truncated ? 1 : 0);
    w.u64(rec.budget_total);
    w.u64(rec.budget_spent);
    w.u64(rec.driven_bits);
    w.u64(rec.nodes.size());
    for (const auto& n : rec.nodes) {
        w.u32((n.terminated_pi ? 1u : 0u) | (n.halted ? 2u : 0u) |
              (n.output.has_value() ? 4u : 0u));
        w.u64(n.terminated_round);
        w.bits(n.output ? *n.output : BitString());
    }
    w.u64(rec.log.size());
    for (const Event& e : rec.log.events) {
        w.u32(uint32_t(e.type));
        w.u32(uint32_t(uint16_t(e.node)) | (uint32_t(uint16_t(e.peer)) << 16));
        w.u32(uint32_t(uint16_t(e.initiator)) | (uint32_t(e.slot) << 16) |
              (uint32_t(e.info) << 24));
        w.u64(e.step);
        w.u64(e.round);
        w.u64(e.aux);
        w.bits(e.msg);
    }
}

inline RunRecord load_record(std::istream& in) {
    trace_io::Reader r{in};
    if (r.u32() != trace_io::kMagic) throw std::runtime_error("trace: bad magic");
    if (r.u32() != trace_io::kVersion) throw std::runtime_error("trace: unsupported version");
    RunRecord rec;
    rec.pi = automaton_text::parse(r.str());
    rec.n = r.u32();
    rec.delta = r.f64();
    rec.seed = r.u64();
    rec.adversary_kind = r.str();
    rec.last_step = r.u64();
    rec.rounds = r.u64();
    rec.truncated = r.u32() != 0;
    rec.budget_total = r.u64();
    rec.budget_spent = r.u64();
    rec.driven_bits = r.u64();
    uint64_t nn = r.u64();
    for (uint64_t i = 0; i < nn; ++i) {
        NodeOutcome o;
        uint32_t flags = r.u32();
        o.terminated_pi = flags & 1;
        o.halted = flags & 2;
        o.terminated_round = r.u64();
        BitString out = r.bits();
        if (flags & 4) o.output = out;
        rec.nodes.push_back(std::move(o));
    }
    uint64_t ne = r.u64();
    for (uint64_t i = 0; i < ne; ++i) {
        Event e;
        e.type = EventType(r.u32());
        uint32_t np = r.u32();
        e.node = int16_t(np & 0xffff);
        e.peer = int16_t(np >> 16);
        uint32_t isi = r.u32();
        e.initiator = int16_t(isi & 0xffff);
        e.slot = uint8_t((isi >> 16) & 0xff);
        e.info = uint8_t(isi >> 24);
        e.step = r.u64();
        e.round = r.u64();
        e.aux = r.u64();
        e.msg = r.bits();
        rec.log.events.push_back(std::move(e));
    }
    if (!in) throw std::runtime_error("trace: short read");
    return rec;
}

inline void dump_record_file(const RunRecord& rec, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("trace: cannot open " + path);
    dump_record(rec, f);
}

inline RunRecord load_record_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("trace: cannot open " + path);
    return load_record(f);
}

} // namespace hardwire
