#pragma once

// Per-round security and sizing parameters, and the global round schedule.
// Everything here is a pure function of (n, delta, r): every node computes
// the same word length and slot boundaries from the shared clock.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "amd.hpp"
#include "ecc.hpp"

namespace hardwire {

// ceil(log2(a/b)) for positive integers, exact.
inline unsigned ceil_log2_ratio(__uint128_t a, __uint128_t b) {
    unsigned k = 0;
    __uint128_t rhs = b;
    while (rhs < a) {
        rhs <<= 1;
        ++k;
        if (k > 120) throw std::overflow_error("ceil_log2_ratio");
    }
    return k;
}

struct SystemParams {
    unsigned n = 2;
    double delta = 0.1;
    // delta as an exact fraction (defaults to round(delta*1e9)/1e9, which is
    // exact for config literals with at most 9 decimal places)
    uint64_t delta_num = 0, delta_den = 0;

    SystemParams() { normalize(); }
    SystemParams(unsigned n_, double delta_) : n(n_), delta(delta_) { normalize(); }

    void normalize() {
        if (n < 2) throw std::invalid_argument("SystemParams: n must be >= 2");
        if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("SystemParams: delta outside (0,1)");
        if (delta_den == 0) {
            delta_den = 1000000000ull;
            delta_num = uint64_t(std::llround(delta * 1e9));
            if (delta_num == 0) delta_num = 1;
        }
    }
};

struct RoundParams {
    unsigned n;
    double delta;
    uint64_t round;     // r >= 1
    size_t word_len;    // w_r
    unsigned key_len;   // kappa_r
    double eta_r;       // AMD strength for the round
    size_t pad_len;     // guaranteed random padding bits
    size_t chunk_field; // bit width of the chunk-length field

    AmdStrength amd_strength() const { return AmdStrength(eta_r); }
};

namespace detail {

inline unsigned ceil_log2_double(double x) {
    if (!(x > 0)) throw std::invalid_argument("ceil_log2_double");
    double l = std::log2(x);
    if (l <= 0) return 0;
    return unsigned(std::ceil(l));
}

// serialized payload sizes; layouts are defined in payload.hpp
inline size_t ser_len_key_request(unsigned kappa) { return 2 + kappa; }
inline size_t ser_len_key_reply(unsigned kappa) { return 2 + 2 * size_t(kappa); }
inline size_t ser_len_chunk(unsigned kappa, size_t len_field) {
    return 2 + len_field + kappa + 1 + size_t(kappa);
}
inline size_t ser_len_raw(unsigned kappa) { return 2 + size_t(kappa); }

} // namespace detail

inline RoundParams round_params(const SystemParams& sys, uint64_t r) {
    if (r < 1) throw std::invalid_argument("round_params: r must be >= 1");
    const double pi = std::numbers::pi;
    const double sqrt_delta = std::sqrt(sys.delta);

    RoundParams p{};
    p.n = sys.n;
    p.delta = sys.delta;
    p.round = r;

    p.eta_r = sys.delta / (2.0 * sys.n * sys.n * pi * pi * double(r) * double(r));
    p.key_len = 2 * detail::ceil_log2_double(4.0 * sys.n * pi * double(r) / sqrt_delta);
    p.pad_len = 38 * detail::ceil_log2_double(2.0 * sys.n * pi * double(r) / sqrt_delta);
    if (p.pad_len < 95) p.pad_len = 95; // the e^(-b/19) silence bound needs b >= 95

    p.chunk_field = std::bit_width(uint64_t(p.key_len)); // encodes 0..kappa

    // word length: the Eq-style base term, or whatever the largest payload
    // actually needs, whichever is bigger
    const unsigned base_log =
        ceil_log2_ratio(__uint128_t(sys.n) * r * sys.delta_den, sys.delta_num);
    const size_t base = 300 * size_t(base_log);

    const unsigned amd_tag = AmdStrength(p.eta_r).tag_bits();
    const size_t max_ser = detail::ser_len_chunk(p.key_len, p.chunk_field);
    const size_t need = ec_encoded_len(max_ser + amd_tag) + p.pad_len;
    p.word_len = base > need ? base : need;
    return p;
}

// Round start steps: tau(1) = 1, tau(r) = tau(r-1) + 4*w_{r-1}.
// Clock steps are 1-based throughout the simulator.
class Schedule {
public:
    explicit Schedule(SystemParams sys) : sys_(sys) {
        tau_.push_back(0); // unused index 0
        tau_.push_back(1);
        params_.push_back(round_params(sys_, 1));
    }

    const SystemParams& sys() const { return sys_; }

    uint64_t tau(uint64_t r) {
        grow(r);
        return tau_[size_t(r)];
    }

    const RoundParams& params(uint64_t r) {
        grow(r);
        return params_[size_t(r - 1)];
    }

    struct Position {
        uint64_t round;
        unsigned slot;   // 0..3
        uint64_t offset; // within the slot
        size_t word_len;
    };

    Position locate(uint64_t step) {
        if (step < 1) throw std::invalid_argument("Schedule: steps are 1-based");
        // rounds grow monotonically; scan from the cached cursor
        while (tau_.back() <= step) grow(uint64_t(tau_.size()));
        uint64_t r = cursor_;
        if (!(tau_[size_t(r)] <= step && (r + 1 < tau_.size() && step < tau_[size_t(r + 1)]))) {
            // binary search
            size_t lo = 1, hi = tau_.size() - 1;
            while (lo + 1 < hi) {
                size_t mid = (lo + hi) / 2;
                if (tau_[mid] <= step) lo = mid; else hi = mid;
            }
            r = tau_[hi] <= step ? hi : lo;
            cursor_ = r;
        }
        const uint64_t off = step - tau_[size_t(r)];
        const size_t w = params_[size_t(r - 1)].word_len;
        return Position{r, unsigned(off / w), off % w, w};
    }

private:
    void grow(uint64_t r) {
        while (tau_.size() <= size_t(r) + 1) {
            uint64_t last = uint64_t(tau_.size()) - 1;
            tau_.push_back(tau_[size_t(last)] + 4 * uint64_t(params_[size_t(last - 1)].word_len));
            params_.push_back(round_params(sys_, last + 1));
        }
    }

    SystemParams sys_;
    std::vector<uint64_t> tau_;
    std::vector<RoundParams> params_;
    uint64_t cursor_ = 1;
};

} // namespace hardwire
