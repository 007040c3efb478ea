#pragma once

// Packed bit strings. The universal payload/channel unit: everything that
// travels on a lane or through a codec is a BitString.

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>
#include <stdexcept>
#include <bit>

namespace hardwire {

class BitString {
public:
    BitString() = default;

    explicit BitString(size_t nbits) : len_(nbits), w_((nbits + 63) / 64, 0) {}

    // Parse from a "0101" literal. Anything but 0/1 (spaces allowed) is an error.
    static BitString from_string(const std::string& s) {
        BitString b;
        for (char c : s) {
            if (c == ' ' || c == '_') continue;
            if (c == '0') b.push_back(0);
            else if (c == '1') b.push_back(1);
            else throw std::invalid_argument("BitString: bad literal char");
        }
        return b;
    }

    size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    int get(size_t i) const {
        return int((w_[i >> 6] >> (i & 63)) & 1u);
    }
    int operator[](size_t i) const { return get(i); }

    void set(size_t i, int v) {
        uint64_t m = uint64_t(1) << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }

    void push_back(int v) {
        if ((len_ & 63) == 0) w_.push_back(0);
        if (v) w_[len_ >> 6] |= uint64_t(1) << (len_ & 63);
        ++len_;
    }

    void append(const BitString& o) {
        for (size_t i = 0; i < o.len_; ++i) push_back(o.get(i));
    }

    // Substring s[i,j) with the clamp convention: j past the end reads as the end.
    BitString substr(size_t i, size_t j) const {
        if (j > len_) j = len_;
        BitString r;
        if (i >= j) return r;
        r.reserve_bits(j - i);
        for (size_t k = i; k < j; ++k) r.push_back(get(k));
        return r;
    }

    void resize(size_t nbits) {
        len_ = nbits;
        w_.resize((nbits + 63) / 64, 0);
        trim_tail();
    }

    BitString& operator^=(const BitString& o) {
        if (o.len_ != len_) throw std::invalid_argument("BitString: xor length mismatch");
        for (size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
        return *this;
    }
    friend BitString operator^(BitString a, const BitString& b) { a ^= b; return a; }

    bool operator==(const BitString& o) const {
        return len_ == o.len_ && w_ == o.w_;
    }
    bool operator!=(const BitString& o) const { return !(*this == o); }

    // Number of positions i with s[i] != s[i+1].
    size_t alternations() const {
        if (len_ < 2) return 0;
        size_t count = 0;
        size_t nw = w_.size();
        for (size_t i = 0; i < nw; ++i) {
            uint64_t x = w_[i] ^ (w_[i] >> 1);
            // carry the boundary bit from the next word
            if (i + 1 < nw) x ^= (w_[i + 1] & 1u) << 63;
            size_t hi = (i + 1) * 64;
            if (hi > len_) {
                size_t keep = len_ - 1 - i * 64; // valid pair positions in this word
                x &= keep >= 64 ? ~uint64_t(0) : ((uint64_t(1) << keep) - 1);
            } else if (hi == len_) {
                x &= ~(uint64_t(1) << 63);
            }
            count += size_t(std::popcount(x));
        }
        return count;
    }

    size_t count_ones() const {
        size_t c = 0;
        for (uint64_t w : w_) c += size_t(std::popcount(w));
        return c;
    }

    // Interpret bits [i, i+k) as an unsigned integer, LSB first. k <= 64.
    uint64_t read_uint(size_t i, size_t k) const {
        uint64_t v = 0;
        for (size_t b = 0; b < k; ++b) v |= uint64_t(get(i + b)) << b;
        return v;
    }
    void append_uint(uint64_t v, size_t k) {
        for (size_t b = 0; b < k; ++b) push_back(int((v >> b) & 1u));
    }

    std::string to_string() const {
        std::string s;
        s.reserve(len_);
        for (size_t i = 0; i < len_; ++i) s.push_back(get(i) ? '1' : '0');
        return s;
    }

    uint64_t hash() const {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ len_;
        for (uint64_t w : w_) {
            h ^= w;
            h *= 0xff51afd7ed558ccdull;
            h ^= h >> 33;
        }
        return h;
    }

    // Raw word access for bulk channel transfer. Tail bits beyond size() are zero.
    const std::vector<uint64_t>& words() const { return w_; }
    std::vector<uint64_t>& words_mut() { return w_; }

    void reserve_bits(size_t nbits) { w_.reserve((nbits + 63) / 64); }

    void clear() { len_ = 0; w_.clear(); }

private:
    void trim_tail() {
        if (len_ & 63) {
            uint64_t mask = (uint64_t(1) << (len_ & 63)) - 1;
            if (!w_.empty()) w_.back() &= mask;
        }
    }

    size_t len_ = 0;
    std::vector<uint64_t> w_;
};

// Lexicographic-by-bits order, used where deterministic ordering is needed.
inline bool bit_less(const BitString& a, const BitString& b) {
    size_t n = a.size() < b.size() ? a.size() : b.size();
    for (size_t i = 0; i < n; ++i) {
        int x = a.get(i), y = b.get(i);
        if (x != y) return x < y;
    }
    return a.size() < b.size();
}

// True iff a is a proper prefix of b.
inline bool is_proper_prefix(const BitString& a, const BitString& b) {
    if (a.size() >= b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.get(i) != b.get(i)) return false;
    return true;
}

} // namespace hardwire
