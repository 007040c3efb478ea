#pragma once

// Prefix-free message languages. Each directed channel of the source protocol
// carries messages from a fixed prefix-free set, so a receiver can tell from
// an accumulated prefix whether a message is complete. Languages here are the
// finite per-edge message sets, stored as a bit trie.

#include <stdexcept>
#include <vector>

#include "bits.hpp"

namespace hardwire {

enum class LangClass : uint8_t { Complete, ProperPrefix, Invalid };

class PrefixFreeLanguage {
public:
    PrefixFreeLanguage() { nodes_.push_back({}); }

    // Insert a member. Throws if the set would stop being prefix-free or the
    // word is empty.
    void insert(const BitString& s) {
        if (s.empty()) throw std::invalid_argument("language: empty message");
        size_t cur = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            if (nodes_[cur].member)
                throw std::invalid_argument("language: member is a prefix of another");
            int b = s.get(i);
            if (nodes_[cur].child[b] == 0) {
                nodes_[cur].child[b] = uint32_t(nodes_.size());
                nodes_.push_back({});
            }
            cur = nodes_[cur].child[b];
        }
        if (nodes_[cur].child[0] || nodes_[cur].child[1])
            throw std::invalid_argument("language: member is a prefix of another");
        nodes_[cur].member = true;
        ++count_;
    }

    LangClass classify(const BitString& s) const {
        size_t cur = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            uint32_t next = nodes_[cur].child[s.get(i)];
            if (next == 0) return LangClass::Invalid;
            cur = next;
        }
        if (nodes_[cur].member) return LangClass::Complete;
        return LangClass::ProperPrefix; // trie nodes only exist on paths to members
    }

    bool contains(const BitString& s) const { return classify(s) == LangClass::Complete; }
    size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

private:
    struct Node {
        uint32_t child[2] = {0, 0};
        bool member = false;
    };
    std::vector<Node> nodes_;
    size_t count_ = 0;
};

} // namespace hardwire
