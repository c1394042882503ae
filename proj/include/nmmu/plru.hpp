#pragma once

#include "nmmu/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nmmu {

// Tree pseudo-LRU over a power-of-two number of ways. Nodes are stored
// heap-style (children of n at 2n+1, 2n+2). A bit of 0 sends the victim
// search left; touching a way points every bit on its path at the
// sibling subtree.
class TreePlru {
public:
    explicit TreePlru(size_t ways) : ways_(ways), bits_(ways > 1 ? ways - 1 : 0, 0) {
        if (ways == 0 || (ways & (ways - 1)))
            throw SimError(ErrorCode::InvalidConfig,
                           "PLRU needs a power-of-two way count, got " + std::to_string(ways));
    }

    [[nodiscard]] size_t ways() const { return ways_; }

    [[nodiscard]] size_t victim() const {
        size_t node = 0;
        while (node < ways_ - 1)
            node = bits_[node] == 0 ? 2 * node + 1 : 2 * node + 2;
        return node - (ways_ - 1);
    }

    void touch(size_t way) {
        size_t node = way + ways_ - 1;
        while (node > 0) {
            const size_t parent = (node - 1) / 2;
            bits_[parent] = (node == 2 * parent + 1) ? 1 : 0;
            node = parent;
        }
    }

    void reset() { std::fill(bits_.begin(), bits_.end(), 0); }

private:
    size_t ways_;
    std::vector<uint8_t> bits_;
};

// Fully-associative array of optional entries with tree-PLRU
// replacement. Insertion fills the lowest free way first and only
// consults the PLRU tree when every way is valid. Hits and insertions
// both touch.
template <class Entry>
class PlruArray {
public:
    explicit PlruArray(size_t ways) : slots_(ways), plru_(ways) {}

    [[nodiscard]] size_t capacity() const { return slots_.size(); }
    [[nodiscard]] size_t size() const { return used_; }
    [[nodiscard]] const std::optional<Entry>& slot(size_t way) const { return slots_[way]; }

    template <class Pred>
    [[nodiscard]] std::optional<size_t> find(Pred&& pred) const {
        for (size_t i = 0; i < slots_.size(); ++i)
            if (slots_[i] && pred(*slots_[i]))
                return i;
        return std::nullopt;
    }

    void touch(size_t way) { plru_.touch(way); }

    // Way the next insertion of a new tag would occupy.
    [[nodiscard]] size_t nextVictim() const {
        for (size_t i = 0; i < slots_.size(); ++i)
            if (!slots_[i])
                return i;
        return plru_.victim();
    }

    // `sameTag` identifies an existing entry to overwrite in place.
    template <class Pred>
    std::optional<Entry> insert(const Entry& entry, Pred&& sameTag) {
        std::optional<Entry> evicted;
        size_t way;
        if (auto hit = find(sameTag)) {
            way = *hit;
        } else {
            way = nextVictim();
            if (slots_[way])
                evicted = slots_[way];
            else
                ++used_;
        }
        slots_[way] = entry;
        plru_.touch(way);
        return evicted;
    }

    template <class Pred>
    size_t eraseIf(Pred&& pred) {
        size_t removed = 0;
        for (auto& s : slots_) {
            if (s && pred(*s)) {
                s.reset();
                ++removed;
            }
        }
        used_ -= removed;
        return removed;
    }

    size_t clear() {
        const size_t removed = used_;
        for (auto& s : slots_)
            s.reset();
        used_ = 0;
        return removed;
    }

    template <class Fn>
    void forEach(Fn&& fn) const {
        for (const auto& s : slots_)
            if (s)
                fn(*s);
    }

private:
    std::vector<std::optional<Entry>> slots_;
    TreePlru plru_;
    size_t used_ = 0;
};

}  // namespace nmmu
