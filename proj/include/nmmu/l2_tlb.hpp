#pragma once

#include "nmmu/tlb.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nmmu {

struct L2SizeConfig {
    bool enabled = false;
    size_t entries = 0;
    size_t ways = 4;
    friend bool operator==(const L2SizeConfig&, const L2SizeConfig&) = default;
};

struct L2Config {
    L2SizeConfig size4k{true, 128, 4};
    L2SizeConfig size2m{false, 32, 4};
    uint32_t lookupLatencyCycles = 2;

    // sets = entries / ways must be a power of two >= 1, ways a power of
    // two, and at least one size enabled. Throws SimError(InvalidConfig).
    void validate() const;
    friend bool operator==(const L2Config&, const L2Config&) = default;
};

enum class L2FsmState : uint8_t { Flush, Idle, Read, Update };
std::string_view l2StateName(L2FsmState s);

// Set-associative unified L2 TLB. 4 KiB and 2 MiB translations live in
// separate structures probed in the same step; 1 GiB translations are
// never stored. Every flush is a flush-all.
class L2Tlb {
public:
    struct Hit {
        TlbEntry entry;
        uint32_t latencyCycles;
    };
    using TransitionObserver = std::function<void(L2FsmState from, L2FsmState to)>;

    // Comes out of reset through Flush into Idle.
    explicit L2Tlb(const L2Config& config, TransitionObserver observer = {});

    std::optional<Hit> lookup(uint64_t vpn, Asid asid, Vmid vmid, bool vBit);

    // Silent no-op when the entry's merged size has no enabled structure.
    std::optional<TlbEntry> insert(const TlbEntry& entry);

    size_t flush();

    [[nodiscard]] L2FsmState state() const { return state_; }
    [[nodiscard]] const L2Config& config() const { return config_; }
    [[nodiscard]] size_t size() const;
    [[nodiscard]] bool hasStructure(PageSize s) const { return structureFor(s) != nullptr; }
    [[nodiscard]] size_t sets(PageSize s) const;
    [[nodiscard]] size_t setIndex(PageSize s, uint64_t vpn) const;
    // Contents of one set, for inspection.
    [[nodiscard]] const PlruArray<TlbEntry>& set(PageSize s, size_t index) const;
    [[nodiscard]] std::vector<TlbEntry> entries(PageSize s) const;

private:
    struct Structure {
        PageSize size;
        std::vector<PlruArray<TlbEntry>> sets;
    };

    void transition(L2FsmState next);
    [[nodiscard]] const Structure* structureFor(PageSize s) const;
    [[nodiscard]] Structure* structureFor(PageSize s);

    L2Config config_;
    std::vector<Structure> structures_;
    L2FsmState state_ = L2FsmState::Flush;
    TransitionObserver observer_;
};

}  // namespace nmmu
