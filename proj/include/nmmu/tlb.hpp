#pragma once

#include "nmmu/arch.hpp"
#include "nmmu/plru.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nmmu {

// One cached translation holding both stages' leaves. For V=0 entries
// `vsPte` is the single-stage leaf and there is no G-stage half. A
// missing `vsPte` on a V=1 entry means vsatp was Bare (guest-virtual ==
// guest-physical), in which case `vsSize` is 1 GiB so the merged size is
// the G-stage size.
struct TlbEntry {
    uint64_t vpn = 0;  // va >> 12, bits below mergedSize cleared
    Asid asid = 0;
    Vmid vmid = 0;
    bool vBit = false;
    bool global = false;
    std::optional<Pte> vsPte;
    PageSize vsSize = PageSize::Size4K;
    std::optional<Pte> gPte;
    std::optional<PageSize> gSize;
    PageSize mergedSize = PageSize::Size4K;
    uint64_t gpaBase = 0;  // guest-physical base at merged granularity
    uint64_t hpaBase = 0;  // host-physical base at merged granularity

    static PageSize mergeSizes(PageSize vs, std::optional<PageSize> g) {
        return g ? std::min(vs, *g) : vs;
    }

    [[nodiscard]] bool coversVpn(uint64_t queryVpn) const {
        const unsigned shift = kVpnBits * pageLevel(mergedSize);
        return (queryVpn >> shift) == (vpn >> shift);
    }
    [[nodiscard]] bool coversVa(uint64_t va) const { return coversVpn(va >> kPageShift); }
    [[nodiscard]] bool coversGpa(uint64_t gpa) const {
        if (!gPte)
            return false;
        const unsigned shift = pageShift(*gSize);
        return (gpa >> shift) == (gpaBase >> shift);
    }

    // Tag predicate shared by the L1 and L2 lookups.
    [[nodiscard]] bool matches(uint64_t queryVpn, Asid qAsid, Vmid qVmid, bool qVBit) const {
        if (vBit != qVBit || !coversVpn(queryVpn))
            return false;
        if (!global && asid != qAsid)
            return false;
        return !vBit || vmid == qVmid;
    }

    [[nodiscard]] bool sameTag(const TlbEntry& o) const {
        return vBit == o.vBit && asid == o.asid &&
               (!vBit || vmid == o.vmid) && mergedSize == o.mergedSize && vpn == o.vpn;
    }

    [[nodiscard]] uint64_t hpaFor(uint64_t va) const {
        return hpaBase | (va & pageMask(mergedSize));
    }
    [[nodiscard]] uint64_t gpaFor(uint64_t va) const {
        return gpaBase | (va & pageMask(mergedSize));
    }

    friend bool operator==(const TlbEntry&, const TlbEntry&) = default;
};

// Invalidation predicate. Every present filter must match; absent
// filters are wildcards. `asid` never matches global entries; `vmid`
// and `gpa` only ever match V=1 entries.
struct FlushSpec {
    enum class Domain : uint8_t { Any, Host, Guest };

    Domain domain = Domain::Any;
    std::optional<Asid> asid;
    std::optional<uint64_t> va;
    std::optional<Vmid> vmid;
    std::optional<uint64_t> gpa;

    static FlushSpec all() { return {}; }
    static FlushSpec allHost() { return {Domain::Host, {}, {}, {}, {}}; }
    static FlushSpec allGuest() { return {Domain::Guest, {}, {}, {}, {}}; }
    static FlushSpec byAsid(Asid a, bool guest) { return {domainFor(guest), a, {}, {}, {}}; }
    static FlushSpec byVaddr(uint64_t v, bool guest) { return {domainFor(guest), {}, v, {}, {}}; }
    static FlushSpec byAsidVaddr(Asid a, uint64_t v, bool guest) {
        return {domainFor(guest), a, v, {}, {}};
    }
    static FlushSpec byVmid(Vmid m) { return {Domain::Guest, {}, {}, m, {}}; }
    static FlushSpec byVmidGaddr(std::optional<Vmid> m, uint64_t g) {
        return {Domain::Guest, {}, {}, m, g};
    }

    [[nodiscard]] bool matches(const TlbEntry& e) const {
        if (domain == Domain::Host && e.vBit)
            return false;
        if (domain == Domain::Guest && !e.vBit)
            return false;
        if (asid && (e.global || e.asid != *asid))
            return false;
        if (va && !e.coversVa(*va))
            return false;
        if (vmid && (!e.vBit || e.vmid != *vmid))
            return false;
        if (gpa && (!e.vBit || !e.coversGpa(*gpa)))
            return false;
        return true;
    }

private:
    static Domain domainFor(bool guest) { return guest ? Domain::Guest : Domain::Host; }
};

// Fully-associative L1 TLB (ITLB or DTLB).
class Tlb {
public:
    // Throws SimError(InvalidConfig) unless `entries` is a power of two.
    explicit Tlb(size_t entries) : array_(entries) {}

    // A hit touches the PLRU state.
    std::optional<TlbEntry> lookup(uint64_t vpn, Asid asid, Vmid vmid, bool vBit);

    // Returns the displaced entry when a full TLB evicts.
    std::optional<TlbEntry> insert(const TlbEntry& entry);

    size_t flush(const FlushSpec& spec);

    [[nodiscard]] size_t size() const { return array_.size(); }
    [[nodiscard]] size_t capacity() const { return array_.capacity(); }
    [[nodiscard]] size_t nextVictim() const { return array_.nextVictim(); }
    [[nodiscard]] const PlruArray<TlbEntry>& storage() const { return array_; }
    [[nodiscard]] std::vector<TlbEntry> entries() const;

private:
    PlruArray<TlbEntry> array_;
};

}  // namespace nmmu
