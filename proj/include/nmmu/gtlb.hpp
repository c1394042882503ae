#pragma once

#include "nmmu/arch.hpp"
#include "nmmu/plru.hpp"

#include <optional>
#include <vector>

namespace nmmu {

// Intermediate GPA->HPA translation kept at the G-stage leaf's own size.
struct GtlbEntry {
    uint64_t gppn = 0;  // gpa >> 12, bits below `size` cleared
    Vmid vmid = 0;
    Pte hostPte;
    PageSize size = PageSize::Size4K;

    [[nodiscard]] bool coversGppn(uint64_t q) const {
        const unsigned shift = kVpnBits * pageLevel(size);
        return (q >> shift) == (gppn >> shift);
    }
    [[nodiscard]] bool coversGpa(uint64_t gpa) const { return coversGppn(gpa >> kPageShift); }
    [[nodiscard]] uint64_t hpaFor(uint64_t gpa) const {
        const uint64_t mask = pageMask(size);
        return (hostPte.address() & ~mask) | (gpa & mask);
    }

    friend bool operator==(const GtlbEntry&, const GtlbEntry&) = default;
};

struct GtlbConfig {
    size_t entries = 8;

    // Power of two within [8, 16]; throws SimError(InvalidConfig).
    void validate() const;
    friend bool operator==(const GtlbConfig&, const GtlbConfig&) = default;
};

class Gtlb {
public:
    explicit Gtlb(const GtlbConfig& config);

    std::optional<GtlbEntry> lookup(uint64_t gppn, Vmid vmid);
    std::optional<GtlbEntry> insert(const GtlbEntry& entry);
    // Absent filters are wildcards; (nullopt, nullopt) clears everything.
    size_t flush(std::optional<Vmid> vmid, std::optional<uint64_t> gpa);

    [[nodiscard]] size_t size() const { return array_.size(); }
    [[nodiscard]] size_t capacity() const { return array_.capacity(); }
    [[nodiscard]] size_t nextVictim() const { return array_.nextVictim(); }
    [[nodiscard]] const PlruArray<GtlbEntry>& storage() const { return array_; }
    [[nodiscard]] std::vector<GtlbEntry> entries() const;

private:
    PlruArray<GtlbEntry> array_;
};

}  // namespace nmmu
