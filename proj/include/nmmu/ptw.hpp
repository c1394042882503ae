#pragma once

#include "nmmu/arch.hpp"
#include "nmmu/gtlb.hpp"
#include "nmmu/memory.hpp"
#include "nmmu/tlb.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

namespace nmmu {

enum class WalkStage : uint8_t { SingleStage, VsStage, GStageIntermed, GStageFinal };
enum class FaultKind : uint8_t { PageFault, GuestPageFault, AccessFault };

std::string_view walkStageName(WalkStage s);
std::string_view faultKindName(FaultKind k);

// GuestPageFault always carries the guest-physical address that failed
// (the htval payload). AccessFault marks a PTE read from memory that
// does not exist.
struct TranslationFault {
    FaultKind kind = FaultKind::PageFault;
    AccessType access = AccessType::Load;
    WalkStage stage = WalkStage::SingleStage;
    uint64_t va = 0;
    std::optional<uint64_t> gpa;

    friend bool operator==(const TranslationFault&, const TranslationFault&) = default;
};

struct WalkStats {
    uint64_t memAccesses = 0;
    uint64_t gtlbHits = 0;
    uint64_t gtlbMisses = 0;
    uint64_t cycles = 0;

    WalkStats& operator+=(const WalkStats& o) {
        memAccesses += o.memAccesses;
        gtlbHits += o.gtlbHits;
        gtlbMisses += o.gtlbMisses;
        cycles += o.cycles;
        return *this;
    }
    friend bool operator==(const WalkStats&, const WalkStats&) = default;
};

struct WalkResult {
    uint64_t hpa = 0;
    uint64_t gpa = 0;  // VS-stage output; equals va for single-stage walks
    std::optional<Pte> vsPte;
    std::optional<Pte> gPte;
    PageSize vsSize = PageSize::Size4K;
    std::optional<PageSize> gSize;
    PageSize mergedSize = PageSize::Size4K;
    WalkStats stats;

    [[nodiscard]] bool global() const { return vsPte && vsPte->g; }
    [[nodiscard]] TlbEntry toTlbEntry(uint64_t va, Asid asid, Vmid vmid, bool vBit) const;
};

struct GStageResult {
    uint64_t hpa = 0;
    std::optional<Pte> gPte;  // absent when hgatp is Bare
    std::optional<PageSize> gSize;
    WalkStats stats;
};

template <class T>
using WalkOutcome = std::variant<T, TranslationFault>;

enum class GStagePurpose : uint8_t { Intermed, Final };

// Cycle model: memAccesses * memLatencyCycles + walkOverheadCycles per walk.
struct WalkCostModel {
    uint32_t memLatencyCycles = 20;
    uint32_t walkOverheadCycles = 2;
};

// Nested page-table walker. One walk in flight at a time; owns the GTLB.
// The GTLB is only consulted for G-stage translations of VS-stage PTE
// addresses, never for the final guest-physical address.
class PageTableWalker {
public:
    PageTableWalker(PhysicalMemory& mem, std::optional<GtlbConfig> gtlb, WalkCostModel cost = {});

    // Sv39 walk through satp (V=0).
    WalkOutcome<WalkResult> walkSingle(VirtualAddress va, AccessType access, PrivilegeMode priv,
                                       const AtpCsr& satp);

    // Standalone G-stage translation; Bare hgatp passes gpa through.
    WalkOutcome<GStageResult> walkGStage(uint64_t gpa, AccessType access, const AtpCsr& hgatp,
                                         GStagePurpose purpose);

    // Two-stage walk for V=1. A Bare vsatp translates va as a gpa; a Bare
    // hgatp leaves a plain VS-stage walk.
    WalkOutcome<WalkResult> walkNested(VirtualAddress va, AccessType access, PrivilegeMode priv,
                                       const AtpCsr& vsatp, const AtpCsr& hgatp);

    // Accounting of the most recent walk, faulting or not.
    [[nodiscard]] const WalkStats& lastStats() const { return stats_; }

    [[nodiscard]] Gtlb* gtlb() { return gtlb_ ? &*gtlb_ : nullptr; }
    [[nodiscard]] const Gtlb* gtlb() const { return gtlb_ ? &*gtlb_ : nullptr; }
    [[nodiscard]] const WalkCostModel& costModel() const { return cost_; }

private:
    WalkOutcome<WalkResult> firstStage(VirtualAddress va, AccessType access, PrivilegeMode priv,
                                       const AtpCsr& atp, const AtpCsr* hgatp, WalkStage stage);
    WalkOutcome<GStageResult> gStage(uint64_t gpa, AccessType access, const AtpCsr& hgatp,
                                     GStagePurpose purpose, uint64_t va);
    std::optional<uint64_t> load(uint64_t hpa);
    void begin();
    void finish();

    PhysicalMemory& mem_;
    std::optional<Gtlb> gtlb_;
    WalkCostModel cost_;
    WalkStats stats_;
};

}  // namespace nmmu
