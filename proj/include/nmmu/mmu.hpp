#pragma once

#include "nmmu/arch.hpp"
#include "nmmu/gtlb.hpp"
#include "nmmu/l2_tlb.hpp"
#include "nmmu/memory.hpp"
#include "nmmu/ptw.hpp"
#include "nmmu/tlb.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace nmmu {

struct MmuConfig {
    std::string name = "cva6-16";
    size_t itlbEntries = 16;
    size_t dtlbEntries = 16;
    std::optional<GtlbConfig> gtlb;
    std::optional<L2Config> l2;
    bool sstcEnabled = false;
    uint32_t memLatencyCycles = 20;
    uint32_t walkOverheadCycles = 2;
    // Hypervisor translations issued per timer event when Sstc is off.
    uint32_t timerBurstAccesses = 50;
    // Base cost of every translated access, so an L1 hit is not free.
    uint32_t accessCycles = 1;

    // L1 sizes in {16, 32, 64}; nested configs validated too.
    void validate() const;
    friend bool operator==(const MmuConfig&, const MmuConfig&) = default;
};

// CSR snapshot plus execution mode. ASID comes from satp (V=0) or vsatp
// (V=1); VMID from hgatp.
struct TranslationContext {
    PrivilegeMode priv = PrivilegeMode::Supervisor;
    bool vBit = false;
    bool hypLdSt = false;  // HLV/HSV: run as V=1 in the mode picked by spvp
    bool spvp = false;
    AtpCsr satp = AtpCsr::bare();
    AtpCsr vsatp = AtpCsr::bare();
    AtpCsr hgatp = AtpCsr::bare();
};

enum class ServedBy : uint8_t { Bypass, L1, L2, Walk };
std::string_view servedByName(ServedBy s);

struct AccessStats {
    ServedBy servedBy = ServedBy::Bypass;
    bool l1Hit = false;
    bool l2Lookup = false;
    bool l2Hit = false;
    uint64_t memAccesses = 0;
    uint64_t cycles = 0;
    uint64_t gtlbHits = 0;
    uint64_t gtlbMisses = 0;
};

struct TranslateResult {
    std::variant<HostPhysicalAddress, TranslationFault> outcome;
    AccessStats stats;

    [[nodiscard]] bool ok() const { return std::holds_alternative<HostPhysicalAddress>(outcome); }
    [[nodiscard]] uint64_t hpa() const { return std::get<HostPhysicalAddress>(outcome).raw; }
    [[nodiscard]] const TranslationFault& fault() const {
        return std::get<TranslationFault>(outcome);
    }
};

struct Fence {
    enum class Kind : uint8_t { SfenceVma, HfenceVvma, HfenceGvma };
    Kind kind = Kind::SfenceVma;
    std::optional<Asid> asid;     // sfence/hfence.vvma
    std::optional<uint64_t> addr;  // va, or gpa for hfence.gvma
    std::optional<Vmid> vmid;     // hfence.gvma

    static Fence sfence(std::optional<Asid> asid = {}, std::optional<uint64_t> va = {}) {
        return {Kind::SfenceVma, asid, va, {}};
    }
    static Fence hfenceVvma(std::optional<Asid> asid = {}, std::optional<uint64_t> va = {}) {
        return {Kind::HfenceVvma, asid, va, {}};
    }
    static Fence hfenceGvma(std::optional<Vmid> vmid = {}, std::optional<uint64_t> gpa = {}) {
        return {Kind::HfenceGvma, {}, gpa, vmid};
    }
};

class Mmu {
public:
    // `mem` must outlive the MMU. Throws SimError(InvalidConfig).
    Mmu(const MmuConfig& config, PhysicalMemory& mem);

    TranslateResult translate(uint64_t va, AccessType access, const TranslationContext& ctx);
    // Hypervisor load/store on behalf of the guest selected by spvp.
    TranslateResult hypAccess(uint64_t va, AccessType access, bool spvp,
                              const TranslationContext& csr);
    void fence(const Fence& f);

    [[nodiscard]] const MmuConfig& config() const { return config_; }
    [[nodiscard]] const Tlb& itlb() const { return itlb_; }
    [[nodiscard]] const Tlb& dtlb() const { return dtlb_; }
    [[nodiscard]] const L2Tlb* l2() const { return l2_ ? &*l2_ : nullptr; }
    [[nodiscard]] const Gtlb* gtlb() const { return walker_.gtlb(); }
    [[nodiscard]] PageTableWalker& walker() { return walker_; }

    // Direct fills for tests that need a populated TLB hierarchy.
    void fillL1(AccessType access, const TlbEntry& e) { l1For(access).insert(e); }
    void fillL2(const TlbEntry& e) {
        if (l2_)
            l2_->insert(e);
    }

private:
    Tlb& l1For(AccessType a) { return a == AccessType::Fetch ? itlb_ : dtlb_; }
    TranslateResult bypass(uint64_t va, AccessType access, bool vBit) const;

    MmuConfig config_;
    Tlb itlb_;
    Tlb dtlb_;
    std::optional<L2Tlb> l2_;
    PageTableWalker walker_;
};

// Re-checks a cached translation for a new access: the VS (or
// single-stage) leaf first, then the G-stage leaf.
std::optional<TranslationFault> checkCachedEntry(const TlbEntry& e, uint64_t va,
                                                 AccessType access, PrivilegeMode priv);

}  // namespace nmmu
