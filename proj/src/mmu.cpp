#include "nmmu/mmu.hpp"

#include "nmmu/errors.hpp"

#include <string>

namespace nmmu {

std::string_view servedByName(ServedBy s) {
    switch (s) {
    case ServedBy::Bypass: return "bypass";
    case ServedBy::L1: return "l1";
    case ServedBy::L2: return "l2";
    case ServedBy::Walk: return "walk";
    }
    return "?";
}

void MmuConfig::validate() const {
    auto l1Ok = [](size_t n) { return n == 16 || n == 32 || n == 64; };
    if (!l1Ok(itlbEntries) || !l1Ok(dtlbEntries))
        throw SimError(ErrorCode::InvalidConfig,
                       "L1 TLB entries must be 16, 32 or 64 (config '" + name + "')");
    if (gtlb)
        gtlb->validate();
    if (l2)
        l2->validate();
}

namespace {
const MmuConfig& checked(const MmuConfig& c) {
    c.validate();
    return c;
}
}  // namespace

Mmu::Mmu(const MmuConfig& config, PhysicalMemory& mem)
    : config_(checked(config)),
      itlb_(config.itlbEntries),
      dtlb_(config.dtlbEntries),
      walker_(mem, config.gtlb, {config.memLatencyCycles, config.walkOverheadCycles}) {
    if (config.l2)
        l2_.emplace(*config.l2);
}

std::optional<TranslationFault> checkCachedEntry(const TlbEntry& e, uint64_t va,
                                                 AccessType access, PrivilegeMode priv) {
    if (e.vsPte) {
        const auto stage = e.vBit ? TranslationStage::VsStage : TranslationStage::SingleStage;
        if (checkPermissions(*e.vsPte, access, priv, stage) || !accessedDirtyOk(*e.vsPte, access))
            return TranslationFault{FaultKind::PageFault, access,
                                    e.vBit ? WalkStage::VsStage : WalkStage::SingleStage, va,
                                    std::nullopt};
    }
    if (e.gPte) {
        if (checkPermissions(*e.gPte, access, PrivilegeMode::User, TranslationStage::GStage) ||
            !accessedDirtyOk(*e.gPte, access))
            return TranslationFault{FaultKind::GuestPageFault, access, WalkStage::GStageFinal, va,
                                    e.gpaFor(va)};
    }
    return std::nullopt;
}

TranslateResult Mmu::bypass(uint64_t va, AccessType access, bool vBit) const {
    TranslateResult r{HostPhysicalAddress{va}, {}};
    r.stats.servedBy = ServedBy::Bypass;
    r.stats.cycles = config_.accessCycles;
    if (va >= kPaLimit)
        r.outcome = vBit ? TranslationFault{FaultKind::AccessFault, access,
                                            WalkStage::GStageFinal, va, va}
                         : TranslationFault{FaultKind::AccessFault, access,
                                            WalkStage::SingleStage, va, std::nullopt};
    return r;
}

TranslateResult Mmu::translate(uint64_t va, AccessType access, const TranslationContext& ctx) {
    bool vBit = ctx.vBit;
    PrivilegeMode priv = ctx.priv;
    if (ctx.hypLdSt) {
        vBit = true;
        priv = ctx.spvp ? PrivilegeMode::Supervisor : PrivilegeMode::User;
    }
    if (priv == PrivilegeMode::Machine)
        return bypass(va, access, false);
    if (!vBit && ctx.satp.isBare())
        return bypass(va, access, false);
    if (vBit && ctx.vsatp.isBare() && ctx.hgatp.isBare())
        return bypass(va, access, true);

    const Asid asid = vBit ? ctx.vsatp.tag : ctx.satp.tag;
    const Vmid vmid = vBit ? static_cast<Vmid>(ctx.hgatp.tag & kVmidMask) : 0;
    const uint64_t vpn = va >> kPageShift;

    TranslateResult r{HostPhysicalAddress{0}, {}};
    auto fromEntry = [&](const TlbEntry& e) {
        if (auto f = checkCachedEntry(e, va, access, priv))
            r.outcome = *f;
        else
            r.outcome = HostPhysicalAddress{e.hpaFor(va)};
    };

    Tlb& l1 = l1For(access);
    if (auto hit = l1.lookup(vpn, asid, vmid, vBit)) {
        r.stats.servedBy = ServedBy::L1;
        r.stats.l1Hit = true;
        r.stats.cycles = config_.accessCycles;
        fromEntry(*hit);
        return r;
    }

    // The L2 probe and the walk start together; an L2 hit cancels the walk
    // before it touches memory or the GTLB.
    if (l2_) {
        r.stats.l2Lookup = true;
        if (auto hit = l2_->lookup(vpn, asid, vmid, vBit)) {
            r.stats.servedBy = ServedBy::L2;
            r.stats.l2Hit = true;
            r.stats.cycles = config_.accessCycles + hit->latencyCycles;
            l1.insert(hit->entry);
            fromEntry(hit->entry);
            return r;
        }
    }

    r.stats.servedBy = ServedBy::Walk;
    const auto out = vBit ? walker_.walkNested({va}, access, priv, ctx.vsatp, ctx.hgatp)
                          : walker_.walkSingle({va}, access, priv, ctx.satp);
    const WalkStats& ws = walker_.lastStats();
    r.stats.memAccesses = ws.memAccesses;
    r.stats.gtlbHits = ws.gtlbHits;
    r.stats.gtlbMisses = ws.gtlbMisses;
    r.stats.cycles = config_.accessCycles + ws.cycles;
    if (const auto* f = std::get_if<TranslationFault>(&out)) {
        r.outcome = *f;
        return r;
    }
    const auto& w = std::get<WalkResult>(out);
    const TlbEntry e = w.toTlbEntry(va, asid, vmid, vBit);
    l1.insert(e);
    if (l2_)
        l2_->insert(e);
    r.outcome = HostPhysicalAddress{w.hpa};
    return r;
}

TranslateResult Mmu::hypAccess(uint64_t va, AccessType access, bool spvp,
                               const TranslationContext& csr) {
    TranslationContext ctx = csr;
    ctx.hypLdSt = true;
    ctx.spvp = spvp;
    return translate(va, access, ctx);
}

void Mmu::fence(const Fence& f) {
    FlushSpec spec;
    switch (f.kind) {
    case Fence::Kind::SfenceVma:
        spec.domain = FlushSpec::Domain::Host;
        spec.asid = f.asid;
        spec.va = f.addr;
        break;
    case Fence::Kind::HfenceVvma:
        spec.domain = FlushSpec::Domain::Guest;
        spec.asid = f.asid;
        spec.va = f.addr;
        break;
    case Fence::Kind::HfenceGvma:
        spec.domain = FlushSpec::Domain::Guest;
        spec.vmid = f.vmid;
        spec.gpa = f.addr;
        if (auto* g = walker_.gtlb())
            g->flush(f.vmid, f.addr);
        break;
    }
    itlb_.flush(spec);
    dtlb_.flush(spec);
    if (l2_)
        l2_->flush();
}

}  // namespace nmmu
