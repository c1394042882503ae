#include "nmmu/ptw.hpp"

#include "nmmu/errors.hpp"

namespace nmmu {

std::string_view walkStageName(WalkStage s) {
    switch (s) {
    case WalkStage::SingleStage: return "single";
    case WalkStage::VsStage: return "vs";
    case WalkStage::GStageIntermed: return "g-intermed";
    case WalkStage::GStageFinal: return "g-final";
    }
    return "?";
}

std::string_view faultKindName(FaultKind k) {
    switch (k) {
    case FaultKind::PageFault: return "page-fault";
    case FaultKind::GuestPageFault: return "guest-page-fault";
    case FaultKind::AccessFault: return "access-fault";
    }
    return "?";
}

TlbEntry WalkResult::toTlbEntry(uint64_t va, Asid asid, Vmid vmid, bool vBit) const {
    TlbEntry e;
    const uint64_t mask = pageMask(mergedSize);
    e.vpn = (va & ~mask) >> kPageShift;
    e.asid = asid;
    e.vmid = vBit ? vmid : 0;
    e.vBit = vBit;
    e.global = global();
    e.vsPte = vsPte;
    e.vsSize = vsSize;
    e.gPte = gPte;
    e.gSize = gSize;
    e.mergedSize = mergedSize;
    e.gpaBase = gpa & ~mask;
    e.hpaBase = hpa & ~mask;
    return e;
}

PageTableWalker::PageTableWalker(PhysicalMemory& mem, std::optional<GtlbConfig> gtlb,
                                 WalkCostModel cost)
    : mem_(mem), cost_(cost) {
    if (gtlb)
        gtlb_.emplace(*gtlb);
}

void PageTableWalker::begin() { stats_ = {}; }

void PageTableWalker::finish() {
    stats_.cycles = stats_.memAccesses * cost_.memLatencyCycles + cost_.walkOverheadCycles;
}

std::optional<uint64_t> PageTableWalker::load(uint64_t hpa) {
    ++stats_.memAccesses;
    // The memory model counts the attempt as well; undo nothing on failure.
    try {
        return mem_.readPte({hpa});
    } catch (const SimError& e) {
        if (e.code() == ErrorCode::UnmappedMemory)
            return std::nullopt;
        throw;
    }
}

WalkOutcome<GStageResult> PageTableWalker::walkGStage(uint64_t gpa, AccessType access,
                                                      const AtpCsr& hgatp,
                                                      GStagePurpose purpose) {
    begin();
    auto out = gStage(gpa, access, hgatp, purpose, gpa);
    finish();
    if (auto* r = std::get_if<GStageResult>(&out))
        r->stats = stats_;
    return out;
}

WalkOutcome<GStageResult> PageTableWalker::gStage(uint64_t gpa, AccessType access,
                                                  const AtpCsr& hgatp, GStagePurpose purpose,
                                                  uint64_t va) {
    if (hgatp.isBare())
        return GStageResult{gpa, std::nullopt, std::nullopt, {}};

    const bool intermed = purpose == GStagePurpose::Intermed;
    const WalkStage stage = intermed ? WalkStage::GStageIntermed : WalkStage::GStageFinal;
    // PTE fetches are implicit loads as far as the G-stage is concerned.
    const AccessType checked = intermed ? AccessType::Load : access;
    auto fault = [&](FaultKind kind) { return TranslationFault{kind, access, stage, va, gpa}; };

    if (gpa >= kGpaLimit)
        return fault(FaultKind::GuestPageFault);

    const Vmid vmid = hgatp.tag;
    if (intermed && gtlb_) {
        if (auto hit = gtlb_->lookup(gpa >> kPageShift, vmid)) {
            ++stats_.gtlbHits;
            return GStageResult{hit->hpaFor(gpa), hit->hostPte, hit->size, {}};
        }
        ++stats_.gtlbMisses;
    }

    const AddressFields f = splitSv39x4({gpa});
    uint64_t table = hgatp.rootAddress();
    for (int level = 2; level >= 0; --level) {
        const auto raw = load(table + uint64_t{f.vpn[level]} * kPteBytes);
        if (!raw)
            return fault(FaultKind::AccessFault);
        const Pte pte = Pte::fromRaw(*raw);
        if (!pte.v || pte.isReserved())
            return fault(FaultKind::GuestPageFault);
        if (pte.isLeaf()) {
            if (isMisalignedSuperpage(pte, level) ||
                checkPermissions(pte, checked, PrivilegeMode::User, TranslationStage::GStage) ||
                !accessedDirtyOk(pte, checked))
                return fault(FaultKind::GuestPageFault);
            const PageSize size = pageSizeForLevel(level);
            const uint64_t mask = pageMask(size);
            if (intermed && gtlb_)
                gtlb_->insert({(gpa & ~mask) >> kPageShift, vmid, pte, size});
            return GStageResult{(pte.address() & ~mask) | (gpa & mask), pte, size, {}};
        }
        if (level == 0)
            return fault(FaultKind::GuestPageFault);
        table = pte.address();
    }
    return fault(FaultKind::GuestPageFault);
}

WalkOutcome<WalkResult> PageTableWalker::firstStage(VirtualAddress va, AccessType access,
                                                    PrivilegeMode priv, const AtpCsr& atp,
                                                    const AtpCsr* hgatp, WalkStage stage) {
    const TranslationStage permStage =
        stage == WalkStage::SingleStage ? TranslationStage::SingleStage : TranslationStage::VsStage;
    auto fault = [&](FaultKind kind) {
        return TranslationFault{kind, access, stage, va.raw, std::nullopt};
    };
    if (!va.isCanonical())
        return fault(FaultKind::PageFault);

    const AddressFields f = splitSv39(va);
    uint64_t table = atp.rootAddress();
    for (int level = 2; level >= 0; --level) {
        // Translate-then-load: the PTE address is guest-physical under V=1.
        const uint64_t pteAddr = table + uint64_t{f.vpn[level]} * kPteBytes;
        uint64_t pteHpa = pteAddr;
        if (hgatp) {
            auto g = gStage(pteAddr, access, *hgatp, GStagePurpose::Intermed, va.raw);
            if (auto* gf = std::get_if<TranslationFault>(&g))
                return *gf;
            pteHpa = std::get<GStageResult>(g).hpa;
        }
        const auto raw = load(pteHpa);
        if (!raw)
            return fault(FaultKind::AccessFault);
        const Pte pte = Pte::fromRaw(*raw);
        if (!pte.v || pte.isReserved())
            return fault(FaultKind::PageFault);
        if (pte.isLeaf()) {
            if (isMisalignedSuperpage(pte, level) || checkPermissions(pte, access, priv, permStage) ||
                !accessedDirtyOk(pte, access))
                return fault(FaultKind::PageFault);
            const PageSize size = pageSizeForLevel(level);
            const uint64_t mask = pageMask(size);
            WalkResult r;
            r.gpa = (pte.address() & ~mask) | (va.raw & mask);
            r.hpa = r.gpa;
            r.vsPte = pte;
            r.vsSize = size;
            r.mergedSize = size;
            return r;
        }
        if (level == 0)
            return fault(FaultKind::PageFault);
        table = pte.address();
    }
    return fault(FaultKind::PageFault);
}

WalkOutcome<WalkResult> PageTableWalker::walkSingle(VirtualAddress va, AccessType access,
                                                    PrivilegeMode priv, const AtpCsr& satp) {
    if (satp.mode != TranslationMode::Sv39)
        throw SimError(ErrorCode::InvalidParameter, "walkSingle needs satp in Sv39 mode");
    begin();
    auto out = firstStage(va, access, priv, satp, nullptr, WalkStage::SingleStage);
    finish();
    if (auto* r = std::get_if<WalkResult>(&out))
        r->stats = stats_;
    return out;
}

WalkOutcome<WalkResult> PageTableWalker::walkNested(VirtualAddress va, AccessType access,
                                                    PrivilegeMode priv, const AtpCsr& vsatp,
                                                    const AtpCsr& hgatp) {
    if (vsatp.mode == TranslationMode::Sv39x4 || hgatp.mode == TranslationMode::Sv39)
        throw SimError(ErrorCode::InvalidParameter, "vsatp takes Sv39/Bare, hgatp Sv39x4/Bare");
    begin();
    const bool gOn = !hgatp.isBare();
    WalkOutcome<WalkResult> out = TranslationFault{};

    if (vsatp.isBare()) {
        WalkResult r;
        r.gpa = va.raw;
        r.vsSize = PageSize::Size1G;
        if (gOn) {
            auto g = gStage(va.raw, access, hgatp, GStagePurpose::Final, va.raw);
            if (auto* gf = std::get_if<TranslationFault>(&g)) {
                out = *gf;
            } else {
                const auto& gr = std::get<GStageResult>(g);
                r.hpa = gr.hpa;
                r.gPte = gr.gPte;
                r.gSize = gr.gSize;
                r.mergedSize = *gr.gSize;
                out = r;
            }
        } else if (va.raw >= kPaLimit) {
            out = TranslationFault{FaultKind::AccessFault, access, WalkStage::GStageFinal, va.raw,
                                   va.raw};
        } else {
            r.hpa = va.raw;
            r.mergedSize = PageSize::Size1G;
            out = r;
        }
    } else {
        out = firstStage(va, access, priv, vsatp, gOn ? &hgatp : nullptr, WalkStage::VsStage);
        if (auto* r = std::get_if<WalkResult>(&out); r && gOn) {
            auto g = gStage(r->gpa, access, hgatp, GStagePurpose::Final, va.raw);
            if (auto* gf = std::get_if<TranslationFault>(&g)) {
                out = *gf;
            } else {
                const auto& gr = std::get<GStageResult>(g);
                r->hpa = gr.hpa;
                r->gPte = gr.gPte;
                r->gSize = gr.gSize;
                r->mergedSize = TlbEntry::mergeSizes(r->vsSize, gr.gSize);
            }
        }
    }
    finish();
    if (auto* r = std::get_if<WalkResult>(&out))
        r->stats = stats_;
    return out;
}

}  // namespace nmmu
