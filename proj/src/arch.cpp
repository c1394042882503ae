#include "nmmu/arch.hpp"

#include "nmmu/errors.hpp"

#include <cstdio>

namespace nmmu {

std::string_view errorCodeName(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonCanonicalAddress: return "NonCanonicalAddress";
    case ErrorCode::GpaOutOfRange: return "GpaOutOfRange";
    case ErrorCode::ReservedEncoding: return "ReservedEncoding";
    case ErrorCode::UnmappedMemory: return "UnmappedMemory";
    case ErrorCode::MisalignedAccess: return "MisalignedAccess";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::MappingConflict: return "MappingConflict";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

std::string_view pageSizeName(PageSize s) {
    switch (s) {
    case PageSize::Size4K: return "4KiB";
    case PageSize::Size2M: return "2MiB";
    case PageSize::Size1G: return "1GiB";
    }
    return "?";
}

std::string_view accessTypeName(AccessType a) {
    switch (a) {
    case AccessType::Fetch: return "fetch";
    case AccessType::Load: return "load";
    case AccessType::Store: return "store";
    }
    return "?";
}

std::string_view privilegeName(PrivilegeMode p) {
    switch (p) {
    case PrivilegeMode::User: return "U";
    case PrivilegeMode::Supervisor: return "S";
    case PrivilegeMode::Machine: return "M";
    }
    return "?";
}

std::string_view stageName(TranslationStage s) {
    switch (s) {
    case TranslationStage::SingleStage: return "single";
    case TranslationStage::VsStage: return "vs";
    case TranslationStage::GStage: return "g";
    }
    return "?";
}

std::string_view translationModeName(TranslationMode m) {
    switch (m) {
    case TranslationMode::Bare: return "bare";
    case TranslationMode::Sv39: return "sv39";
    case TranslationMode::Sv39x4: return "sv39x4";
    }
    return "?";
}

namespace {

AddressFields splitFields(uint64_t addr, uint32_t rootMask) {
    AddressFields f;
    f.offset = static_cast<uint32_t>(addr & (kPageBytes - 1));
    f.vpn[0] = static_cast<uint32_t>((addr >> 12) & 0x1FF);
    f.vpn[1] = static_cast<uint32_t>((addr >> 21) & 0x1FF);
    f.vpn[2] = static_cast<uint32_t>((addr >> 30) & rootMask);
    return f;
}

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

AddressFields splitSv39(VirtualAddress va) {
    if (!va.isCanonical())
        throw SimError(ErrorCode::NonCanonicalAddress, hex(va.raw));
    return splitFields(va.raw, 0x1FF);
}

AddressFields splitSv39x4(GuestPhysicalAddress gpa) {
    if (!gpa.inRange())
        throw SimError(ErrorCode::GpaOutOfRange, hex(gpa.raw));
    return splitFields(gpa.raw, 0x7FF);
}

Pte decodePte(uint64_t raw) {
    const Pte p = Pte::fromRaw(raw);
    if (p.isReserved())
        throw SimError(ErrorCode::ReservedEncoding, hex(raw));
    return p;
}

std::optional<PermissionDenied> checkPermissions(const Pte& leaf, AccessType access,
                                                 PrivilegeMode priv, TranslationStage stage) {
    const PermissionDenied denied{stage, access};
    switch (access) {
    case AccessType::Fetch:
        if (!leaf.x) return denied;
        break;
    case AccessType::Load:
        if (!leaf.r) return denied;
        break;
    case AccessType::Store:
        if (!leaf.r || !leaf.w) return denied;
        break;
    }
    if (stage == TranslationStage::GStage) {
        if (!leaf.u) return denied;
        return std::nullopt;
    }
    if (priv == PrivilegeMode::User) {
        if (!leaf.u) return denied;
    } else if (leaf.u) {
        // Supervisor touching a user page with SUM=0.
        return denied;
    }
    return std::nullopt;
}

AtpCsr AtpCsr::sv39(uint64_t rootAddress, Asid asid) {
    if (rootAddress & (kPageBytes - 1))
        throw SimError(ErrorCode::AlignmentError, "sv39 root " + hex(rootAddress));
    return {TranslationMode::Sv39, (rootAddress >> kPageShift) & kPpnMask, asid};
}

AtpCsr AtpCsr::sv39x4(uint64_t rootAddress, Vmid vmid) {
    if (rootAddress & (kSv39x4RootBytes - 1))
        throw SimError(ErrorCode::AlignmentError, "sv39x4 root " + hex(rootAddress));
    if (vmid > kVmidMask)
        throw SimError(ErrorCode::InvalidParameter, "vmid wider than 14 bits");
    return {TranslationMode::Sv39x4, (rootAddress >> kPageShift) & kPpnMask, vmid};
}

uint64_t AtpCsr::encode() const {
    const uint64_t modeBits = mode == TranslationMode::Bare ? 0 : 8;
    const uint64_t tagMask = mode == TranslationMode::Sv39x4 ? kVmidMask : 0xFFFF;
    return (modeBits << 60) | ((uint64_t{tag} & tagMask) << 44) | (rootPpn & kPpnMask);
}

AtpCsr AtpCsr::decodeSatp(uint64_t raw) {
    const uint64_t modeBits = raw >> 60;
    AtpCsr csr;
    if (modeBits == 0) {
        csr.mode = TranslationMode::Bare;
    } else if (modeBits == 8) {
        csr.mode = TranslationMode::Sv39;
    } else {
        throw SimError(ErrorCode::InvalidParameter, "unsupported satp mode " + hex(modeBits));
    }
    csr.tag = static_cast<uint16_t>((raw >> 44) & 0xFFFF);
    csr.rootPpn = raw & kPpnMask;
    return csr;
}

AtpCsr AtpCsr::decodeHgatp(uint64_t raw) {
    const uint64_t modeBits = raw >> 60;
    AtpCsr csr;
    if (modeBits == 0) {
        csr.mode = TranslationMode::Bare;
    } else if (modeBits == 8) {
        csr.mode = TranslationMode::Sv39x4;
    } else {
        throw SimError(ErrorCode::InvalidParameter, "unsupported hgatp mode " + hex(modeBits));
    }
    csr.tag = static_cast<uint16_t>((raw >> 44) & kVmidMask);
    csr.rootPpn = raw & kPpnMask;
    if (csr.mode == TranslationMode::Sv39x4 && (csr.rootPpn & 0x3))
        throw SimError(ErrorCode::AlignmentError, "sv39x4 root must be 16 KiB aligned");
    return csr;
}

}  // namespace nmmu
