#pragma once

// Architectural value types for Sv39 / Sv39x4 two-stage translation.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

namespace nmmu {

inline constexpr unsigned kPageShift = 12;
inline constexpr uint64_t kPageBytes = uint64_t{1} << kPageShift;
inline constexpr unsigned kPteBytes = 8;
inline constexpr unsigned kPtesPerTable = 512;
inline constexpr unsigned kLevels = 3;
inline constexpr unsigned kVpnBits = 9;
inline constexpr unsigned kVaBits = 39;
inline constexpr unsigned kGpaBits = 41;
inline constexpr unsigned kPaBits = 56;
inline constexpr unsigned kPpnBits = 44;
inline constexpr uint64_t kPpnMask = (uint64_t{1} << kPpnBits) - 1;
inline constexpr uint64_t kGpaLimit = uint64_t{1} << kGpaBits;
inline constexpr uint64_t kPaLimit = uint64_t{1} << kPaBits;
// Sv39x4 root tables span four pages.
inline constexpr uint64_t kSv39x4RootBytes = 4 * kPageBytes;

using Asid = uint16_t;
using Vmid = uint16_t;
inline constexpr unsigned kAsidBits = 16;
inline constexpr unsigned kVmidBits = 14;
inline constexpr Vmid kVmidMask = (1u << kVmidBits) - 1;

enum class PageSize : uint8_t { Size4K = 0, Size2M = 1, Size1G = 2 };

constexpr unsigned pageLevel(PageSize s) { return static_cast<unsigned>(s); }
constexpr unsigned pageShift(PageSize s) { return kPageShift + kVpnBits * pageLevel(s); }
constexpr uint64_t pageBytes(PageSize s) { return uint64_t{1} << pageShift(s); }
constexpr uint64_t pageMask(PageSize s) { return pageBytes(s) - 1; }
constexpr PageSize pageSizeForLevel(unsigned level) { return static_cast<PageSize>(level); }
std::string_view pageSizeName(PageSize s);

inline constexpr std::array<PageSize, 3> kAllPageSizes{PageSize::Size4K, PageSize::Size2M,
                                                       PageSize::Size1G};

struct VirtualAddress {
    uint64_t raw = 0;

    // Bits 63..39 must replicate bit 38.
    [[nodiscard]] constexpr bool isCanonical() const {
        const auto upper = static_cast<int64_t>(raw) >> (kVaBits - 1);
        return upper == 0 || upper == -1;
    }
    friend constexpr auto operator<=>(const VirtualAddress&, const VirtualAddress&) = default;
};

struct GuestPhysicalAddress {
    uint64_t raw = 0;

    [[nodiscard]] constexpr bool inRange() const { return raw < kGpaLimit; }
    friend constexpr auto operator<=>(const GuestPhysicalAddress&,
                                      const GuestPhysicalAddress&) = default;
};

struct HostPhysicalAddress {
    uint64_t raw = 0;

    [[nodiscard]] constexpr bool inRange() const { return raw < kPaLimit; }
    friend constexpr auto operator<=>(const HostPhysicalAddress&,
                                      const HostPhysicalAddress&) = default;
};

// vpn[0] is the leaf-level index, vpn[2] the root index.
struct AddressFields {
    std::array<uint32_t, kLevels> vpn{};
    uint32_t offset = 0;
    friend bool operator==(const AddressFields&, const AddressFields&) = default;
};

// Throws SimError(NonCanonicalAddress).
AddressFields splitSv39(VirtualAddress va);
// Root index is 11 bits wide. Throws SimError(GpaOutOfRange).
AddressFields splitSv39x4(GuestPhysicalAddress gpa);

struct Pte {
    bool v = false;
    bool r = false;
    bool w = false;
    bool x = false;
    bool u = false;
    bool g = false;
    bool a = false;
    bool d = false;
    uint64_t ppn = 0;

    // Raw field extraction, no validity checks.
    static constexpr Pte fromRaw(uint64_t raw) {
        Pte p;
        p.v = raw & 0x01;
        p.r = raw & 0x02;
        p.w = raw & 0x04;
        p.x = raw & 0x08;
        p.u = raw & 0x10;
        p.g = raw & 0x20;
        p.a = raw & 0x40;
        p.d = raw & 0x80;
        p.ppn = (raw >> 10) & kPpnMask;
        return p;
    }

    [[nodiscard]] constexpr uint64_t encode() const {
        return (uint64_t{v} << 0) | (uint64_t{r} << 1) | (uint64_t{w} << 2) |
               (uint64_t{x} << 3) | (uint64_t{u} << 4) | (uint64_t{g} << 5) |
               (uint64_t{a} << 6) | (uint64_t{d} << 7) | ((ppn & kPpnMask) << 10);
    }

    [[nodiscard]] constexpr bool isLeaf() const { return v && (r || x); }
    [[nodiscard]] constexpr bool isPointer() const { return v && !r && !w && !x; }
    [[nodiscard]] constexpr bool isReserved() const { return v && w && !r; }
    [[nodiscard]] constexpr uint64_t address() const { return ppn << kPageShift; }

    friend constexpr bool operator==(const Pte&, const Pte&) = default;
};

// V=0 decodes to an invalid entry. Throws SimError(ReservedEncoding) for W without R.
Pte decodePte(uint64_t raw);

// A leaf at `level` whose PPN has nonzero bits below that level.
constexpr bool isMisalignedSuperpage(const Pte& leaf, unsigned level) {
    const uint64_t lowMask = (uint64_t{1} << (kVpnBits * level)) - 1;
    return (leaf.ppn & lowMask) != 0;
}

enum class AccessType : uint8_t { Fetch, Load, Store };
enum class PrivilegeMode : uint8_t { User, Supervisor, Machine };
enum class TranslationStage : uint8_t { SingleStage, VsStage, GStage };

std::string_view accessTypeName(AccessType a);
std::string_view privilegeName(PrivilegeMode p);
std::string_view stageName(TranslationStage s);

struct PermissionDenied {
    TranslationStage stage;
    AccessType access;
    friend bool operator==(const PermissionDenied&, const PermissionDenied&) = default;
};

// SUM and MXR are fixed to zero. G-stage leaves are always checked as
// user mappings, whatever the guest privilege.
std::optional<PermissionDenied> checkPermissions(const Pte& leaf, AccessType access,
                                                 PrivilegeMode priv, TranslationStage stage);

// No hardware A/D update: A=0, or D=0 on a store, faults.
constexpr bool accessedDirtyOk(const Pte& leaf, AccessType access) {
    return leaf.a && (access != AccessType::Store || leaf.d);
}

enum class TranslationMode : uint8_t { Bare, Sv39, Sv39x4 };
std::string_view translationModeName(TranslationMode m);

// satp / vsatp / hgatp snapshot. `tag` is the ASID for satp/vsatp and
// the VMID for hgatp.
struct AtpCsr {
    TranslationMode mode = TranslationMode::Bare;
    uint64_t rootPpn = 0;
    uint16_t tag = 0;

    static AtpCsr bare(uint16_t tag = 0) { return {TranslationMode::Bare, 0, tag}; }
    // Throws SimError(AlignmentError) on an unaligned root.
    static AtpCsr sv39(uint64_t rootAddress, Asid asid);
    static AtpCsr sv39x4(uint64_t rootAddress, Vmid vmid);

    [[nodiscard]] bool isBare() const { return mode == TranslationMode::Bare; }
    [[nodiscard]] uint64_t rootAddress() const { return rootPpn << kPageShift; }

    // Architectural register encodings (MODE in 63:60, ASID 59:44 or
    // VMID 57:44, PPN 43:0).
    [[nodiscard]] uint64_t encode() const;
    static AtpCsr decodeSatp(uint64_t raw);
    static AtpCsr decodeHgatp(uint64_t raw);

    friend bool operator==(const AtpCsr&, const AtpCsr&) = default;
};

}  // namespace nmmu
