#include "nmmu/memory.hpp"

#include "nmmu/errors.hpp"

#include <cstdio>
#include <string>

namespace nmmu {

namespace {

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

constexpr uint64_t frameOf(uint64_t addr) { return addr >> kPageShift; }
constexpr unsigned wordOf(uint64_t addr) { return (addr & (kPageBytes - 1)) / kPteBytes; }

unsigned indexAt(TranslationMode format, uint64_t addr, unsigned level) {
    const uint64_t idx = addr >> (kPageShift + kVpnBits * level);
    const uint64_t mask = (level == 2 && format == TranslationMode::Sv39x4) ? 0x7FF : 0x1FF;
    return static_cast<unsigned>(idx & mask);
}

}  // namespace

uint64_t PhysicalMemory::readPte(HostPhysicalAddress addr) {
    ++accesses_;
    if (addr.raw & (kPteBytes - 1))
        throw SimError(ErrorCode::MisalignedAccess, hex(addr.raw));
    const auto it = frames_.find(frameOf(addr.raw));
    if (it == frames_.end())
        throw SimError(ErrorCode::UnmappedMemory, hex(addr.raw));
    return it->second[wordOf(addr.raw)];
}

std::optional<uint64_t> PhysicalMemory::peek(HostPhysicalAddress addr) const {
    if (addr.raw & (kPteBytes - 1))
        throw SimError(ErrorCode::MisalignedAccess, hex(addr.raw));
    const auto it = frames_.find(frameOf(addr.raw));
    if (it == frames_.end())
        return std::nullopt;
    return it->second[wordOf(addr.raw)];
}

void PhysicalMemory::write(HostPhysicalAddress addr, uint64_t value) {
    if (addr.raw & (kPteBytes - 1))
        throw SimError(ErrorCode::MisalignedAccess, hex(addr.raw));
    if (!addr.inRange())
        throw SimError(ErrorCode::InvalidParameter, "write beyond 56-bit PA: " + hex(addr.raw));
    frames_[frameOf(addr.raw)][wordOf(addr.raw)] = value;
}

void PhysicalMemory::mapFrame(uint64_t hfn) {
    frames_.try_emplace(hfn, Frame{});
}

std::optional<uint64_t> peekGStage(const PhysicalMemory& mem, uint64_t gRoot, uint64_t gpa) {
    if (gpa >= kGpaLimit)
        return std::nullopt;
    uint64_t table = gRoot;
    for (int level = 2; level >= 0; --level) {
        const auto word =
            mem.peek({table + indexAt(TranslationMode::Sv39x4, gpa, level) * kPteBytes});
        if (!word)
            return std::nullopt;
        const Pte pte = Pte::fromRaw(*word);
        if (!pte.v || pte.isReserved())
            return std::nullopt;
        if (pte.isLeaf()) {
            const uint64_t mask = pageMask(pageSizeForLevel(level));
            return (pte.address() & ~mask) | (gpa & mask);
        }
        table = pte.address();
    }
    return std::nullopt;
}

PageTableBuilder::PageTableBuilder(PhysicalMemory& mem, HostPhysicalAddress tableBase)
    : mem_(mem), hostCursor_(frameOf(tableBase.raw)) {
    if (tableBase.raw & (kPageBytes - 1))
        throw SimError(ErrorCode::AlignmentError, "table base " + hex(tableBase.raw));
}

HostPhysicalAddress PageTableBuilder::allocHostFrames(uint64_t count, uint64_t alignFrames) {
    if (alignFrames == 0 || (alignFrames & (alignFrames - 1)))
        throw SimError(ErrorCode::InvalidParameter, "frame alignment must be a power of two");
    hostCursor_ = (hostCursor_ + alignFrames - 1) & ~(alignFrames - 1);
    const uint64_t first = hostCursor_;
    for (uint64_t i = 0; i < count; ++i)
        mem_.mapFrame(first + i);
    hostCursor_ += count;
    return {first << kPageShift};
}

TableTree PageTableBuilder::createSv39Tree() {
    ++tableFrames_;
    return {TranslationMode::Sv39, allocHostFrames(1).raw, std::nullopt};
}

TableTree PageTableBuilder::createSv39x4Tree() {
    tableFrames_ += 4;
    return {TranslationMode::Sv39x4, allocHostFrames(4, 4).raw, std::nullopt};
}

TableTree PageTableBuilder::createGuestSv39Tree(const TableTree& gTree,
                                                GuestPhysicalAddress tableBase, bool autoMap) {
    if (gTree.format != TranslationMode::Sv39x4 || gTree.gRoot)
        throw SimError(ErrorCode::InvalidParameter, "guest tables need a host-resident G tree");
    if (tableBase.raw & (kPageBytes - 1))
        throw SimError(ErrorCode::AlignmentError, "guest table base " + hex(tableBase.raw));
    guestCursor_ = tableBase.raw;
    guestAutoMap_ = autoMap;
    TableTree tree{TranslationMode::Sv39, 0, gTree.root};
    tree.root = allocTable(tree);
    return tree;
}

uint64_t PageTableBuilder::allocTable(const TableTree& tree) {
    ++tableFrames_;
    if (!tree.gRoot)
        return allocHostFrames(1).raw;
    const uint64_t gpa = guestCursor_;
    if (gpa >= kGpaLimit)
        throw SimError(ErrorCode::GpaOutOfRange, "guest table cursor exhausted");
    guestCursor_ += kPageBytes;
    const TableTree gTree{TranslationMode::Sv39x4, *tree.gRoot, std::nullopt};
    if (guestAutoMap_) {
        LeafPerms perms{true, true, false, true, false, true, true};
        mapG(gTree, {gpa}, allocHostFrames(1), PageSize::Size4K, perms);
    } else {
        const auto hpa = peekGStage(mem_, *tree.gRoot, gpa);
        if (!hpa)
            throw SimError(ErrorCode::UnmappedMemory, "guest table frame " + hex(gpa) +
                                                          " has no G-stage mapping");
        mem_.mapFrame(frameOf(*hpa));
    }
    return gpa;
}

uint64_t PageTableBuilder::resolve(const TableTree& tree, uint64_t tableAddr) const {
    if (!tree.gRoot)
        return tableAddr;
    const auto hpa = peekGStage(mem_, *tree.gRoot, tableAddr);
    if (!hpa)
        throw SimError(ErrorCode::UnmappedMemory, "guest table address " + hex(tableAddr));
    return *hpa;
}

void PageTableBuilder::writeTableWord(const TableTree& tree, uint64_t tableAddr, uint64_t value) {
    mem_.write({resolve(tree, tableAddr)}, value);
}

uint64_t PageTableBuilder::readTableWord(const TableTree& tree, uint64_t tableAddr) const {
    const auto word = mem_.peek({resolve(tree, tableAddr)});
    if (!word)
        throw SimError(ErrorCode::UnmappedMemory, "table word " + hex(tableAddr));
    return *word;
}

void PageTableBuilder::mapVs(const TableTree& tree, VirtualAddress va, GuestPhysicalAddress gpa,
                             PageSize size, LeafPerms perms) {
    if (tree.format != TranslationMode::Sv39)
        throw SimError(ErrorCode::InvalidParameter, "mapVs needs an Sv39 tree");
    if (!va.isCanonical())
        throw SimError(ErrorCode::NonCanonicalAddress, hex(va.raw));
    if (!gpa.inRange())
        throw SimError(ErrorCode::GpaOutOfRange, hex(gpa.raw));
    mapLeaf(tree, va.raw, gpa.raw, size, perms);
}

void PageTableBuilder::mapG(const TableTree& tree, GuestPhysicalAddress gpa,
                            HostPhysicalAddress hpa, PageSize size, LeafPerms perms) {
    if (tree.format != TranslationMode::Sv39x4)
        throw SimError(ErrorCode::InvalidParameter, "mapG needs an Sv39x4 tree");
    if (!gpa.inRange())
        throw SimError(ErrorCode::GpaOutOfRange, hex(gpa.raw));
    if (!hpa.inRange())
        throw SimError(ErrorCode::InvalidParameter, "hpa beyond 56 bits: " + hex(hpa.raw));
    mapLeaf(tree, gpa.raw, hpa.raw, size, perms);
}

void PageTableBuilder::mapLeaf(const TableTree& tree, uint64_t addr, uint64_t target,
                               PageSize size, LeafPerms perms) {
    const uint64_t mask = pageMask(size);
    if ((addr & mask) || (target & mask))
        throw SimError(ErrorCode::AlignmentError,
                       hex(addr) + " -> " + hex(target) + " at " + std::string(pageSizeName(size)));
    const unsigned leafLevel = pageLevel(size);
    uint64_t table = tree.root;
    for (unsigned level = 2; level > leafLevel; --level) {
        const uint64_t slot = table + indexAt(tree.format, addr, level) * kPteBytes;
        const Pte pte = Pte::fromRaw(readTableWord(tree, slot));
        if (!pte.v) {
            const uint64_t next = allocTable(tree);
            writeTableWord(tree, slot, Pte{true, false, false, false, false, false, false, false,
                                           next >> kPageShift}
                                           .encode());
            table = next;
        } else if (pte.isPointer()) {
            table = pte.address();
        } else {
            throw SimError(ErrorCode::MappingConflict,
                           hex(addr) + " lies under an existing superpage");
        }
    }
    const uint64_t slot = table + indexAt(tree.format, addr, leafLevel) * kPteBytes;
    const Pte existing = Pte::fromRaw(readTableWord(tree, slot));
    const Pte leaf = perms.leaf(target >> kPageShift);
    if (existing.v) {
        if (existing == leaf)
            return;
        throw SimError(ErrorCode::MappingConflict, hex(addr) + " already mapped");
    }
    writeTableWord(tree, slot, leaf.encode());
}

}  // namespace nmmu
