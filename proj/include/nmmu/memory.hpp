#pragma once

#include "nmmu/arch.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>

namespace nmmu {

// Sparse host memory made of 4 KiB frames. Page-table frames and data
// frames share the namespace. Every readPte call bumps the access
// counter, including reads that fail.
class PhysicalMemory {
public:
    using Frame = std::array<uint64_t, kPtesPerTable>;

    // Throws SimError(MisalignedAccess) or SimError(UnmappedMemory).
    uint64_t readPte(HostPhysicalAddress addr);

    // Uncounted read for builders and oracles; nullopt when unmapped.
    [[nodiscard]] std::optional<uint64_t> peek(HostPhysicalAddress addr) const;

    // Creates the frame (zero-filled) on first touch.
    void write(HostPhysicalAddress addr, uint64_t value);
    void mapFrame(uint64_t hfn);

    [[nodiscard]] bool hasFrame(uint64_t hfn) const { return frames_.contains(hfn); }
    [[nodiscard]] const std::map<uint64_t, Frame>& frames() const { return frames_; }
    [[nodiscard]] uint64_t accessCount() const { return accesses_; }
    void resetAccessCount() { accesses_ = 0; }

    // Image equality; the access counter is not part of the image.
    [[nodiscard]] bool sameImage(const PhysicalMemory& other) const {
        return frames_ == other.frames_;
    }

private:
    std::map<uint64_t, Frame> frames_;
    uint64_t accesses_ = 0;
};

struct LeafPerms {
    bool r = true;
    bool w = true;
    bool x = true;
    bool u = false;
    bool g = false;
    bool a = true;
    bool d = true;

    static constexpr LeafPerms rwx() { return {}; }
    static constexpr LeafPerms rwxUser() { return {true, true, true, true, false, true, true}; }
    static constexpr LeafPerms readOnly() { return {true, false, false, false, false, true, true}; }

    [[nodiscard]] Pte leaf(uint64_t ppn) const { return {true, r, w, x, u, g, a, d, ppn}; }
};

// A radix tree under construction. When `gRoot` is set the tree is
// guest-resident: `root` and every table pointer inside are guest-physical
// and are resolved through the Sv39x4 tree rooted at `gRoot`.
struct TableTree {
    TranslationMode format = TranslationMode::Sv39;
    uint64_t root = 0;
    std::optional<uint64_t> gRoot;
};

inline constexpr uint64_t kDefaultHostTableBase = 0x8000'0000;

class PageTableBuilder {
public:
    explicit PageTableBuilder(PhysicalMemory& mem,
                              HostPhysicalAddress tableBase = {kDefaultHostTableBase});

    // Host-resident trees: single-stage Sv39, VS-stage under a Bare
    // hgatp, and G-stage Sv39x4 (16 KiB aligned, four root frames).
    TableTree createSv39Tree();
    TableTree createSv39x4Tree();

    // Guest-resident VS tree. Table frames come from a guest-physical
    // cursor starting at `tableBase`. With `autoMap`, each fresh guest
    // table frame gets its own 4 KiB G-stage leaf onto a new host frame;
    // otherwise the region must already be mapped by `gTree`.
    TableTree createGuestSv39Tree(const TableTree& gTree, GuestPhysicalAddress tableBase,
                                  bool autoMap);

    // Throws AlignmentError, MappingConflict, NonCanonicalAddress,
    // GpaOutOfRange.
    void mapVs(const TableTree& tree, VirtualAddress va, GuestPhysicalAddress gpa, PageSize size,
               LeafPerms perms);
    void mapG(const TableTree& tree, GuestPhysicalAddress gpa, HostPhysicalAddress hpa,
              PageSize size, LeafPerms perms);

    HostPhysicalAddress allocHostFrames(uint64_t count, uint64_t alignFrames = 1);
    [[nodiscard]] uint64_t nextHostFrame() const { return hostCursor_; }
    [[nodiscard]] uint64_t tableFramesAllocated() const { return tableFrames_; }

    // Writes through the table address space of `tree`.
    void writeTableWord(const TableTree& tree, uint64_t tableAddr, uint64_t value);
    [[nodiscard]] uint64_t readTableWord(const TableTree& tree, uint64_t tableAddr) const;

private:
    void mapLeaf(const TableTree& tree, uint64_t addr, uint64_t target, PageSize size,
                 LeafPerms perms);
    uint64_t allocTable(const TableTree& tree);
    [[nodiscard]] uint64_t resolve(const TableTree& tree, uint64_t tableAddr) const;

    PhysicalMemory& mem_;
    uint64_t hostCursor_;
    uint64_t tableFrames_ = 0;
    uint64_t guestCursor_ = 0;
    bool guestAutoMap_ = false;
};

// Uncounted G-stage lookup over built tables: hpa for `gpa`, or nullopt.
std::optional<uint64_t> peekGStage(const PhysicalMemory& mem, uint64_t gRoot, uint64_t gpa);

}  // namespace nmmu
