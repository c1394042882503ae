#pragma once

// Small hand-built translation setups for the worked examples.

#include "nmmu/arch.hpp"
#include "nmmu/memory.hpp"

#include <cstdint>
#include <memory>

namespace reftest {

inline constexpr uint64_t kFixtureVa = 0x12'4000'0000;      // 1 GiB aligned, canonical
inline constexpr uint64_t kFixtureRamGpa = 0x4000'0000;     // guest RAM, 1 GiB aligned
inline constexpr uint64_t kFixtureDataGpa = 0x6000'0000;    // 2 MiB aligned data target
inline constexpr uint64_t kFixtureHostOffset = 0x1'0000'0000;  // hpa = gpa + offset

struct NestedFixture {
    std::unique_ptr<nmmu::PhysicalMemory> mem = std::make_unique<nmmu::PhysicalMemory>();
    nmmu::AtpCsr vsatp = nmmu::AtpCsr::bare();
    nmmu::AtpCsr hgatp = nmmu::AtpCsr::bare();
    uint64_t va = kFixtureVa;
    uint64_t leafGpa = 0;  // gpa the VS leaf maps `va` to
};

// One VS leaf of `vsSize` mapping kFixtureVa, under a G-stage whose
// leaves (for both the VS table frames and the data) are all `gSize`.
// Guest tables live in guest RAM at kFixtureRamGpa.
inline NestedFixture makeNested(nmmu::PageSize vsSize, nmmu::PageSize gSize,
                                nmmu::LeafPerms vsPerms = nmmu::LeafPerms::rwx(),
                                nmmu::LeafPerms gPerms = nmmu::LeafPerms::rwxUser()) {
    using namespace nmmu;
    NestedFixture f;
    PageTableBuilder b(*f.mem);
    const TableTree g = b.createSv39x4Tree();
    const uint64_t dataGpa = vsSize == PageSize::Size1G ? kFixtureRamGpa : kFixtureDataGpa;
    auto mapGRange = [&](uint64_t gpa, uint64_t bytes) {
        const uint64_t step = pageBytes(gSize);
        const uint64_t start = gpa & ~(step - 1);
        for (uint64_t a = start; a < gpa + bytes; a += step)
            b.mapG(g, {a}, {a + kFixtureHostOffset}, gSize, gPerms);
    };
    mapGRange(kFixtureRamGpa, 16 * kPageBytes);  // VS table frames
    mapGRange(dataGpa, kPageBytes);
    const TableTree vs = b.createGuestSv39Tree(g, {kFixtureRamGpa}, false);
    b.mapVs(vs, {f.va}, {dataGpa}, vsSize, vsPerms);
    f.vsatp = AtpCsr::sv39(vs.root, 1);
    f.hgatp = AtpCsr::sv39x4(g.root, 1);
    f.leafGpa = dataGpa;
    f.mem->resetAccessCount();
    return f;
}

// vsatp Bare: only a G-stage leaf of `gSize` maps gpa kFixtureDataGpa
// (1 GiB leaves map kFixtureRamGpa).
inline NestedFixture makeGOnly(nmmu::PageSize gSize) {
    using namespace nmmu;
    NestedFixture f;
    PageTableBuilder b(*f.mem);
    const TableTree g = b.createSv39x4Tree();
    const uint64_t gpa = gSize == PageSize::Size1G ? kFixtureRamGpa : kFixtureDataGpa;
    b.mapG(g, {gpa}, {gpa + kFixtureHostOffset}, gSize, LeafPerms::rwxUser());
    f.hgatp = AtpCsr::sv39x4(g.root, 1);
    f.va = gpa;
    f.leafGpa = gpa;
    f.mem->resetAccessCount();
    return f;
}

struct SingleFixture {
    std::unique_ptr<nmmu::PhysicalMemory> mem = std::make_unique<nmmu::PhysicalMemory>();
    nmmu::AtpCsr satp = nmmu::AtpCsr::bare();
    uint64_t va = kFixtureVa;
    uint64_t pa = 0;
};

// Host-resident Sv39 tree with one leaf of `size` for kFixtureVa. The
// same tree read with hgatp Bare serves as a VS tree.
inline SingleFixture makeSingle(nmmu::PageSize size,
                                nmmu::LeafPerms perms = nmmu::LeafPerms::rwx()) {
    using namespace nmmu;
    SingleFixture f;
    PageTableBuilder b(*f.mem);
    const TableTree t = b.createSv39Tree();
    f.pa = 0x2'0000'0000 + (size == PageSize::Size1G ? 0 : 0x20'0000);
    b.mapVs(t, {f.va}, {f.pa}, size, perms);
    f.satp = AtpCsr::sv39(t.root, 1);
    f.mem->resetAccessCount();
    return f;
}

}  // namespace reftest
