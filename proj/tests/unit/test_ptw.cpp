#include "nmmu/errors.hpp"
#include "nmmu/ptw.hpp"

#include "../support/compare.hpp"
#include "../support/fixtures.hpp"
#include "../support/random_world.hpp"
#include "../support/reference_walker.hpp"

#include "doctest.h"

#include <set>

using namespace nmmu;
using namespace reftest;

namespace {

constexpr PageSize kSizes[] = {PageSize::Size4K, PageSize::Size2M, PageSize::Size1G};

RefContext nestedCtx(const NestedFixture& f) {
    RefContext c;
    c.vBit = true;
    c.vsatp = toRef(f.vsatp);
    c.hgatp = toRef(f.hgatp);
    return c;
}

uint64_t accessesOf(const WalkOutcome<WalkResult>& w) {
    return std::get<WalkResult>(w).stats.memAccesses;
}

}  // namespace

TEST_CASE("single-stage walk examples") {
    for (PageSize s : kSizes) {
        auto f = makeSingle(s);
        PageTableWalker w(*f.mem, std::nullopt);
        const auto r = w.walkSingle({f.va + 0x18}, AccessType::Load, PrivilegeMode::Supervisor,
                                    f.satp);
        REQUIRE(std::holds_alternative<WalkResult>(r));
        const auto& res = std::get<WalkResult>(r);
        CHECK(res.hpa == f.pa + 0x18);
        CHECK(res.vsSize == s);
        CHECK(res.mergedSize == s);
        CHECK(res.stats.memAccesses == 3 - pageLevel(s));
        CHECK(res.stats.memAccesses == f.mem->accessCount());
        CHECK(res.stats.cycles == res.stats.memAccesses * 20 + 2);
    }
    auto f = makeSingle(PageSize::Size4K);
    PageTableWalker w(*f.mem, std::nullopt);
    const auto miss = w.walkSingle({f.va + 0x40'0000}, AccessType::Load,
                                   PrivilegeMode::Supervisor, f.satp);
    REQUIRE(std::holds_alternative<TranslationFault>(miss));
    CHECK(std::get<TranslationFault>(miss).kind == FaultKind::PageFault);
    CHECK(std::get<TranslationFault>(miss).stage == WalkStage::SingleStage);
    CHECK(w.lastStats().memAccesses <= 3);
    CHECK_THROWS_AS(w.walkSingle({0}, AccessType::Load, PrivilegeMode::Supervisor, AtpCsr::bare()),
                    SimError);
}

TEST_CASE("G-stage walk examples") {
    auto f = makeGOnly(PageSize::Size4K);
    PageTableWalker w(*f.mem, GtlbConfig{8});

    const auto bare = w.walkGStage(0x1234, AccessType::Load, AtpCsr::bare(), GStagePurpose::Final);
    REQUIRE(std::holds_alternative<GStageResult>(bare));
    CHECK(std::get<GStageResult>(bare).hpa == 0x1234);
    CHECK(std::get<GStageResult>(bare).stats.memAccesses == 0);

    const auto cold =
        w.walkGStage(f.leafGpa + 8, AccessType::Load, f.hgatp, GStagePurpose::Intermed);
    REQUIRE(std::holds_alternative<GStageResult>(cold));
    CHECK(std::get<GStageResult>(cold).hpa == f.leafGpa + kFixtureHostOffset + 8);
    CHECK(std::get<GStageResult>(cold).stats.memAccesses == 3);
    CHECK(std::get<GStageResult>(cold).stats.gtlbMisses == 1);
    CHECK(w.gtlb()->size() == 1);

    const auto warm =
        w.walkGStage(f.leafGpa + 16, AccessType::Load, f.hgatp, GStagePurpose::Intermed);
    REQUIRE(std::holds_alternative<GStageResult>(warm));
    CHECK(std::get<GStageResult>(warm).stats.memAccesses == 0);
    CHECK(std::get<GStageResult>(warm).stats.gtlbHits == 1);

    // Final translations never use or fill the GTLB.
    const auto fin = w.walkGStage(f.leafGpa, AccessType::Load, f.hgatp, GStagePurpose::Final);
    CHECK(std::get<GStageResult>(fin).stats.memAccesses == 3);
    CHECK(std::get<GStageResult>(fin).stats.gtlbHits == 0);

    const auto oob = w.walkGStage(uint64_t{1} << 41, AccessType::Load, f.hgatp,
                                  GStagePurpose::Final);
    REQUIRE(std::holds_alternative<TranslationFault>(oob));
    CHECK(std::get<TranslationFault>(oob).kind == FaultKind::GuestPageFault);
    CHECK(std::get<TranslationFault>(oob).gpa == uint64_t{1} << 41);
}

TEST_CASE("cold nested walk of 4 KiB over 4 KiB costs 15 accesses") {
    auto f = makeNested(PageSize::Size4K, PageSize::Size4K);
    PageTableWalker w(*f.mem, std::nullopt);
    const auto r = w.walkNested({f.va + 0x10}, AccessType::Load, PrivilegeMode::Supervisor,
                                f.vsatp, f.hgatp);
    REQUIRE(std::holds_alternative<WalkResult>(r));
    CHECK(accessesOf(r) == 15);
    CHECK(f.mem->accessCount() == 15);
    CHECK(std::get<WalkResult>(r).hpa == f.leafGpa + kFixtureHostOffset + 0x10);

    ReferenceWalker ref(*f.mem);
    CHECK(ref.translate(f.va + 0x10, 1, nestedCtx(f)).accesses == 15);
}

TEST_CASE("nested access count formula over all nine size pairs") {
    for (PageSize vs : kSizes) {
        for (PageSize g : kSizes) {
            auto f = makeNested(vs, g);
            PageTableWalker w(*f.mem, std::nullopt);
            const auto r = w.walkNested({f.va}, AccessType::Store, PrivilegeMode::Supervisor,
                                        f.vsatp, f.hgatp);
            REQUIRE(std::holds_alternative<WalkResult>(r));
            const auto& res = std::get<WalkResult>(r);
            const uint64_t vsLevels = 3 - pageLevel(vs);
            const uint64_t gLen = 3 - pageLevel(g);
            const uint64_t formula = vsLevels * (gLen + 1) + gLen;
            ReferenceWalker ref(*f.mem);
            const auto oracle = ref.translate(f.va, 2, nestedCtx(f));
            CAPTURE(pageLevel(vs));
            CAPTURE(pageLevel(g));
            CHECK(res.stats.memAccesses == formula);
            CHECK(oracle.accesses == formula);
            CHECK(res.mergedSize == std::min(vs, g));
            CHECK(res.hpa == *oracle.hpa);
        }
    }
    // The 4 KiB VS over 2 MiB G case, pinned.
    auto f = makeNested(PageSize::Size4K, PageSize::Size2M);
    PageTableWalker w(*f.mem, std::nullopt);
    CHECK(accessesOf(w.walkNested({f.va}, AccessType::Load, PrivilegeMode::Supervisor, f.vsatp,
                                  f.hgatp)) == 11);
}

TEST_CASE("degenerate nested walks") {
    // vsatp Bare: the G-stage translates va as a gpa.
    for (PageSize g : kSizes) {
        auto f = makeGOnly(g);
        PageTableWalker w(*f.mem, std::nullopt);
        const auto r = w.walkNested({f.va + 0x20}, AccessType::Load, PrivilegeMode::Supervisor,
                                    AtpCsr::bare(), f.hgatp);
        REQUIRE(std::holds_alternative<WalkResult>(r));
        const auto& res = std::get<WalkResult>(r);
        CHECK(res.stats.memAccesses == 3 - pageLevel(g));
        CHECK(res.mergedSize == g);
        CHECK(res.hpa == f.va + kFixtureHostOffset + 0x20);
        RefContext c;
        c.vBit = true;
        c.hgatp = toRef(f.hgatp);
        CHECK(ReferenceWalker(*f.mem).translate(f.va + 0x20, 1, c).accesses ==
              res.stats.memAccesses);
    }
    // hgatp Bare: a plain VS walk on host-resident tables.
    for (PageSize s : kSizes) {
        auto f = makeSingle(s);
        PageTableWalker w(*f.mem, std::nullopt);
        const auto r = w.walkNested({f.va}, AccessType::Fetch, PrivilegeMode::Supervisor, f.satp,
                                    AtpCsr::bare());
        REQUIRE(std::holds_alternative<WalkResult>(r));
        CHECK(accessesOf(r) == 3 - pageLevel(s));
        CHECK(std::get<WalkResult>(r).hpa == f.pa);
    }
    // Both Bare: identity, no accesses.
    PhysicalMemory mem;
    PageTableWalker w(mem, std::nullopt);
    const auto id = w.walkNested({0x1234'5678}, AccessType::Load, PrivilegeMode::Supervisor,
                                 AtpCsr::bare(), AtpCsr::bare());
    REQUIRE(std::holds_alternative<WalkResult>(id));
    CHECK(std::get<WalkResult>(id).hpa == 0x1234'5678);
    CHECK(accessesOf(id) == 0);

    CHECK_THROWS_AS(w.walkNested({0}, AccessType::Load, PrivilegeMode::Supervisor,
                                 AtpCsr::sv39x4(0x4000, 0), AtpCsr::bare()),
                    SimError);
}

TEST_CASE("a warm GTLB leaves 6 accesses, matching the ideal-cache reference") {
    auto f = makeNested(PageSize::Size4K, PageSize::Size4K);
    PageTableWalker w(*f.mem, GtlbConfig{8});
    const auto first = w.walkNested({f.va}, AccessType::Load, PrivilegeMode::Supervisor, f.vsatp,
                                    f.hgatp);
    CHECK(accessesOf(first) == 15);
    CHECK(std::get<WalkResult>(first).stats.gtlbMisses == 3);
    const auto second = w.walkNested({f.va}, AccessType::Load, PrivilegeMode::Supervisor, f.vsatp,
                                     f.hgatp);
    CHECK(accessesOf(second) == 6);
    CHECK(std::get<WalkResult>(second).stats.gtlbHits == 3);

    ReferenceWalker ideal(*f.mem, true);
    CHECK(ideal.translate(f.va, 1, nestedCtx(f)).accesses == 15);
    CHECK(ideal.translate(f.va, 1, nestedCtx(f)).accesses == 6);
}

TEST_CASE("neighbouring pages share GTLB entries for every table frame") {
    PhysicalMemory mem;
    PageTableBuilder b(mem);
    const TableTree g = b.createSv39x4Tree();
    const TableTree vs = b.createGuestSv39Tree(g, {0x4000'0000}, true);
    const uint64_t va = 0x12'0000'0000;
    for (uint64_t i = 0; i < 2; ++i) {
        b.mapVs(vs, {va + i * 0x1000}, {0x6000'0000 + i * 0x1000}, PageSize::Size4K,
                LeafPerms::rwx());
        b.mapG(g, {0x6000'0000 + i * 0x1000}, {0x2'0000'0000 + i * 0x1000}, PageSize::Size4K,
               LeafPerms::rwxUser());
    }
    const auto vsatp = AtpCsr::sv39(vs.root, 1);
    const auto hgatp = AtpCsr::sv39x4(g.root, 1);

    PageTableWalker with(mem, GtlbConfig{16});
    PageTableWalker without(mem, std::nullopt);
    const auto a1 = with.walkNested({va}, AccessType::Load, PrivilegeMode::Supervisor, vsatp, hgatp);
    const auto a2 = with.walkNested({va + 0x1000}, AccessType::Load, PrivilegeMode::Supervisor,
                                    vsatp, hgatp);
    const auto b2 = without.walkNested({va + 0x1000}, AccessType::Load, PrivilegeMode::Supervisor,
                                       vsatp, hgatp);
    CHECK(accessesOf(a1) == 15);
    CHECK(accessesOf(b2) == 15);
    CHECK(accessesOf(b2) - accessesOf(a2) == 9);
    CHECK(std::get<WalkResult>(a2).stats.gtlbHits == 3);
    CHECK(std::get<WalkResult>(a2).hpa == std::get<WalkResult>(b2).hpa);
}

TEST_CASE("walker agrees with the reference on randomized worlds") {
    size_t faults = 0;
    size_t hits = 0;
    std::set<std::pair<int, int>> faultShapes;
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        WorldParams p;
        p.seed = seed;
        p.gBare = seed % 4 == 0;
        RandomWorld world = buildRandomWorld(p);
        PageTableWalker plain(world.mem, std::nullopt);
        PageTableWalker g8(world.mem, GtlbConfig{8});
        PageTableWalker g16(world.mem, GtlbConfig{16});
        ReferenceWalker ref(world.mem);
        Rng rng(seed * 1000 + 1);
        for (int i = 0; i < 2500; ++i) {
            const bool guest = rng.chance(0.6);
            const uint64_t va = sampleVa(rng, guest ? world.guest : world.host);
            const auto access = static_cast<AccessType>(rng.below(3));
            const auto priv = rng.chance(0.3) ? PrivilegeMode::User : PrivilegeMode::Supervisor;
            RefContext c;
            c.vBit = guest;
            c.priv = refPriv(priv);
            c.satp = toRef(world.satp);
            c.vsatp = toRef(world.vsatp);
            c.hgatp = toRef(world.hgatp);
            const RefOutcome expect = ref.translate(va, refAccess(access), c);

            auto run = [&](PageTableWalker& w) {
                const uint64_t before = world.mem.accessCount();
                const auto out = guest ? w.walkNested({va}, access, priv, world.vsatp, world.hgatp)
                                       : w.walkSingle({va}, access, priv, world.satp);
                REQUIRE(world.mem.accessCount() - before == w.lastStats().memAccesses);
                REQUIRE(w.lastStats().cycles == w.lastStats().memAccesses * 20 + 2);
                return out;
            };
            const auto outPlain = run(plain);
            CAPTURE(va);
            REQUIRE(observe(outPlain) == observe(expect));
            REQUIRE(plain.lastStats().memAccesses == expect.accesses);
            REQUIRE(observe(run(g8)) == observe(expect));
            REQUIRE(g8.lastStats().memAccesses <= expect.accesses);
            REQUIRE(observe(run(g16)) == observe(expect));
            if (expect.fault) {
                ++faults;
                faultShapes.insert({static_cast<int>(expect.fault->kind),
                                    static_cast<int>(expect.fault->stage)});
            } else {
                ++hits;
            }
        }
    }
    CHECK(hits > 5000);
    CHECK(faults > 1000);
    // Faults of every kind and stage appeared.
    CHECK(faultShapes.count({int(FaultKind::PageFault), int(WalkStage::SingleStage)}));
    CHECK(faultShapes.count({int(FaultKind::PageFault), int(WalkStage::VsStage)}));
    CHECK(faultShapes.count({int(FaultKind::GuestPageFault), int(WalkStage::GStageIntermed)}));
    CHECK(faultShapes.count({int(FaultKind::GuestPageFault), int(WalkStage::GStageFinal)}));
}

TEST_CASE("fault injection at every PTE of a nested walk") {
    // Damage each live PTE word in turn; the walker must report exactly
    // what the reference reports, stage and gpa included.
    const auto base = makeNested(PageSize::Size4K, PageSize::Size4K);
    std::vector<std::pair<uint64_t, uint64_t>> live;
    for (const auto& [hfn, words] : base.mem->frames())
        for (unsigned i = 0; i < kPtesPerTable; ++i)
            if (words[i] & 1)
                live.emplace_back((hfn << kPageShift) + i * kPteBytes, words[i]);
    REQUIRE(live.size() >= 10);

    std::set<int> stages;
    for (const auto& [addr, word] : live) {
        for (uint64_t damaged : {word & ~uint64_t{1}, word & ~uint64_t{0x40},
                                 (word & ~uint64_t{0x6}) | 0x4, word ^ (uint64_t{1} << 10)}) {
            PhysicalMemory mem = *base.mem;
            mem.write({addr}, damaged);
            PageTableWalker w(mem, GtlbConfig{8});
            ReferenceWalker ref(mem);
            RefContext c;
            c.vBit = true;
            c.vsatp = toRef(base.vsatp);
            c.hgatp = toRef(base.hgatp);
            const auto expect = ref.translate(base.va, 1, c);
            const auto got = w.walkNested({base.va}, AccessType::Load, PrivilegeMode::Supervisor,
                                          base.vsatp, base.hgatp);
            CAPTURE(addr);
            REQUIRE(observe(got) == observe(expect));
            if (expect.fault) {
                stages.insert(static_cast<int>(expect.fault->stage));
                if (expect.fault->kind == FaultKind::GuestPageFault)
                    REQUIRE(expect.fault->gpa.has_value());
            }
        }
    }
    CHECK(stages.count(int(WalkStage::VsStage)));
    CHECK(stages.count(int(WalkStage::GStageIntermed)));
    CHECK(stages.count(int(WalkStage::GStageFinal)));
}
