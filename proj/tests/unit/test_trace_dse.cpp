#include "nmmu/config.hpp"
#include "nmmu/dse.hpp"
#include "nmmu/errors.hpp"
#include "nmmu/scenario.hpp"
#include "nmmu/trace.hpp"

#include "../support/random_world.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

using namespace nmmu;

namespace {

const Scenario& sharedScenario() {
    static const Scenario s = buildLinuxLikeScenario(1, 1024, PageSize::Size2M);
    return s;
}

std::vector<std::string> splitLines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("sequential trace example") {
    TraceParams p;
    p.kind = TraceKind::Sequential;
    p.pages = 4;
    p.length = 8;
    const Trace t = genTrace(p);
    REQUIRE(t.size() == 8);
    const uint64_t pages[] = {0, 1, 2, 3, 0, 1, 2, 3};
    for (size_t i = 0; i < 8; ++i) {
        CHECK(isAddressOp(t[i].op));
        CHECK(*t[i].addr == p.vaBase + pages[i] * 4096);
    }
}

TEST_CASE("trace generation is deterministic and validated") {
    for (auto kind : {TraceKind::Uniform, TraceKind::Zipf, TraceKind::PointerChase}) {
        TraceParams p;
        p.kind = kind;
        p.pages = 50;
        p.length = 2000;
        p.seed = 3;
        p.fencePeriod = 100;
        p.timerPeriod = 64;
        const Trace a = genTrace(p);
        CHECK(a == genTrace(p));
        p.seed = 4;
        CHECK(a != genTrace(p));
        const auto addressOps =
            std::count_if(a.begin(), a.end(), [](const auto& r) { return isAddressOp(r.op); });
        CHECK(addressOps == 2000);
        CHECK(std::count_if(a.begin(), a.end(), [](const auto& r) {
                  return r.op == TraceOp::HfenceGvma;
              }) == 20);
        CHECK(std::count_if(a.begin(), a.end(), [](const auto& r) {
                  return r.op == TraceOp::TimerEvent;
              }) == 31);
        for (const auto& r : a)
            if (isAddressOp(r.op))
                REQUIRE(VirtualAddress{*r.addr}.isCanonical());
    }
    TraceParams bad;
    bad.pages = 0;
    CHECK_THROWS_AS(genTrace(bad), SimError);
    bad.pages = 1;
    bad.length = 0;
    CHECK_THROWS_AS(genTrace(bad), SimError);
    bad.length = 1;
    bad.fencePeriod = 0;
    CHECK_THROWS_AS(genTrace(bad), SimError);
    CHECK(parseTraceKind("uniform-random") == TraceKind::Uniform);
    CHECK_THROWS_AS(parseTraceKind("gaussian"), SimError);
}

TEST_CASE("pointer chase visits every page once per lap") {
    TraceParams p;
    p.kind = TraceKind::PointerChase;
    p.pages = 64;
    p.length = 64 * 3;
    p.seed = 11;
    const Trace t = genTrace(p);
    std::vector<uint64_t> pages;
    for (const auto& r : t)
        pages.push_back((*r.addr - p.vaBase) >> 12);
    for (size_t lap = 0; lap < 3; ++lap) {
        std::vector<uint64_t> one(pages.begin() + lap * 64, pages.begin() + (lap + 1) * 64);
        std::sort(one.begin(), one.end());
        CHECK(std::unique(one.begin(), one.end()) == one.end());
        CHECK(one.size() == 64);
    }
    for (size_t i = 64; i < pages.size(); ++i)
        REQUIRE(pages[i] == pages[i - 64]);
}

TEST_CASE("zipf head frequency matches the analytic law and an independent sampler") {
    TraceParams p;
    p.kind = TraceKind::Zipf;
    p.pages = 1000;
    p.length = 100000;
    p.seed = 7;
    const Trace t = genTrace(p);
    std::map<uint64_t, uint64_t> counts;
    for (const auto& r : t)
        ++counts[*r.addr >> 12];
    uint64_t top = 0;
    for (const auto& [page, c] : counts)
        top = std::max(top, c);

    // Analytic: length / H(1000).
    double harmonic = 0.0;
    for (int k = 1; k <= 1000; ++k)
        harmonic += 1.0 / k;
    const double analytic = 100000.0 / harmonic;

    // Independent inverse-CDF sampler, scaled from a large draw count.
    std::vector<double> cdf(1000);
    double acc = 0.0;
    for (int k = 0; k < 1000; ++k) {
        acc += 1.0 / (k + 1) / harmonic;
        cdf[k] = acc;
    }
    reftest::Rng rng(1234);
    const uint64_t draws = 4'000'000;
    uint64_t rankZero = 0;
    for (uint64_t i = 0; i < draws; ++i) {
        const double u = rng.unit();
        if (std::lower_bound(cdf.begin(), cdf.end(), u) == cdf.begin())
            ++rankZero;
    }
    const double sampled = static_cast<double>(rankZero) * 100000.0 / draws;

    CAPTURE(top);
    CAPTURE(analytic);
    CAPTURE(sampled);
    CHECK(std::abs(sampled - analytic) / analytic < 0.01);
    CHECK(std::abs(static_cast<double>(top) - sampled) / sampled < 0.01);
}

TEST_CASE("trace file format round trip") {
    TraceParams p;
    p.kind = TraceKind::Uniform;
    p.pages = 10;
    p.length = 300;
    p.seed = 9;
    p.fencePeriod = 50;
    p.timerPeriod = 40;
    Trace t = genTrace(p);
    t.push_back({TraceOp::SfenceVma, 0x1000, 3, std::nullopt, false});
    t.push_back({TraceOp::HfenceVvma, std::nullopt, 4, std::nullopt, true});
    t.push_back({TraceOp::ContextSwitch, std::nullopt, 2, 6, true});
    t.push_back({TraceOp::Fetch, 0x2000, 1, std::nullopt, false});
    std::stringstream ss;
    writeTrace(ss, t);
    CHECK(readTrace(ss) == t);

    CHECK(formatTraceRecord({TraceOp::Load, 0x10'0000'0008, 1, 1, true}) ==
          "load 0x1000000008 1 1 1");
    const auto r = parseTraceRecord("store 0x2000 7 - 0");
    CHECK(r.op == TraceOp::Store);
    CHECK(*r.addr == 0x2000);
    CHECK(*r.asid == 7);
    CHECK_FALSE(r.vmid);
    CHECK_FALSE(r.vBit);

    std::stringstream bad("load zzz 1 1 1\n");
    CHECK_THROWS_AS(readTrace(bad), SimError);
    std::stringstream comments("# header\n\nload 0x1000 1 1 1 # tail\n");
    CHECK(readTrace(comments).size() == 1);
}

TEST_CASE("run_trace basics") {
    const Scenario& s = sharedScenario();
    const MmuConfig& base = presetConfigs().front();
    const ReportRow empty = runTrace(base, s, {}, "empty");
    CHECK(empty.translations == 0);
    CHECK(empty.memAccesses == 0);
    CHECK(empty.cycles == 0);
    CHECK(empty.l1HitRate == 0.0);

    Trace repeated(1000, TraceRecord{TraceOp::Load, guestPageVa(3), 1, 1, true});
    const ReportRow rep = runTrace(base, s, repeated, "repeat");
    CHECK(rep.l1HitRate == doctest::Approx(999.0 / 1000.0));
    CHECK(rep.l1Hits == 999);
    CHECK(rep.walks == 1);
    CHECK(rep.faults == 0);

    // Unmapped guest pages fault and are counted.
    Trace wild(10, TraceRecord{TraceOp::Load, guestPageVa(5000), 1, 1, true});
    CHECK(runTrace(base, s, wild).faults == 10);

    TraceParams p;
    p.kind = TraceKind::PointerChase;
    p.pages = 64;
    p.length = 5000;
    p.seed = 11;
    const Trace chase = genTrace(p);
    const ReportRow r16 = runTrace(presetByName("cva6-16"), s, chase);
    const ReportRow r64 = runTrace(presetByName("cva6-64"), s, chase);
    CHECK(r64.memAccesses < r16.memAccesses);

    // Bit-determinism.
    const ReportRow again = runTrace(presetByName("cva6-16"), s, chase);
    CHECK(emitReport({r16}, ReportFormat::Csv) == emitReport({again}, ReportFormat::Csv));
}

TEST_CASE("timer events cost hypervisor translations only without Sstc") {
    const Scenario& s = sharedScenario();
    Trace t;
    for (int i = 0; i < 20; ++i)
        t.push_back({TraceOp::TimerEvent, std::nullopt, std::nullopt, std::nullopt, true});
    MmuConfig off = presetConfigs().front();
    MmuConfig on = off;
    on.sstcEnabled = true;
    const ReportRow rOff = runTrace(off, s, t);
    const ReportRow rOn = runTrace(on, s, t);
    CHECK(rOff.timerEvents == 20);
    CHECK(rOn.timerEvents == 20);
    CHECK(rOn.translations == 0);
    CHECK(rOn.cycles == 0);
    CHECK(rOff.translations == 20 * off.timerBurstAccesses);
    CHECK(rOff.faults == 0);
    CHECK(rOff.memAccesses > 0);
}

TEST_CASE("sweep speedups and ordering") {
    const Scenario& s = sharedScenario();
    TraceParams p;
    p.kind = TraceKind::Uniform;
    p.pages = 512;
    p.length = 3000;
    p.seed = 2;
    const std::vector<NamedTrace> traces = {{"u", genTrace(p)},
                                            {"seq", genTrace({.pages = 100, .length = 500})}};
    const Report single = sweep({presetConfigs().front()}, s, traces);
    REQUIRE(single.size() == 2);
    for (const auto& r : single)
        CHECK(r.speedup == 1.0);

    const std::vector<MmuConfig> cfgs = {presetByName("cva6-16"), presetByName("cva6-16-gtlb-8"),
                                         presetByName("cva6-32-l2-1")};
    const Report rep = sweep(cfgs, s, traces);
    REQUIRE(rep.size() == 6);
    for (size_t c = 0; c < 3; ++c)
        for (size_t t = 0; t < 2; ++t) {
            const auto& row = rep[c * 2 + t];
            CHECK(row.config == cfgs[c].name);
            CHECK(row.trace == traces[t].name);
            CHECK(row.speedup == doctest::Approx(double(rep[t].cycles) / double(row.cycles)));
            for (double rate : {row.l1HitRate, row.l2HitRate, row.gtlbHitRate}) {
                CHECK(rate >= 0.0);
                CHECK(rate <= 1.0);
            }
        }
    // The GTLB shortens cold nested walks that share VS table frames.
    CHECK(rep[2].memAccesses < rep[0].memAccesses);
    // Sweeping twice gives byte-identical output.
    CHECK(emitReport(rep, ReportFormat::Json) ==
          emitReport(sweep(cfgs, s, traces), ReportFormat::Json));
}

TEST_CASE("report emission") {
    const std::string header =
        "config,trace,l1_hit_rate,l2_hit_rate,gtlb_hit_rate,mem_accesses,cycles,speedup";
    CHECK(splitLines(emitReport({}, ReportFormat::Csv)) == std::vector<std::string>{header});

    ReportRow row;
    row.config = "cva6-16";
    row.trace = "zipf";
    row.l1HitRate = 0.5;
    row.l2HitRate = 0.25;
    row.gtlbHitRate = 0.125;
    row.memAccesses = 1234;
    row.cycles = 56789;
    row.speedup = 1.5;
    const auto lines = splitLines(emitReport({row}, ReportFormat::Csv));
    REQUIRE(lines.size() == 2);
    CHECK(std::count(lines[1].begin(), lines[1].end(), ',') == 7);
    CHECK(lines[1] == "cva6-16,zipf,0.500000,0.250000,0.125000,1234,56789,1.500000");

    const Report viaJson =
        reportFromJson(nlohmann::json::parse(emitReport({row, row}, ReportFormat::Json)));
    CHECK(emitReport(viaJson, ReportFormat::Csv) == emitReport({row, row}, ReportFormat::Csv));
    CHECK(parseReportFormat("json") == ReportFormat::Json);
    CHECK_THROWS_AS(parseReportFormat("xml"), SimError);
}
