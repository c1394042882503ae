#include "nmmu/dse.hpp"

#include "nmmu/errors.hpp"

#include <cstdio>
#include <future>
#include <sstream>

namespace nmmu {

namespace {

double ratio(uint64_t num, uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

constexpr Asid kHypervisorAsid = 0;

}  // namespace

ReportRow runTrace(const MmuConfig& config, const Scenario& scenario, const Trace& trace,
                   const std::string& traceName) {
    PhysicalMemory mem = scenario.memory;
    Mmu mmu(config, mem);
    ReportRow row;
    row.config = config.name;
    row.trace = traceName;

    auto account = [&](const TranslateResult& r) {
        ++row.translations;
        row.cycles += r.stats.cycles;
        row.memAccesses += r.stats.memAccesses;
        row.gtlbHits += r.stats.gtlbHits;
        row.gtlbMisses += r.stats.gtlbMisses;
        row.l1Hits += r.stats.l1Hit;
        row.l2Lookups += r.stats.l2Lookup;
        row.l2Hits += r.stats.l2Hit;
        row.walks += r.stats.servedBy == ServedBy::Walk;
        row.faults += !r.ok();
    };

    auto context = [&](bool vBit, Asid asid, Vmid vmid) {
        TranslationContext ctx;
        ctx.priv = PrivilegeMode::Supervisor;
        ctx.vBit = vBit;
        if (vBit) {
            ctx.vsatp = scenario.vsRoot ? AtpCsr::sv39(*scenario.vsRoot, asid) : AtpCsr::bare(asid);
            ctx.hgatp = scenario.gRoot ? AtpCsr::sv39x4(*scenario.gRoot, vmid) : AtpCsr::bare(vmid);
        } else {
            ctx.satp = scenario.hsRoot ? AtpCsr::sv39(*scenario.hsRoot, asid) : AtpCsr::bare(asid);
        }
        return ctx;
    };
    const TranslationContext hypCtx = context(false, kHypervisorAsid, 0);

    for (const auto& rec : trace) {
        switch (rec.op) {
        case TraceOp::Fetch:
        case TraceOp::Load:
        case TraceOp::Store:
            account(mmu.translate(*rec.addr, accessOf(rec.op),
                                  context(rec.vBit, rec.asid.value_or(0), rec.vmid.value_or(0))));
            break;
        case TraceOp::SfenceVma:
            ++row.fences;
            mmu.fence(Fence::sfence(rec.asid, rec.addr));
            break;
        case TraceOp::HfenceVvma:
            ++row.fences;
            mmu.fence(Fence::hfenceVvma(rec.asid, rec.addr));
            break;
        case TraceOp::HfenceGvma:
            ++row.fences;
            mmu.fence(Fence::hfenceGvma(rec.vmid, rec.addr));
            break;
        case TraceOp::TimerEvent:
            ++row.timerEvents;
            if (config.sstcEnabled || scenario.hypPages == 0)
                break;
            // Emulated timer: the trap handler's code and data pages.
            for (uint32_t i = 0; i < config.timerBurstAccesses; ++i) {
                const uint64_t page = (i / 2) % scenario.hypPages;
                const auto access = i % 2 == 0 ? AccessType::Fetch : AccessType::Load;
                account(mmu.translate(hypPageVa(page), access, hypCtx));
            }
            break;
        case TraceOp::ContextSwitch: break;
        }
    }
    row.l1HitRate = ratio(row.l1Hits, row.translations);
    row.l2HitRate = ratio(row.l2Hits, row.l2Lookups);
    row.gtlbHitRate = ratio(row.gtlbHits, row.gtlbHits + row.gtlbMisses);
    return row;
}

Report sweep(const std::vector<MmuConfig>& configs, const Scenario& scenario,
             const std::vector<NamedTrace>& traces) {
    if (configs.empty())
        throw SimError(ErrorCode::InvalidParameter, "sweep needs at least one config");
    std::vector<std::future<std::vector<ReportRow>>> jobs;
    jobs.reserve(configs.size());
    for (const auto& cfg : configs) {
        cfg.validate();
        jobs.push_back(std::async(std::launch::async, [&cfg, &scenario, &traces] {
            std::vector<ReportRow> rows;
            for (const auto& t : traces)
                rows.push_back(runTrace(cfg, scenario, t.trace, t.name));
            return rows;
        }));
    }
    std::vector<std::vector<ReportRow>> perConfig;
    for (auto& j : jobs)
        perConfig.push_back(j.get());

    Report report;
    const auto& base = perConfig.front();
    for (auto& rows : perConfig) {
        for (size_t t = 0; t < rows.size(); ++t) {
            const uint64_t b = base[t].cycles;
            const uint64_t c = rows[t].cycles;
            rows[t].speedup = c == 0 ? 1.0 : static_cast<double>(b) / static_cast<double>(c);
            if (b == 0 && c == 0)
                rows[t].speedup = 1.0;
            report.push_back(rows[t]);
        }
    }
    return report;
}

ReportFormat parseReportFormat(std::string_view s) {
    if (s == "csv")
        return ReportFormat::Csv;
    if (s == "json")
        return ReportFormat::Json;
    throw SimError(ErrorCode::ParseError, "report format must be csv or json");
}

std::string emitReport(const Report& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : report)
            arr.push_back({{"config", r.config},
                           {"trace", r.trace},
                           {"l1_hit_rate", r.l1HitRate},
                           {"l2_hit_rate", r.l2HitRate},
                           {"gtlb_hit_rate", r.gtlbHitRate},
                           {"mem_accesses", r.memAccesses},
                           {"cycles", r.cycles},
                           {"speedup", r.speedup}});
        return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "config,trace,l1_hit_rate,l2_hit_rate,gtlb_hit_rate,mem_accesses,cycles,speedup\n";
    char buf[256];
    for (const auto& r : report) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%llu,%llu,%.6f", r.l1HitRate, r.l2HitRate,
                      r.gtlbHitRate, static_cast<unsigned long long>(r.memAccesses),
                      static_cast<unsigned long long>(r.cycles), r.speedup);
        os << r.config << ',' << r.trace << ',' << buf << '\n';
    }
    return os.str();
}

Report reportFromJson(const nlohmann::json& j) {
    if (!j.is_array())
        throw SimError(ErrorCode::ParseError, "report JSON must be an array");
    Report out;
    try {
        for (const auto& o : j) {
            ReportRow r;
            r.config = o.at("config").get<std::string>();
            r.trace = o.at("trace").get<std::string>();
            r.l1HitRate = o.at("l1_hit_rate").get<double>();
            r.l2HitRate = o.at("l2_hit_rate").get<double>();
            r.gtlbHitRate = o.at("gtlb_hit_rate").get<double>();
            r.memAccesses = o.at("mem_accesses").get<uint64_t>();
            r.cycles = o.at("cycles").get<uint64_t>();
            r.speedup = o.at("speedup").get<double>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SimError(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    return out;
}

}  // namespace nmmu
