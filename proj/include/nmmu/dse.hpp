#pragma once

#include "nmmu/mmu.hpp"
#include "nmmu/scenario.hpp"
#include "nmmu/trace.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nmmu {

struct ReportRow {
    std::string config;
    std::string trace;
    double l1HitRate = 0.0;
    double l2HitRate = 0.0;    // over L2 lookups
    double gtlbHitRate = 0.0;  // over GTLB probes
    uint64_t memAccesses = 0;
    uint64_t cycles = 0;
    double speedup = 1.0;

    // Raw counters behind the rates; not part of the emitted columns.
    uint64_t translations = 0;
    uint64_t l1Hits = 0;
    uint64_t l2Lookups = 0;
    uint64_t l2Hits = 0;
    uint64_t gtlbHits = 0;
    uint64_t gtlbMisses = 0;
    uint64_t walks = 0;
    uint64_t faults = 0;
    uint64_t fences = 0;
    uint64_t timerEvents = 0;
};

using Report = std::vector<ReportRow>;

// Guest records (v=1) run in VS-mode through the scenario's vsatp/hgatp
// roots; v=0 records run in HS-mode through hs_root. Without Sstc every
// timer event costs `timerBurstAccesses` hypervisor translations over the
// scenario's hypervisor pages. Faults are counted, not raised.
ReportRow runTrace(const MmuConfig& config, const Scenario& scenario, const Trace& trace,
                   const std::string& traceName = "trace");

// Every (config, trace) pair, config-major. configs.front() is the
// baseline each row's speedup is measured against. Configs run
// concurrently on independent MMUs.
Report sweep(const std::vector<MmuConfig>& configs, const Scenario& scenario,
             const std::vector<NamedTrace>& traces);

enum class ReportFormat : uint8_t { Csv, Json };
ReportFormat parseReportFormat(std::string_view s);

// CSV: config,trace,l1_hit_rate,l2_hit_rate,gtlb_hit_rate,mem_accesses,cycles,speedup
// with rates and speedup printed to six decimals. JSON: an array of
// objects with the same keys.
std::string emitReport(const Report& report, ReportFormat format);
Report reportFromJson(const nlohmann::json& j);

}  // namespace nmmu
