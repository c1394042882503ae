#pragma once

#include "nmmu/mmu.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace nmmu {

// JSON field names follow the config struct in snake_case:
//   name, itlb_entries, dtlb_entries, gtlb {entries} | null,
//   l2 {size_4k {enabled, entries, ways}, size_2m {...}, lookup_latency_cycles} | null,
//   sstc_enabled, mem_latency_cycles, walk_overhead_cycles,
//   timer_burst_accesses, access_cycles
// Missing fields take their defaults. Throws SimError(InvalidConfig/ParseError).
nlohmann::json configToJson(const MmuConfig& c);
MmuConfig configFromJson(const nlohmann::json& j);

// Every named design point, baseline (cva6-16) first.
const std::vector<MmuConfig>& presetConfigs();
// Throws SimError(InvalidParameter) for an unknown name.
const MmuConfig& presetByName(const std::string& name);

MmuConfig loadConfigFile(const std::string& path);
// A JSON array, or {"configs": [...]}. String entries name presets.
std::vector<MmuConfig> configSetFromJson(const nlohmann::json& j);
std::vector<MmuConfig> loadConfigSet(const std::string& path);

nlohmann::json readJsonFile(const std::string& path);

}  // namespace nmmu
