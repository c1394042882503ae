#include "nmmu/config.hpp"

#include "nmmu/errors.hpp"

#include <fstream>

namespace nmmu {

namespace {

using nlohmann::json;

json sizeToJson(const L2SizeConfig& s) {
    return {{"enabled", s.enabled}, {"entries", s.entries}, {"ways", s.ways}};
}

L2SizeConfig sizeFromJson(const json& j, L2SizeConfig def) {
    if (j.is_null())
        return {false, def.entries, def.ways};
    return {j.value("enabled", true), j.value("entries", def.entries), j.value("ways", def.ways)};
}

MmuConfig make(std::string name, size_t l1, std::optional<size_t> gtlb,
               std::optional<L2Config> l2 = std::nullopt, bool sstc = false) {
    MmuConfig c;
    c.name = std::move(name);
    c.itlbEntries = c.dtlbEntries = l1;
    if (gtlb)
        c.gtlb = GtlbConfig{*gtlb};
    c.l2 = l2;
    c.sstcEnabled = sstc;
    return c;
}

L2Config l2Of(std::optional<std::pair<size_t, size_t>> k4, std::optional<std::pair<size_t, size_t>> m2) {
    L2Config l;
    l.size4k = k4 ? L2SizeConfig{true, k4->first, k4->second} : L2SizeConfig{false, 128, 4};
    l.size2m = m2 ? L2SizeConfig{true, m2->first, m2->second} : L2SizeConfig{false, 32, 4};
    return l;
}

std::vector<MmuConfig> buildPresets() {
    using P = std::pair<size_t, size_t>;
    std::vector<MmuConfig> v;
    v.push_back(make("cva6-16", 16, {}));
    v.push_back(make("cva6-32", 32, {}));
    v.push_back(make("cva6-64", 64, {}));
    v.push_back(make("cva6-16-gtlb-8", 16, 8));
    v.push_back(make("cva6-16-gtlb-16", 16, 16));
    v.push_back(make("cva6-32-gtlb-8", 32, 8));
    v.push_back(make("cva6-32-gtlb-16", 32, 16));
    v.push_back(make("cva6-16-l2-1", 16, 8, l2Of(P{128, 4}, {})));
    v.push_back(make("cva6-16-l2-2", 16, 8, l2Of({}, P{32, 4})));
    v.push_back(make("cva6-16-l2-3", 16, 8, l2Of(P{128, 4}, P{32, 4})));
    const std::vector<std::pair<std::optional<P>, std::optional<P>>> l2Points = {
        {P{128, 4}, {}}, {P{128, 8}, {}}, {P{256, 4}, {}}, {P{256, 8}, {}},
        {{}, P{32, 4}},  {{}, P{32, 8}},  {{}, P{64, 4}},  {{}, P{64, 8}},
        {P{128, 4}, P{32, 4}}, {P{256, 4}, P{64, 4}},
    };
    for (size_t i = 0; i < l2Points.size(); ++i)
        v.push_back(make("cva6-32-l2-" + std::to_string(i + 1), 32, 8,
                         l2Of(l2Points[i].first, l2Points[i].second)));
    v.push_back(make("cva6-sstc", 16, {}, {}, true));
    v.push_back(make("cva6-sstc-gtlb8", 16, 8, {}, true));
    v.push_back(make("cva6-max-power", 16, 8, l2Of(P{128, 4}, P{32, 4}), true));
    for (const auto& c : v)
        c.validate();
    return v;
}

}  // namespace

nlohmann::json configToJson(const MmuConfig& c) {
    json j;
    j["name"] = c.name;
    j["itlb_entries"] = c.itlbEntries;
    j["dtlb_entries"] = c.dtlbEntries;
    j["gtlb"] = c.gtlb ? json{{"entries", c.gtlb->entries}} : json(nullptr);
    if (c.l2)
        j["l2"] = {{"size_4k", sizeToJson(c.l2->size4k)},
                   {"size_2m", sizeToJson(c.l2->size2m)},
                   {"lookup_latency_cycles", c.l2->lookupLatencyCycles}};
    else
        j["l2"] = nullptr;
    j["sstc_enabled"] = c.sstcEnabled;
    j["mem_latency_cycles"] = c.memLatencyCycles;
    j["walk_overhead_cycles"] = c.walkOverheadCycles;
    j["timer_burst_accesses"] = c.timerBurstAccesses;
    j["access_cycles"] = c.accessCycles;
    return j;
}

MmuConfig configFromJson(const nlohmann::json& j) {
    if (!j.is_object())
        throw SimError(ErrorCode::ParseError, "config must be a JSON object");
    MmuConfig c;
    try {
        c.name = j.value("name", c.name);
        c.itlbEntries = j.value("itlb_entries", c.itlbEntries);
        c.dtlbEntries = j.value("dtlb_entries", c.dtlbEntries);
        if (auto it = j.find("gtlb"); it != j.end() && !it->is_null())
            c.gtlb = GtlbConfig{it->value("entries", size_t{8})};
        if (auto it = j.find("l2"); it != j.end() && !it->is_null()) {
            L2Config l;
            l.size4k = sizeFromJson(it->value("size_4k", json(nullptr)), l.size4k);
            l.size2m = sizeFromJson(it->value("size_2m", json(nullptr)), l.size2m);
            l.lookupLatencyCycles = it->value("lookup_latency_cycles", l.lookupLatencyCycles);
            c.l2 = l;
        }
        c.sstcEnabled = j.value("sstc_enabled", c.sstcEnabled);
        c.memLatencyCycles = j.value("mem_latency_cycles", c.memLatencyCycles);
        c.walkOverheadCycles = j.value("walk_overhead_cycles", c.walkOverheadCycles);
        c.timerBurstAccesses = j.value("timer_burst_accesses", c.timerBurstAccesses);
        c.accessCycles = j.value("access_cycles", c.accessCycles);
    } catch (const json::exception& e) {
        throw SimError(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

const std::vector<MmuConfig>& presetConfigs() {
    static const std::vector<MmuConfig> presets = buildPresets();
    return presets;
}

const MmuConfig& presetByName(const std::string& name) {
    for (const auto& c : presetConfigs())
        if (c.name == name)
            return c;
    throw SimError(ErrorCode::InvalidParameter, "unknown preset '" + name + "'");
}

nlohmann::json readJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SimError(ErrorCode::ParseError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw SimError(ErrorCode::ParseError, path + ": " + e.what());
    }
}

MmuConfig loadConfigFile(const std::string& path) {
    const json j = readJsonFile(path);
    if (j.is_string())
        return presetByName(j.get<std::string>());
    return configFromJson(j);
}

std::vector<MmuConfig> configSetFromJson(const nlohmann::json& j) {
    const json& list = j.is_object() ? j.at("configs") : j;
    if (!list.is_array() || list.empty())
        throw SimError(ErrorCode::InvalidConfig, "config set must be a non-empty array");
    std::vector<MmuConfig> out;
    for (const auto& item : list)
        out.push_back(item.is_string() ? presetByName(item.get<std::string>())
                                       : configFromJson(item));
    return out;
}

std::vector<MmuConfig> loadConfigSet(const std::string& path) {
    return configSetFromJson(readJsonFile(path));
}

}  // namespace nmmu
