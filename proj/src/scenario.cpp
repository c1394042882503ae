#include "nmmu/scenario.hpp"

#include "nmmu/errors.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

namespace nmmu {

namespace {

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t parseHex(const nlohmann::json& v) {
    if (v.is_number_unsigned())
        return v.get<uint64_t>();
    const auto s = v.get<std::string>();
    try {
        size_t used = 0;
        const uint64_t value = std::stoull(s, &used, 16);
        if (used != s.size())
            throw SimError(ErrorCode::ParseError, "bad hex literal '" + s + "'");
        return value;
    } catch (const std::logic_error&) {
        throw SimError(ErrorCode::ParseError, "bad hex literal '" + s + "'");
    }
}

nlohmann::json optionalHex(const std::optional<uint64_t>& v) {
    return v ? nlohmann::json(hex(*v)) : nlohmann::json(nullptr);
}

std::optional<uint64_t> readOptionalHex(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null())
        return std::nullopt;
    return parseHex(doc.at(key));
}

}  // namespace

Scenario buildLinuxLikeScenario(uint64_t seed, uint64_t guestPages, PageSize hostSuperpage) {
    Scenario s;
    s.guestPages = guestPages;
    s.hypPages = kDefaultHypPages;
    PageTableBuilder builder(s.memory);
    std::mt19937_64 rng(seed);

    const TableTree gTree = builder.createSv39x4Tree();
    const uint64_t tableFrames = guestPages / kPtesPerTable + 8;
    const uint64_t poolFrames = std::max<uint64_t>(2 * guestPages, kPtesPerTable);
    const uint64_t superBytes = pageBytes(hostSuperpage);
    const uint64_t ramBytes =
        ((tableFrames + poolFrames) * kPageBytes + superBytes - 1) / superBytes * superBytes;
    for (uint64_t off = 0; off < ramBytes; off += superBytes)
        builder.mapG(gTree, {kGuestRamGpa + off}, {kHostRamBase + off}, hostSuperpage,
                     LeafPerms::rwxUser());

    const TableTree vsTree = builder.createGuestSv39Tree(gTree, {kGuestRamGpa}, false);

    // Partial Fisher-Yates over the data pool; plain modulo keeps the
    // layout identical across standard library implementations.
    std::vector<uint64_t> pool(poolFrames);
    for (uint64_t i = 0; i < poolFrames; ++i)
        pool[i] = i;
    for (uint64_t i = 0; i < guestPages; ++i) {
        const uint64_t j = i + rng() % (poolFrames - i);
        std::swap(pool[i], pool[j]);
        const uint64_t gpa = kGuestRamGpa + (tableFrames + pool[i]) * kPageBytes;
        builder.mapVs(vsTree, {guestPageVa(i)}, {gpa}, PageSize::Size4K, LeafPerms::rwx());
    }

    const TableTree hsTree = builder.createSv39Tree();
    for (uint64_t i = 0; i < s.hypPages; ++i)
        builder.mapVs(hsTree, {hypPageVa(i)}, {kHypDataBase + i * kPageBytes}, PageSize::Size4K,
                      LeafPerms::rwx());

    s.vsRoot = vsTree.root;
    s.gRoot = gTree.root;
    s.hsRoot = hsTree.root;
    return s;
}

nlohmann::json scenarioToJson(const Scenario& scenario) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& [hfn, words] : scenario.memory.frames()) {
        nlohmann::json w = nlohmann::json::array();
        for (uint64_t word : words)
            w.push_back(hex(word));
        frames.push_back({{"hfn", hex(hfn)}, {"words", std::move(w)}});
    }
    return {{"frames", std::move(frames)},
            {"vs_root", optionalHex(scenario.vsRoot)},
            {"g_root", optionalHex(scenario.gRoot)},
            {"hs_root", optionalHex(scenario.hsRoot)},
            {"guest_pages", scenario.guestPages},
            {"hyp_pages", scenario.hypPages}};
}

Scenario scenarioFromJson(const nlohmann::json& doc) {
    Scenario s;
    try {
        for (const auto& frame : doc.at("frames")) {
            const uint64_t hfn = parseHex(frame.at("hfn"));
            const auto& words = frame.at("words");
            if (words.size() != kPtesPerTable)
                throw SimError(ErrorCode::ParseError, "frame " + hex(hfn) + " needs 512 words");
            s.memory.mapFrame(hfn);
            for (unsigned i = 0; i < kPtesPerTable; ++i)
                s.memory.write({(hfn << kPageShift) + i * kPteBytes}, parseHex(words[i]));
        }
        s.vsRoot = readOptionalHex(doc, "vs_root");
        s.gRoot = readOptionalHex(doc, "g_root");
        s.hsRoot = readOptionalHex(doc, "hs_root");
        s.guestPages = doc.value("guest_pages", uint64_t{0});
        s.hypPages = doc.value("hyp_pages", uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw SimError(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    return s;
}

Scenario loadScenarioFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SimError(ErrorCode::ParseError, "cannot open scenario " + path);
    try {
        return scenarioFromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw SimError(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void saveScenarioFile(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw SimError(ErrorCode::ParseError, "cannot write scenario " + path);
    out << scenarioToJson(scenario).dump() << '\n';
}

}  // namespace nmmu
