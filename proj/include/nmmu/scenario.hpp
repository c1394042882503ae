#pragma once

#include "nmmu/arch.hpp"
#include "nmmu/memory.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace nmmu {

// Address layout shared by the scenario builder and the trace generators.
inline constexpr uint64_t kGuestVaBase = 0x0010'0000'0000;  // guest page i at base + i*4K
inline constexpr uint64_t kHypVaBase = 0x0030'0000'0000;    // hypervisor page i
inline constexpr uint64_t kGuestRamGpa = 0x8000'0000;
inline constexpr uint64_t kHostRamBase = 0x1'0000'0000;
inline constexpr uint64_t kHypDataBase = 0x4000'0000;
inline constexpr uint64_t kDefaultHypPages = 16;

constexpr uint64_t guestPageVa(uint64_t page) { return kGuestVaBase + page * kPageBytes; }
constexpr uint64_t hypPageVa(uint64_t page) { return kHypVaBase + page * kPageBytes; }

// A memory image plus the roots needed to translate through it.
//   vsRoot  guest-physical root for vsatp (nullopt: vsatp Bare)
//   gRoot   host-physical Sv39x4 root for hgatp (nullopt: hgatp Bare)
//   hsRoot  host-physical Sv39 root for the hypervisor's own satp
struct Scenario {
    PhysicalMemory memory;
    std::optional<uint64_t> vsRoot;
    std::optional<uint64_t> gRoot;
    std::optional<uint64_t> hsRoot;
    uint64_t guestPages = 0;
    uint64_t hypPages = 0;
};

// Seeded guest: `guestPages` contiguous 4 KiB VS leaves at guestPageVa(i)
// whose guest frames are scattered over guest RAM; guest RAM (VS tables
// included) is G-mapped with `hostSuperpage` leaves. The hypervisor gets
// kDefaultHypPages single-stage pages at hypPageVa(i).
Scenario buildLinuxLikeScenario(uint64_t seed, uint64_t guestPages, PageSize hostSuperpage);

// {frames: [{hfn, words: [hex x512]}], vs_root, g_root, hs_root, guest_pages, hyp_pages}
nlohmann::json scenarioToJson(const Scenario& scenario);
Scenario scenarioFromJson(const nlohmann::json& doc);
Scenario loadScenarioFile(const std::string& path);
void saveScenarioFile(const Scenario& scenario, const std::string& path);

}  // namespace nmmu
