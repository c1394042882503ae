#include "nmmu/tlb.hpp"

namespace nmmu {

std::optional<TlbEntry> Tlb::lookup(uint64_t vpn, Asid asid, Vmid vmid, bool vBit) {
    const auto way =
        array_.find([&](const TlbEntry& e) { return e.matches(vpn, asid, vmid, vBit); });
    if (!way)
        return std::nullopt;
    array_.touch(*way);
    return array_.slot(*way);
}

std::optional<TlbEntry> Tlb::insert(const TlbEntry& entry) {
    return array_.insert(entry, [&](const TlbEntry& e) { return e.sameTag(entry); });
}

size_t Tlb::flush(const FlushSpec& spec) {
    return array_.eraseIf([&](const TlbEntry& e) { return spec.matches(e); });
}

std::vector<TlbEntry> Tlb::entries() const {
    std::vector<TlbEntry> out;
    array_.forEach([&](const TlbEntry& e) { out.push_back(e); });
    return out;
}

}  // namespace nmmu
