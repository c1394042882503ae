#include "nmmu/gtlb.hpp"

#include "nmmu/errors.hpp"

#include <string>

namespace nmmu {

void GtlbConfig::validate() const {
    if (entries < 8 || entries > 16 || (entries & (entries - 1)))
        throw SimError(ErrorCode::InvalidConfig,
                       "GTLB entries must be 8 or 16, got " + std::to_string(entries));
}

namespace {
const GtlbConfig& checked(const GtlbConfig& c) {
    c.validate();
    return c;
}
}  // namespace

Gtlb::Gtlb(const GtlbConfig& config) : array_(checked(config).entries) {}

std::optional<GtlbEntry> Gtlb::lookup(uint64_t gppn, Vmid vmid) {
    const auto way = array_.find(
        [&](const GtlbEntry& e) { return e.vmid == vmid && e.coversGppn(gppn); });
    if (!way)
        return std::nullopt;
    array_.touch(*way);
    return array_.slot(*way);
}

std::optional<GtlbEntry> Gtlb::insert(const GtlbEntry& entry) {
    return array_.insert(entry, [&](const GtlbEntry& e) {
        return e.vmid == entry.vmid && e.size == entry.size && e.gppn == entry.gppn;
    });
}

size_t Gtlb::flush(std::optional<Vmid> vmid, std::optional<uint64_t> gpa) {
    return array_.eraseIf([&](const GtlbEntry& e) {
        return (!vmid || e.vmid == *vmid) && (!gpa || e.coversGpa(*gpa));
    });
}

std::vector<GtlbEntry> Gtlb::entries() const {
    std::vector<GtlbEntry> out;
    array_.forEach([&](const GtlbEntry& e) { out.push_back(e); });
    return out;
}

}  // namespace nmmu
