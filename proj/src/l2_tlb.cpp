#include "nmmu/l2_tlb.hpp"

#include "nmmu/errors.hpp"

#include <string>
#include <utility>

namespace nmmu {

namespace {

bool isPow2(size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void validateSize(const L2SizeConfig& c, const char* name) {
    if (!c.enabled)
        return;
    if (!isPow2(c.ways) || c.entries % c.ways != 0 || !isPow2(c.entries / c.ways))
        throw SimError(ErrorCode::InvalidConfig,
                       std::string("L2 ") + name + ": " + std::to_string(c.entries) +
                           " entries / " + std::to_string(c.ways) +
                           " ways is not a power-of-two set count");
}

}  // namespace

void L2Config::validate() const {
    if (!size4k.enabled && !size2m.enabled)
        throw SimError(ErrorCode::InvalidConfig, "L2 needs at least one page-size structure");
    validateSize(size4k, "4KiB");
    validateSize(size2m, "2MiB");
}

std::string_view l2StateName(L2FsmState s) {
    switch (s) {
    case L2FsmState::Flush: return "Flush";
    case L2FsmState::Idle: return "Idle";
    case L2FsmState::Read: return "Read";
    case L2FsmState::Update: return "Update";
    }
    return "?";
}

L2Tlb::L2Tlb(const L2Config& config, TransitionObserver observer)
    : config_(config), observer_(std::move(observer)) {
    config_.validate();
    auto add = [&](const L2SizeConfig& c, PageSize size) {
        if (!c.enabled)
            return;
        Structure s{size, {}};
        const size_t sets = c.entries / c.ways;
        s.sets.reserve(sets);
        for (size_t i = 0; i < sets; ++i)
            s.sets.emplace_back(c.ways);
        structures_.push_back(std::move(s));
    };
    add(config_.size4k, PageSize::Size4K);
    add(config_.size2m, PageSize::Size2M);
    // Reset sweeps every entry before accepting requests.
    transition(L2FsmState::Idle);
}

void L2Tlb::transition(L2FsmState next) {
    const L2FsmState prev = state_;
    state_ = next;
    if (observer_)
        observer_(prev, next);
}

const L2Tlb::Structure* L2Tlb::structureFor(PageSize s) const {
    for (const auto& st : structures_)
        if (st.size == s)
            return &st;
    return nullptr;
}

L2Tlb::Structure* L2Tlb::structureFor(PageSize s) {
    return const_cast<Structure*>(std::as_const(*this).structureFor(s));
}

size_t L2Tlb::sets(PageSize s) const {
    const auto* st = structureFor(s);
    return st ? st->sets.size() : 0;
}

size_t L2Tlb::setIndex(PageSize s, uint64_t vpn) const {
    const auto* st = structureFor(s);
    if (!st)
        throw SimError(ErrorCode::InvalidParameter, "no L2 structure for this page size");
    return (vpn >> (kVpnBits * pageLevel(s))) & (st->sets.size() - 1);
}

const PlruArray<TlbEntry>& L2Tlb::set(PageSize s, size_t index) const {
    const auto* st = structureFor(s);
    if (!st || index >= st->sets.size())
        throw SimError(ErrorCode::InvalidParameter, "L2 set out of range");
    return st->sets[index];
}

size_t L2Tlb::size() const {
    size_t n = 0;
    for (const auto& st : structures_)
        for (const auto& set : st.sets)
            n += set.size();
    return n;
}

std::vector<TlbEntry> L2Tlb::entries(PageSize s) const {
    std::vector<TlbEntry> out;
    if (const auto* st = structureFor(s))
        for (const auto& set : st->sets)
            set.forEach([&](const TlbEntry& e) { out.push_back(e); });
    return out;
}

std::optional<L2Tlb::Hit> L2Tlb::lookup(uint64_t vpn, Asid asid, Vmid vmid, bool vBit) {
    transition(L2FsmState::Read);
    std::optional<Hit> hit;
    // Both structures are read in the same step; at most one can hold
    // the page, so probe order does not matter.
    for (auto& st : structures_) {
        auto& set = st.sets[(vpn >> (kVpnBits * pageLevel(st.size))) & (st.sets.size() - 1)];
        const auto way =
            set.find([&](const TlbEntry& e) { return e.matches(vpn, asid, vmid, vBit); });
        if (way) {
            set.touch(*way);
            hit = Hit{*set.slot(*way), config_.lookupLatencyCycles};
            break;
        }
    }
    transition(L2FsmState::Idle);
    return hit;
}

std::optional<TlbEntry> L2Tlb::insert(const TlbEntry& entry) {
    Structure* st = structureFor(entry.mergedSize);
    if (!st)
        return std::nullopt;
    transition(L2FsmState::Update);
    auto& set = st->sets[(entry.vpn >> (kVpnBits * pageLevel(st->size))) & (st->sets.size() - 1)];
    auto evicted = set.insert(entry, [&](const TlbEntry& e) { return e.sameTag(entry); });
    transition(L2FsmState::Idle);
    return evicted;
}

size_t L2Tlb::flush() {
    transition(L2FsmState::Flush);
    size_t removed = 0;
    for (auto& st : structures_)
        for (auto& set : st.sets)
            removed += set.clear();
    transition(L2FsmState::Idle);
    return removed;
}

}  // namespace nmmu
