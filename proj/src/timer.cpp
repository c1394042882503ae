#include "nmmu/timer.hpp"

namespace nmmu {

PendingBits pendingBits(const TimerState& t) {
    PendingBits p;
    p.stip = t.menvcfgStce && t.mtime >= t.stimecmp;
    p.vstip = t.menvcfgStce && t.henvcfgStce && t.guestTime() >= t.vstimecmp;
    return p;
}

TimerState advanceTime(TimerState t, uint64_t delta) {
    t.mtime += delta;
    return t;
}

std::string_view csrOutcomeName(CsrAccessOutcome::Kind k) {
    switch (k) {
    case CsrAccessOutcome::Kind::Value: return "value";
    case CsrAccessOutcome::Kind::IllegalInstruction: return "illegal-instruction";
    case CsrAccessOutcome::Kind::VirtualInstruction: return "virtual-instruction";
    }
    return "?";
}

CsrAccessOutcome timerCsrAccess(TimerState& t, TimerCsr which, PrivilegeMode priv, bool vBit,
                                std::optional<uint64_t> write) {
    auto access = [&](uint64_t& reg) {
        if (write)
            reg = *write;
        return CsrAccessOutcome::ofValue(reg);
    };
    if (priv == PrivilegeMode::Machine)
        return access(which == TimerCsr::Stimecmp ? t.stimecmp : t.vstimecmp);
    if (!t.menvcfgStce)
        return CsrAccessOutcome::illegal();
    if (!vBit) {
        // vstimecmp is an HS-level CSR; U-mode sees neither register.
        if (priv == PrivilegeMode::User)
            return CsrAccessOutcome::illegal();
        return access(which == TimerCsr::Stimecmp ? t.stimecmp : t.vstimecmp);
    }
    // Guest side: hypervisor CSRs and VU-mode accesses trap to HS.
    if (which == TimerCsr::Vstimecmp || priv == PrivilegeMode::User || !t.henvcfgStce)
        return CsrAccessOutcome::virtualInstr();
    return access(t.vstimecmp);
}

}  // namespace nmmu
