#pragma once

#include "nmmu/arch.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace nmmu {

struct TimerState {
    uint64_t mtime = 0;
    uint64_t stimecmp = ~uint64_t{0};
    uint64_t vstimecmp = ~uint64_t{0};
    int64_t htimedelta = 0;
    bool menvcfgStce = false;
    bool henvcfgStce = false;

    // mtime + htimedelta, wrapping.
    [[nodiscard]] uint64_t guestTime() const {
        return mtime + static_cast<uint64_t>(htimedelta);
    }
    friend bool operator==(const TimerState&, const TimerState&) = default;
};

struct PendingBits {
    bool stip = false;
    bool vstip = false;
    friend bool operator==(const PendingBits&, const PendingBits&) = default;
};

PendingBits pendingBits(const TimerState& t);
TimerState advanceTime(TimerState t, uint64_t delta);

enum class TimerCsr : uint8_t { Stimecmp, Vstimecmp };

struct CsrAccessOutcome {
    enum class Kind : uint8_t { Value, IllegalInstruction, VirtualInstruction };
    Kind kind = Kind::Value;
    uint64_t value = 0;  // register contents after the access; only for Value

    static CsrAccessOutcome ofValue(uint64_t v) { return {Kind::Value, v}; }
    static CsrAccessOutcome illegal() { return {Kind::IllegalInstruction, 0}; }
    static CsrAccessOutcome virtualInstr() { return {Kind::VirtualInstruction, 0}; }
    friend bool operator==(const CsrAccessOutcome&, const CsrAccessOutcome&) = default;
};

std::string_view csrOutcomeName(CsrAccessOutcome::Kind k);

// Reads (`write` empty) or writes a timer-compare CSR. A V=1 access to
// stimecmp is redirected to vstimecmp.
CsrAccessOutcome timerCsrAccess(TimerState& t, TimerCsr which, PrivilegeMode priv, bool vBit,
                                std::optional<uint64_t> write = std::nullopt);

}  // namespace nmmu
