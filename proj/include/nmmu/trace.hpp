#pragma once

#include "nmmu/arch.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmmu {

enum class TraceOp : uint8_t {
    Fetch,
    Load,
    Store,
    SfenceVma,
    HfenceVvma,
    HfenceGvma,
    TimerEvent,
    ContextSwitch,
};

std::string_view traceOpName(TraceOp op);
// Throws SimError(ParseError).
TraceOp parseTraceOp(std::string_view name);
bool isAddressOp(TraceOp op);
AccessType accessOf(TraceOp op);

// Address ops: addr/asid (and vmid when vBit) are set.
// sfence.vma / hfence.vvma: addr = va filter, asid = asid filter.
// hfence.gvma: addr = gpa filter, vmid = vmid filter.
struct TraceRecord {
    TraceOp op = TraceOp::Load;
    std::optional<uint64_t> addr;
    std::optional<Asid> asid;
    std::optional<Vmid> vmid;
    bool vBit = true;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

// One record per line: `<op> <hex-addr> <asid> <vmid> <v>`, `-` for an
// absent operand, `#` starts a comment.
std::string formatTraceRecord(const TraceRecord& r);
TraceRecord parseTraceRecord(std::string_view line);
void writeTrace(std::ostream& out, const Trace& trace);
Trace readTrace(std::istream& in);
Trace loadTraceFile(const std::string& path);
void saveTraceFile(const Trace& trace, const std::string& path);

enum class TraceKind : uint8_t { Sequential, Uniform, Zipf, PointerChase };
std::string_view traceKindName(TraceKind k);
TraceKind parseTraceKind(std::string_view name);

struct TraceParams {
    TraceKind kind = TraceKind::Sequential;
    uint64_t pages = 1;
    uint64_t length = 1;
    std::optional<uint64_t> fencePeriod;  // hfence.gvma after every N accesses
    std::optional<uint64_t> timerPeriod;  // timer event after every N accesses
    uint64_t seed = 0;
    double zipfExponent = 1.0;
    uint64_t vaBase = 0x0010'0000'0000;  // page i lives at vaBase + i*4K
    Asid asid = 1;
    Vmid vmid = 1;
    bool vBit = true;
    double storeFraction = 0.25;
};

// Deterministic for a given params value. `length` counts address ops;
// fence and timer records are extra. Throws SimError(InvalidParameter).
Trace genTrace(const TraceParams& p);

// Alternates `block` records from each input until both are exhausted.
Trace interleaveTraces(const Trace& a, const Trace& b, size_t block);

struct NamedTrace {
    std::string name;
    Trace trace;
};

// Fixed-seed workloads used by the sweep checks and the shipped data.
std::vector<NamedTrace> bundledTraceSuite();

}  // namespace nmmu
