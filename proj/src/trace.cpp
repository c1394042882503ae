#include "nmmu/trace.hpp"

#include "nmmu/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace nmmu {

namespace {

struct OpName {
    TraceOp op;
    std::string_view name;
};

constexpr OpName kOpNames[] = {
    {TraceOp::Fetch, "fetch"},
    {TraceOp::Load, "load"},
    {TraceOp::Store, "store"},
    {TraceOp::SfenceVma, "sfence.vma"},
    {TraceOp::HfenceVvma, "hfence.vvma"},
    {TraceOp::HfenceGvma, "hfence.gvma"},
    {TraceOp::TimerEvent, "timer"},
    {TraceOp::ContextSwitch, "ctxsw"},
};

template <class T>
std::optional<T> parseField(std::string_view tok, int base, std::string_view what) {
    if (tok == "-")
        return std::nullopt;
    if (base == 16 && (tok.starts_with("0x") || tok.starts_with("0X")))
        tok.remove_prefix(2);
    T v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw SimError(ErrorCode::ParseError, "bad " + std::string(what) + " '" +
                                                  std::string(tok) + "'");
    return v;
}

std::string hexOrDash(const std::optional<uint64_t>& v) {
    if (!v)
        return "-";
    std::ostringstream os;
    os << "0x" << std::hex << *v;
    return os.str();
}

template <class T>
std::string decOrDash(const std::optional<T>& v) {
    return v ? std::to_string(*v) : "-";
}

}  // namespace

std::string_view traceOpName(TraceOp op) {
    for (const auto& n : kOpNames)
        if (n.op == op)
            return n.name;
    return "?";
}

TraceOp parseTraceOp(std::string_view name) {
    for (const auto& n : kOpNames)
        if (n.name == name)
            return n.op;
    throw SimError(ErrorCode::ParseError, "unknown trace op '" + std::string(name) + "'");
}

bool isAddressOp(TraceOp op) {
    return op == TraceOp::Fetch || op == TraceOp::Load || op == TraceOp::Store;
}

AccessType accessOf(TraceOp op) {
    switch (op) {
    case TraceOp::Fetch: return AccessType::Fetch;
    case TraceOp::Store: return AccessType::Store;
    default: return AccessType::Load;
    }
}

std::string formatTraceRecord(const TraceRecord& r) {
    std::string s(traceOpName(r.op));
    s += ' ';
    s += hexOrDash(r.addr);
    s += ' ';
    s += decOrDash(r.asid);
    s += ' ';
    s += decOrDash(r.vmid);
    s += r.vBit ? " 1" : " 0";
    return s;
}

TraceRecord parseTraceRecord(std::string_view line) {
    std::vector<std::string_view> tok;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            tok.push_back(line.substr(start, i - start));
    }
    if (tok.size() != 5)
        throw SimError(ErrorCode::ParseError,
                       "trace line needs 5 fields: '" + std::string(line) + "'");
    TraceRecord r;
    r.op = parseTraceOp(tok[0]);
    r.addr = parseField<uint64_t>(tok[1], 16, "address");
    r.asid = parseField<Asid>(tok[2], 10, "asid");
    r.vmid = parseField<Vmid>(tok[3], 10, "vmid");
    const auto v = parseField<unsigned>(tok[4], 10, "v bit");
    if (!v || *v > 1)
        throw SimError(ErrorCode::ParseError, "v bit must be 0 or 1");
    r.vBit = *v == 1;
    if (isAddressOp(r.op) && !r.addr)
        throw SimError(ErrorCode::ParseError, "address op without an address");
    return r;
}

void writeTrace(std::ostream& out, const Trace& trace) {
    out << "# op addr asid vmid v\n";
    for (const auto& r : trace)
        out << formatTraceRecord(r) << '\n';
}

Trace readTrace(std::istream& in) {
    Trace t;
    std::string line;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::string_view sv = line;
        if (const auto hash = sv.find('#'); hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        if (sv.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        try {
            t.push_back(parseTraceRecord(sv));
        } catch (const SimError& e) {
            throw SimError(ErrorCode::ParseError,
                           "line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return t;
}

Trace loadTraceFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SimError(ErrorCode::ParseError, "cannot open " + path);
    return readTrace(in);
}

void saveTraceFile(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw SimError(ErrorCode::ParseError, "cannot write " + path);
    writeTrace(out, trace);
}

std::string_view traceKindName(TraceKind k) {
    switch (k) {
    case TraceKind::Sequential: return "sequential";
    case TraceKind::Uniform: return "uniform";
    case TraceKind::Zipf: return "zipf";
    case TraceKind::PointerChase: return "pointer-chase";
    }
    return "?";
}

TraceKind parseTraceKind(std::string_view name) {
    for (auto k : {TraceKind::Sequential, TraceKind::Uniform, TraceKind::Zipf,
                   TraceKind::PointerChase})
        if (traceKindName(k) == name)
            return k;
    if (name == "uniform-random")
        return TraceKind::Uniform;
    throw SimError(ErrorCode::ParseError, "unknown trace kind '" + std::string(name) + "'");
}

Trace genTrace(const TraceParams& p) {
    if (p.pages == 0 || p.length == 0)
        throw SimError(ErrorCode::InvalidParameter, "trace needs pages >= 1 and length >= 1");
    if (p.fencePeriod == 0u || p.timerPeriod == 0u)
        throw SimError(ErrorCode::InvalidParameter, "fence/timer period must be >= 1");
    if (p.storeFraction < 0.0 || p.storeFraction > 1.0 || !(p.zipfExponent >= 0.0))
        throw SimError(ErrorCode::InvalidParameter, "bad store fraction or zipf exponent");

    std::mt19937_64 rng(p.seed);
    std::uniform_int_distribution<uint64_t> pageDist(0, p.pages - 1);
    std::uniform_int_distribution<uint64_t> offsetDist(0, kPageBytes / 8 - 1);
    std::bernoulli_distribution storeDist(p.storeFraction);

    // Zipf: rank r has weight 1/(r+1)^s; ranks land on a shuffled page order.
    std::discrete_distribution<uint64_t> zipf;
    std::vector<uint64_t> order(p.pages);
    std::iota(order.begin(), order.end(), 0);
    if (p.kind == TraceKind::Zipf) {
        std::vector<double> w(p.pages);
        for (uint64_t r = 0; r < p.pages; ++r)
            w[r] = 1.0 / std::pow(static_cast<double>(r + 1), p.zipfExponent);
        zipf = std::discrete_distribution<uint64_t>(w.begin(), w.end());
        std::shuffle(order.begin(), order.end(), rng);
    }
    // Pointer chase: one random cycle through every page.
    std::vector<uint64_t> next(p.pages);
    uint64_t cursor = 0;
    if (p.kind == TraceKind::PointerChase) {
        std::shuffle(order.begin(), order.end(), rng);
        for (uint64_t i = 0; i < p.pages; ++i)
            next[order[i]] = order[(i + 1) % p.pages];
        cursor = order[0];
    }

    Trace t;
    t.reserve(p.length + p.length / p.fencePeriod.value_or(p.length + 1) +
              p.length / p.timerPeriod.value_or(p.length + 1));
    for (uint64_t i = 0; i < p.length; ++i) {
        uint64_t page = 0;
        uint64_t offset = 0;
        switch (p.kind) {
        case TraceKind::Sequential: page = i % p.pages; break;
        case TraceKind::Uniform:
            page = pageDist(rng);
            offset = offsetDist(rng) * 8;
            break;
        case TraceKind::Zipf:
            page = order[zipf(rng)];
            offset = offsetDist(rng) * 8;
            break;
        case TraceKind::PointerChase:
            page = cursor;
            cursor = next[cursor];
            offset = offsetDist(rng) * 8;
            break;
        }
        TraceRecord r;
        r.op = storeDist(rng) ? TraceOp::Store : TraceOp::Load;
        r.addr = p.vaBase + page * kPageBytes + offset;
        r.asid = p.asid;
        if (p.vBit)
            r.vmid = p.vmid;
        r.vBit = p.vBit;
        t.push_back(r);

        const uint64_t n = i + 1;
        if (p.fencePeriod && n % *p.fencePeriod == 0)
            t.push_back({TraceOp::HfenceGvma, std::nullopt, std::nullopt, p.vmid, true});
        if (p.timerPeriod && n % *p.timerPeriod == 0)
            t.push_back({TraceOp::TimerEvent, std::nullopt, std::nullopt, std::nullopt, p.vBit});
    }
    return t;
}

Trace interleaveTraces(const Trace& a, const Trace& b, size_t block) {
    if (block == 0)
        throw SimError(ErrorCode::InvalidParameter, "interleave block must be >= 1");
    Trace t;
    t.reserve(a.size() + b.size());
    size_t ia = 0;
    size_t ib = 0;
    while (ia < a.size() || ib < b.size()) {
        for (size_t k = 0; k < block && ia < a.size(); ++k)
            t.push_back(a[ia++]);
        for (size_t k = 0; k < block && ib < b.size(); ++k)
            t.push_back(b[ib++]);
    }
    return t;
}

std::vector<NamedTrace> bundledTraceSuite() {
    TraceParams zipf;
    zipf.kind = TraceKind::Zipf;
    zipf.pages = 1000;
    zipf.length = 20000;
    zipf.seed = 7;

    TraceParams chase;
    chase.kind = TraceKind::PointerChase;
    chase.pages = 64;
    chase.length = 20000;
    chase.seed = 11;

    TraceParams mixZipf = zipf;
    mixZipf.length = 10000;
    mixZipf.timerPeriod = 250;
    mixZipf.fencePeriod = 5000;
    TraceParams mixChase = chase;
    mixChase.length = 10000;
    mixChase.seed = 13;
    mixChase.timerPeriod = 250;

    return {
        {"zipf", genTrace(zipf)},
        {"pointer-chase", genTrace(chase)},
        {"mixed", interleaveTraces(genTrace(mixZipf), genTrace(mixChase), 32)},
    };
}

}  // namespace nmmu
