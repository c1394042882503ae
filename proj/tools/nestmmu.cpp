#include "nmmu/config.hpp"
#include "nmmu/dse.hpp"
#include "nmmu/errors.hpp"
#include "nmmu/mmu.hpp"
#include "nmmu/scenario.hpp"
#include "nmmu/trace.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace nmmu;
using nlohmann::json;

namespace {

uint64_t parseHex(const std::string& s) {
    size_t pos = 0;
    const uint64_t v = std::stoull(s, &pos, 16);
    if (pos != s.size())
        throw SimError(ErrorCode::ParseError, "bad hex value '" + s + "'");
    return v;
}

AccessType parseAccess(const std::string& s) {
    if (s == "fetch")
        return AccessType::Fetch;
    if (s == "load")
        return AccessType::Load;
    if (s == "store")
        return AccessType::Store;
    throw SimError(ErrorCode::ParseError, "access must be fetch, load or store");
}

std::string hex(uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}

// A preset name or a path to a config JSON file.
MmuConfig resolveConfig(const std::string& arg) {
    if (!std::filesystem::exists(arg))
        return presetByName(arg);
    return loadConfigFile(arg);
}

Scenario resolveScenario(const std::string& arg) {
    if (arg == "bundled")
        return buildLinuxLikeScenario(1, 1024, PageSize::Size2M);
    return loadScenarioFile(arg);
}

json rowToJson(const ReportRow& r) {
    return json::parse(emitReport({r}, ReportFormat::Json)).at(0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nested (two-stage) RISC-V MMU model and design-space sweep"};
    app.require_subcommand(1);

    std::string configArg, scenarioArg = "bundled", vaArg, accessArg = "load";
    bool vBit = false;
    uint16_t asid = 1, vmid = 1;
    auto* translate = app.add_subcommand("translate", "Translate one address and print JSON");
    translate->add_option("--config", configArg, "Config JSON file or preset name")->required();
    translate->add_option("--scenario", scenarioArg, "Scenario JSON file, or 'bundled'");
    translate->add_option("--va", vaArg, "Virtual address (hex)")->required();
    translate->add_option("--access", accessArg, "fetch|load|store");
    translate->add_flag("--v", vBit, "Guest (V=1) access");
    translate->add_option("--asid", asid, "ASID tag");
    translate->add_option("--vmid", vmid, "VMID tag");

    std::string traceArg;
    auto* run = app.add_subcommand("run", "Run one trace and print a report row");
    run->add_option("--config", configArg, "Config JSON file or preset name")->required();
    run->add_option("--scenario", scenarioArg, "Scenario JSON file, or 'bundled'");
    run->add_option("--trace", traceArg, "Trace file")->required();

    std::string configsArg, tracesDir, outArg, formatArg = "csv";
    auto* sweepCmd = app.add_subcommand("sweep", "Run every config against every trace");
    sweepCmd->add_option("--configs", configsArg, "Config-set JSON (array or {configs: [...]})")
        ->required();
    sweepCmd->add_option("--scenario", scenarioArg, "Scenario JSON file, or 'bundled'");
    sweepCmd->add_option("--traces", tracesDir, "Directory of *.trace files")->required();
    sweepCmd->add_option("--out", outArg, "Report path ('-' for stdout)")->required();
    sweepCmd->add_option("--format", formatArg, "csv|json");

    std::string kindArg = "zipf";
    uint64_t pages = 1000, length = 10000, seed = 0;
    double zipfExponent = 1.0;
    std::optional<uint64_t> fencePeriod, timerPeriod;
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace");
    gen->add_option("--kind", kindArg, "sequential|uniform|zipf|pointer-chase");
    gen->add_option("--pages", pages, "Distinct pages");
    gen->add_option("--length", length, "Address records");
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--zipf-exponent", zipfExponent, "Zipf exponent");
    gen->add_option("--fence-period", fencePeriod, "hfence.gvma every N accesses");
    gen->add_option("--timer-period", timerPeriod, "Timer event every N accesses");
    gen->add_option("--out", outArg, "Output trace file ('-' for stdout)")->required();

    std::string dataDir;
    auto* bundle = app.add_subcommand("write-bundle",
                                      "Write the preset configs, bundled traces and scenario");
    bundle->add_option("--dir", dataDir, "Output data directory")->required();

    auto* presets = app.add_subcommand("presets", "Print every preset config as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*translate) {
            const MmuConfig cfg = resolveConfig(configArg);
            Scenario sc = resolveScenario(scenarioArg);
            Mmu mmu(cfg, sc.memory);
            TranslationContext ctx;
            ctx.vBit = vBit;
            if (vBit) {
                ctx.vsatp = sc.vsRoot ? AtpCsr::sv39(*sc.vsRoot, asid) : AtpCsr::bare(asid);
                ctx.hgatp = sc.gRoot ? AtpCsr::sv39x4(*sc.gRoot, vmid) : AtpCsr::bare(vmid);
            } else {
                ctx.satp = sc.hsRoot ? AtpCsr::sv39(*sc.hsRoot, asid) : AtpCsr::bare(asid);
            }
            const uint64_t va = parseHex(vaArg);
            const auto r = mmu.translate(va, parseAccess(accessArg), ctx);
            json out{{"va", hex(va)},
                     {"served_by", servedByName(r.stats.servedBy)},
                     {"mem_accesses", r.stats.memAccesses},
                     {"cycles", r.stats.cycles},
                     {"gtlb_hits", r.stats.gtlbHits},
                     {"gtlb_misses", r.stats.gtlbMisses}};
            if (r.ok()) {
                out["hpa"] = hex(r.hpa());
            } else {
                const auto& f = r.fault();
                out["fault"] = {{"kind", faultKindName(f.kind)},
                                {"stage", walkStageName(f.stage)},
                                {"gpa", f.gpa ? json(hex(*f.gpa)) : json(nullptr)}};
            }
            std::cout << out.dump(2) << '\n';
            return r.ok() ? 0 : 3;
        }
        if (*run) {
            const MmuConfig cfg = resolveConfig(configArg);
            const Scenario sc = resolveScenario(scenarioArg);
            const Trace t = loadTraceFile(traceArg);
            const auto name = std::filesystem::path(traceArg).stem().string();
            std::cout << rowToJson(runTrace(cfg, sc, t, name)).dump(2) << '\n';
            return 0;
        }
        if (*sweepCmd) {
            const auto configs = loadConfigSet(configsArg);
            const Scenario sc = resolveScenario(scenarioArg);
            std::vector<std::filesystem::path> files;
            for (const auto& e : std::filesystem::directory_iterator(tracesDir))
                if (e.is_regular_file() && e.path().extension() == ".trace")
                    files.push_back(e.path());
            std::sort(files.begin(), files.end());
            if (files.empty())
                throw SimError(ErrorCode::InvalidParameter, "no *.trace files in " + tracesDir);
            std::vector<NamedTrace> traces;
            for (const auto& f : files)
                traces.push_back({f.stem().string(), loadTraceFile(f.string())});
            const std::string text = emitReport(sweep(configs, sc, traces),
                                                parseReportFormat(formatArg));
            if (outArg == "-") {
                std::cout << text;
            } else {
                std::ofstream(outArg) << text;
                std::cerr << "wrote " << outArg << '\n';
            }
            return 0;
        }
        if (*gen) {
            TraceParams p;
            p.kind = parseTraceKind(kindArg);
            p.pages = pages;
            p.length = length;
            p.seed = seed;
            p.zipfExponent = zipfExponent;
            p.fencePeriod = fencePeriod;
            p.timerPeriod = timerPeriod;
            const Trace t = genTrace(p);
            if (outArg == "-")
                writeTrace(std::cout, t);
            else
                saveTraceFile(t, outArg);
            return 0;
        }
        if (*bundle) {
            namespace fs = std::filesystem;
            fs::create_directories(fs::path(dataDir) / "configs");
            fs::create_directories(fs::path(dataDir) / "traces");
            json names = json::array();
            for (const auto& c : presetConfigs()) {
                std::ofstream(fs::path(dataDir) / "configs" / (c.name + ".json"))
                    << configToJson(c).dump(2) << '\n';
                names.push_back(c.name);
            }
            std::ofstream(fs::path(dataDir) / "sweep.json")
                << json{{"configs", names}}.dump(2) << '\n';
            for (const auto& t : bundledTraceSuite())
                saveTraceFile(t.trace, (fs::path(dataDir) / "traces" / (t.name + ".trace")).string());
            saveScenarioFile(buildLinuxLikeScenario(1, 1024, PageSize::Size2M),
                             (fs::path(dataDir) / "scenario.json").string());
            return 0;
        }
        if (*presets) {
            json arr = json::array();
            for (const auto& c : presetConfigs())
                arr.push_back(configToJson(c));
            std::cout << arr.dump(2) << '\n';
            return 0;
        }
    } catch (const SimError& e) {
        std::cerr << "error [" << errorCodeName(e.code()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
