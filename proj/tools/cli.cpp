#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "imdsec/audit.hpp"
#include "imdsec/energy/model.hpp"
#include "imdsec/netsim/scenario.hpp"

namespace imdsec::cli {

namespace {

using nlohmann::json;
using namespace imdsec::netsim;
using crypto::ImplClass;

struct RunConfig {
    std::string scenario = "S1";
    std::string specPath;
    std::uint64_t seed = 1;
    std::string mode;  // empty = scenario default
    std::string costTablePath;
    std::string implClass = "hw-aes";
    std::uint32_t tokenLifetimeMs = 3600000;
    std::size_t flashCapacityBytes = 32768;
    bool nrOffline = true;
    std::string format = "text";
    std::string traceOut;
    std::string reportOut;
    std::string flashDumpOut;
    std::string cardCertOut;
    bool allScenarios = false;
    int seedCount = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

void write_file(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

energy::CostTable load_cost_table(const std::string& explicitPath) {
    std::string path = explicitPath;
    if (path.empty()) {
        if (const char* env = std::getenv("IMDSEC_COST_TABLE")) path = env;
    }
    if (path.empty()) return energy::CostTable::calibrated();
    return energy::CostTable::from_json(read_file(path));
}

CommandKind command_kind_from(const std::string& name) {
    if (name == "ReadStatus") return CommandKind::ReadStatus;
    if (name == "WriteTherapy") return CommandKind::WriteTherapy;
    if (name == "Suspend") return CommandKind::Suspend;
    if (name == "Resume") return CommandKind::Resume;
    if (name == "FirmwareUpdate") return CommandKind::FirmwareUpdate;
    if (name == "Finish") return CommandKind::Finish;
    throw std::runtime_error("unknown command kind: " + name);
}

ScenarioMode mode_from(const std::string& name) {
    if (name == "online") return ScenarioMode::Online;
    if (name == "offline") return ScenarioMode::Offline;
    if (name == "bedside") return ScenarioMode::Bedside;
    if (name == "remote") return ScenarioMode::Remote;
    throw std::runtime_error("unknown mode: " + name);
}

ScenarioSpec spec_from_json(const json& j) {
    ScenarioSpec spec;
    spec.name = j.value("name", std::string("custom"));
    if (j.contains("mode")) spec.mode = mode_from(j.at("mode").get<std::string>());
    if (j.contains("readerKind")) {
        auto rk = j.at("readerKind").get<std::string>();
        if (rk == "valid") spec.readerKind = entities::ReaderKind::Valid;
        else if (rk == "stolen") spec.readerKind = entities::ReaderKind::Stolen;
        else if (rk == "hacked") spec.readerKind = entities::ReaderKind::Hacked;
        else if (rk == "forged") spec.readerKind = entities::ReaderKind::Forged;
        else throw std::runtime_error("unknown readerKind: " + rk);
    }
    if (j.contains("role")) {
        auto role = j.at("role").get<std::string>();
        if (role == "patient") spec.role = UserRole::Patient;
        else if (role == "nurse") spec.role = UserRole::Nurse;
        else if (role == "relative") spec.role = UserRole::Relative;
        else if (role == "physician") spec.role = UserRole::Physician;
        else if (role == "paramedic") spec.role = UserRole::Paramedic;
        else if (role == "technician") spec.role = UserRole::Technician;
        else throw std::runtime_error("unknown role: " + role);
    }
    spec.correctPin = j.value("correctPin", true);
    spec.inHospitalZone = j.value("inHospitalZone", true);
    spec.inWorkingHours = j.value("inWorkingHours", true);
    spec.nrOfflineRequired = j.value("nrOffline", true);
    spec.expected = j.value("expected", std::string("success"));
    if (j.contains("commands")) {
        spec.commands.clear();
        for (const auto& c : j.at("commands")) {
            spec.commands.push_back(Command{command_kind_from(c.at("kind").get<std::string>()),
                                            c.value("payload", 0u)});
        }
    }
    return spec;
}

int cmd_run(const RunConfig& cfg, std::ostringstream& out) {
    ScenarioSpec spec;
    if (!cfg.specPath.empty()) {
        spec = spec_from_json(json::parse(read_file(cfg.specPath)));
    } else if (cfg.scenario.size() == 2 && cfg.scenario[0] == 'S' && cfg.scenario[1] >= '1' &&
               cfg.scenario[1] <= '7') {
        spec = standard_scenario(cfg.scenario[1] - '0');
    } else {
        throw std::runtime_error("unknown scenario: " + cfg.scenario +
                                 " (use S1..S7 or --spec <file>)");
    }
    if (!cfg.mode.empty()) spec.mode = mode_from(cfg.mode);
    spec.tokenLifetimeMs = cfg.tokenLifetimeMs;
    spec.flashCapacityBytes = cfg.flashCapacityBytes;
    spec.nrOfflineRequired = cfg.nrOffline;
    auto implClass = crypto::impl_class_from_name(cfg.implClass);
    if (!implClass) throw std::runtime_error("unknown implementation class: " + cfg.implClass);
    spec.implClass = *implClass;
    spec.costTable = std::make_shared<energy::CostTable>(load_cost_table(cfg.costTablePath));

    struct Row {
        std::string name;
        std::uint64_t seed;
        ScenarioResult result;
        std::string expected;
    };
    std::vector<Row> rows;
    bool allExpected = true;
    const int scenarioCount = cfg.allScenarios ? 7 : 1;
    // Worlds share nothing: batch runs fan out, per-world seeds keep each
    // trace deterministic, and collection order keeps the report stable.
    std::vector<std::future<Row>> pending;
    for (int r = 0; r < scenarioCount; ++r) {
        ScenarioSpec active = spec;
        if (cfg.allScenarios) {
            active = standard_scenario(r + 1);
            active.tokenLifetimeMs = spec.tokenLifetimeMs;
            active.flashCapacityBytes = spec.flashCapacityBytes;
            active.implClass = spec.implClass;
        }
        for (int s = 0; s < cfg.seedCount; ++s) {
            std::uint64_t seed = cfg.seed + std::uint64_t(s);
            pending.push_back(std::async(std::launch::async, [active, seed]() {
                return Row{active.name, seed, run_scenario(active, seed), active.expected};
            }));
        }
    }
    for (auto& f : pending) {
        rows.push_back(f.get());
        allExpected = allExpected && rows.back().result.asExpected;
    }

    if (!cfg.traceOut.empty()) write_file(cfg.traceOut, rows.front().result.traceText);
    if (!cfg.flashDumpOut.empty()) write_file(cfg.flashDumpOut, rows.front().result.flashDump);
    if (!cfg.cardCertOut.empty())
        write_file(cfg.cardCertOut, rows.front().result.cardCert.encode());

    std::ostringstream report;
    if (cfg.format == "csv") {
        report << "scenario,seed,verdict,observed,expected\n";
        for (const auto& row : rows) {
            report << row.name << ',' << row.seed << ','
                   << (row.result.asExpected ? "asExpected" : "deviation") << ','
                   << row.result.observed << ',' << row.expected << '\n';
        }
    } else {
        for (const auto& row : rows) {
            report << row.name << " seed=" << row.seed
                   << " verdict=" << (row.result.asExpected ? "asExpected" : "deviation")
                   << " observed=" << row.result.observed << " expected=" << row.expected << " "
                   << row.result.details << '\n';
        }
    }

    out << report.str();
    if (!cfg.reportOut.empty()) write_file(cfg.reportOut, report.str());
    return allExpected ? 0 : 1;
}

int cmd_energy_report(const std::string& costTablePath, const std::string& format,
                      double sessionsPerDay, double ansBytes, std::ostringstream& out) {
    auto table = load_cost_table(costTablePath);
    auto profile = energy::UsageProfile::daily();
    profile.sessionsPerDay = sessionsPerDay;
    profile.ansVolumeBytes = ansBytes;

    struct Row {
        std::string name;
        double sessionUj, dailyJ, delayMs;
        std::vector<double> lifetimes;
    };
    std::vector<Row> rows;
    {
        Row r{"without-security",
              energy::session_energy_uj_nosec(table, energy::nosec_session_steps(table.budget)),
              energy::daily_energy_j_nosec(table, profile),
              energy::session_delay_ms_nosec(table, energy::nosec_session_steps(table.budget)),
              {}};
        for (double cap : profile.batteryCapacitiesJ)
            r.lifetimes.push_back(energy::lifetime_days_nosec(table, profile, cap));
        rows.push_back(std::move(r));
    }
    for (auto c : {ImplClass::HardwareAccelerated, ImplClass::SoftwareAes, ImplClass::SoftwareSpeck,
                   ImplClass::SoftwareMisty1}) {
        Row r{crypto::impl_class_name(c),
              energy::session_energy_uj(table, c, energy::basic_session_steps(table.budget)),
              energy::daily_energy_j(table, c, profile), energy::protocol_delay_ms(table, c),
              {}};
        for (double cap : profile.batteryCapacitiesJ)
            r.lifetimes.push_back(energy::lifetime_days(table, c, profile, cap));
        rows.push_back(std::move(r));
    }

    if (format == "csv") {
        out << "class,session_uj,daily_j,delay_ms";
        for (double cap : profile.batteryCapacitiesJ) out << ",lifetime_days_" << cap << "J";
        out << "\n";
        for (const auto& r : rows) {
            out << r.name << ',' << r.sessionUj << ',' << r.dailyJ << ',' << r.delayMs;
            for (double l : r.lifetimes) out << ',' << l;
            out << '\n';
        }
    } else {
        out << "class              session(uJ)  daily(J)  delay(ms)  lifetime(days)";
        out << "\n";
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%-18s %10.2f %9.2f %10.2f  ", r.name.c_str(),
                          r.sessionUj, r.dailyJ, r.delayMs);
            out << buf;
            for (std::size_t i = 0; i < r.lifetimes.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%s%.0f@%.0fkJ", i ? " " : "", r.lifetimes[i],
                              profile.batteryCapacitiesJ[i] / 1000.0);
                out << buf;
            }
            out << '\n';
        }
        double none = rows[0].dailyJ;
        std::snprintf(buf, sizeof buf, "daily overhead: hw-aes +%.2f%%, sw-aes +%.2f%%\n",
                      (rows[1].dailyJ - none) / none * 100.0,
                      (rows[2].dailyJ - none) / none * 100.0);
        out << buf;
    }
    return 0;
}

int cmd_audit_flash(const std::string& dumpPath, const std::string& certPath,
                    std::ostringstream& out) {
    auto dump = read_file(dumpPath);
    auto certBytes = read_file(certPath);
    auto cert = Certificate::decode(
        BytesView(reinterpret_cast<const std::uint8_t*>(certBytes.data()), certBytes.size()));
    if (!cert) throw std::runtime_error("malformed certificate file: " + certPath);
    auto report = audit_flash_dump(
        BytesView(reinterpret_cast<const std::uint8_t*>(dump.data()), dump.size()), *cert);
    out << audit_report_text(report);
    return 0;
}

int cmd_dump_cost_table(const std::string& outPath, std::ostringstream& out) {
    auto table = energy::CostTable::calibrated();
    auto text = table.to_json();
    if (outPath.empty())
        out << text << "\n";
    else
        write_file(outPath, text);
    return 0;
}

void apply_config_file(RunConfig& rc, const std::string& path) {
    auto j = json::parse(read_file(path));
    rc.scenario = j.value("scenario", rc.scenario);
    rc.specPath = j.value("spec", rc.specPath);
    rc.seed = j.value("seed", rc.seed);
    rc.mode = j.value("mode", rc.mode);
    rc.costTablePath = j.value("costTable", rc.costTablePath);
    rc.implClass = j.value("implementationClass", rc.implClass);
    rc.tokenLifetimeMs = j.value("tokenLifetimeMs", rc.tokenLifetimeMs);
    rc.flashCapacityBytes = j.value("flashCapacityBytes", rc.flashCapacityBytes);
    rc.nrOffline = j.value("nrOffline", rc.nrOffline);
    rc.format = j.value("format", rc.format);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::string& output) {
    CLI::App app{"IMD ecosystem security-protocol simulator"};
    app.require_subcommand(1);
    std::ostringstream out;

    RunConfig rc;
    std::string configPath;
    auto* run = app.add_subcommand("run", "run a scenario and report the verdict");
    run->add_option("--scenario", rc.scenario, "S1..S7");
    run->add_option("--spec", rc.specPath, "custom scenario spec (JSON)");
    run->add_option("--config", configPath, "run-config JSON; flags override");
    run->add_option("--seed", rc.seed, "world seed");
    run->add_option("--mode", rc.mode, "online|offline|bedside|remote");
    run->add_option("--cost-table", rc.costTablePath, "cost table JSON path");
    run->add_option("--class", rc.implClass, "hw-aes|sw-aes|sw-speck|sw-misty1");
    run->add_option("--tl-ms", rc.tokenLifetimeMs, "reader-card token lifetime T_L (ms)");
    run->add_option("--flash-bytes", rc.flashCapacityBytes, "implant signature-flash bytes");
    run->add_option("--nr-offline", rc.nrOffline, "offline non-repudiation required");
    run->add_option("--format", rc.format, "text|csv");
    run->add_option("--trace-out", rc.traceOut, "write the event trace here");
    run->add_option("--report-out", rc.reportOut, "write the verdict report here");
    run->add_option("--dump-flash", rc.flashDumpOut, "write the implant flash dump here");
    run->add_option("--dump-card-cert", rc.cardCertOut, "write the card certificate here");
    run->add_flag("--all-scenarios", rc.allScenarios, "run S1..S7");
    run->add_option("--seeds", rc.seedCount, "seeds per scenario");

    std::string erCostTable, erFormat = "text";
    double erSessions = 1.0, erAnsBytes = energy::PublishedFigures::kDailyAnsBytes;
    auto* er = app.add_subcommand("energy-report", "Table-4 style energy/delay/lifetime report");
    er->add_option("--cost-table", erCostTable, "cost table JSON path");
    er->add_option("--format", erFormat, "text|csv");
    er->add_option("--sessions-per-day", erSessions, "monitoring sessions per day");
    er->add_option("--ans-bytes", erAnsBytes, "ANS volume per session (bytes)");

    std::string afDump, afCert;
    auto* af = app.add_subcommand("audit-flash", "verify a signature-flash dump");
    af->add_option("dump", afDump, "72-byte-record dump file")->required();
    af->add_option("cert", afCert, "card certificate file")->required();

    std::string dctOut;
    auto* dct = app.add_subcommand("dump-cost-table",
                                   "regenerate the calibrated cost table as JSON");
    dct->add_option("--out", dctOut, "output path (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    int code = 2;
    try {
        app.parse(reversed);
        if (run->parsed()) {
            if (!configPath.empty()) {
                // File fills whatever the command line left at defaults;
                // explicitly passed flags always win.
                RunConfig merged = rc;
                apply_config_file(merged, configPath);
                if (run->count("--scenario")) merged.scenario = rc.scenario;
                if (run->count("--spec")) merged.specPath = rc.specPath;
                if (run->count("--seed")) merged.seed = rc.seed;
                if (run->count("--mode")) merged.mode = rc.mode;
                if (run->count("--cost-table")) merged.costTablePath = rc.costTablePath;
                if (run->count("--class")) merged.implClass = rc.implClass;
                if (run->count("--tl-ms")) merged.tokenLifetimeMs = rc.tokenLifetimeMs;
                if (run->count("--flash-bytes")) merged.flashCapacityBytes = rc.flashCapacityBytes;
                if (run->count("--nr-offline")) merged.nrOffline = rc.nrOffline;
                if (run->count("--format")) merged.format = rc.format;
                rc = merged;
            }
            code = cmd_run(rc, out);
        } else if (er->parsed()) {
            code = cmd_energy_report(erCostTable, erFormat, erSessions, erAnsBytes, out);
        } else if (af->parsed()) {
            code = cmd_audit_flash(afDump, afCert, out);
        } else if (dct->parsed()) {
            code = cmd_dump_cost_table(dctOut, out);
        }
    } catch (const CLI::ParseError& e) {
        out << "argument error: " << e.what() << "\n";
        code = 2;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        code = 2;
    }
    output = out.str();
    return code;
}

}  // namespace imdsec::cli
