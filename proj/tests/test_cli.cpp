#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "imdsec/audit.hpp"
#include "imdsec/energy/model.hpp"
#include "imdsec/netsim/scenario.hpp"

using namespace imdsec;

namespace {

int run_args(std::initializer_list<std::string> args, std::string& out) {
    return imdsec::cli::run_cli(std::vector<std::string>(args), out);
}

std::string temp_path(const char* name) {
    return std::string("/tmp/imdsec_cli_test_") + name;
}

}  // namespace

TEST_CASE("run: standard scenario exits 0 with asExpected verdict") {
    std::string out;
    int code = run_args({"run", "--scenario", "S2", "--seed", "7"}, out);
    CHECK(code == 0);
    CHECK(out.find("verdict=asExpected") != std::string::npos);
}

TEST_CASE("run: all scenarios under one seed") {
    std::string out;
    int code = run_args({"run", "--all-scenarios", "--seed", "3"}, out);
    CHECK(code == 0);
    for (int n = 1; n <= 7; ++n) {
        CHECK(out.find("S" + std::to_string(n) + " ") != std::string::npos);
    }
}

TEST_CASE("run: invalid cost-table path exits 2 with a message") {
    std::string out;
    int code = run_args({"energy-report", "--cost-table", "/nonexistent/table.json"}, out);
    CHECK(code == 2);
    CHECK(out.find("error") != std::string::npos);
}

TEST_CASE("run: unknown scenario name exits 2") {
    std::string out;
    CHECK(run_args({"run", "--scenario", "S9"}, out) == 2);
}

TEST_CASE("CLI output matches the library API (thin-shell check)") {
    std::string out;
    int code = run_args({"run", "--scenario", "S1", "--seed", "42", "--format", "csv"}, out);
    CHECK(code == 0);

    auto spec = netsim::standard_scenario(1);
    auto result = netsim::run_scenario(spec, 42);
    std::ostringstream expect;
    expect << "scenario,seed,verdict,observed,expected\n";
    expect << "S1,42," << (result.asExpected ? "asExpected" : "deviation") << ','
           << result.observed << ',' << spec.expected << '\n';
    CHECK(out == expect.str());
}

TEST_CASE("energy-report text shows the published values; csv reparses") {
    std::string text;
    CHECK(run_args({"energy-report"}, text) == 0);
    CHECK(text.find("without-security") != std::string::npos);
    CHECK(text.find("hw-aes") != std::string::npos);
    CHECK(text.find("16.61") != std::string::npos);
    CHECK(text.find("108.31") != std::string::npos);
    CHECK(text.find("217.89") != std::string::npos);

    std::string csv;
    CHECK(run_args({"energy-report", "--format", "csv"}, csv) == 0);
    // Reparse the CSV and compare against the library numbers.
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    auto table = energy::CostTable::calibrated();
    auto profile = energy::UsageProfile::daily();
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name, cell;
        std::getline(ls, name, ',');
        std::getline(ls, cell, ',');
        double sessionUj = std::stod(cell);
        std::getline(ls, cell, ',');
        double dailyJ = std::stod(cell);
        if (name == "without-security") {
            CHECK(sessionUj ==
                  doctest::Approx(energy::session_energy_uj_nosec(
                                      table, energy::nosec_session_steps(table.budget)))
                      .epsilon(1e-9));
            CHECK(dailyJ == doctest::Approx(energy::daily_energy_j_nosec(table, profile))
                                .epsilon(1e-9));
        }
        if (name == "sw-speck") {
            double dHw = energy::daily_energy_j(table, crypto::ImplClass::HardwareAccelerated,
                                                profile);
            double dSw = energy::daily_energy_j(table, crypto::ImplClass::SoftwareAes, profile);
            CHECK(dailyJ > dHw);
            CHECK(dailyJ < dSw);
        }
        ++rows;
    }
    CHECK(rows == 5);
}

TEST_CASE("dump-cost-table emits JSON the loader accepts") {
    std::string out;
    auto path = temp_path("table.json");
    CHECK(run_args({"dump-cost-table", "--out", path}, out) == 0);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto table = energy::CostTable::from_json(ss.str());
    CHECK(energy::auth_energy_uj(table, crypto::ImplClass::HardwareAccelerated) ==
          doctest::Approx(59.6).epsilon(1e-9));

    // And the override flag consumes it.
    std::string report;
    CHECK(run_args({"energy-report", "--cost-table", path}, report) == 0);
    CHECK(report.find("hw-aes") != std::string::npos);
}

TEST_CASE("audit-flash verifies an honest dump and flags a forged record") {
    auto dumpPath = temp_path("flash.bin");
    auto certPath = temp_path("card.cert");
    std::string out;
    int code = run_args({"run", "--scenario", "S1", "--seed", "9", "--dump-flash", dumpPath,
                    "--dump-card-cert", certPath},
                   out);
    REQUIRE(code == 0);

    std::string report;
    CHECK(run_args({"audit-flash", dumpPath, certPath}, report) == 0);
    CHECK(report.find("VERIFIED") != std::string::npos);
    CHECK(report.find("failed=0") != std::string::npos);

    // Append one forged record: exactly that one fails.
    {
        std::ofstream f(dumpPath, std::ios::binary | std::ios::app);
        Bytes forged(72, 0x5A);
        f.write(reinterpret_cast<const char*>(forged.data()), 72);
    }
    std::string report2;
    CHECK(run_args({"audit-flash", dumpPath, certPath}, report2) == 0);
    CHECK(report2.find("failed=1") != std::string::npos);

    // Empty dump: empty report, still exit 0.
    auto emptyPath = temp_path("empty.bin");
    std::ofstream(emptyPath, std::ios::binary).close();
    std::string report3;
    CHECK(run_args({"audit-flash", emptyPath, certPath}, report3) == 0);
    CHECK(report3.find("records=0") != std::string::npos);
}

TEST_CASE("config file fills defaults, flags override") {
    auto cfgPath = temp_path("run.json");
    {
        std::ofstream f(cfgPath);
        f << R"({"scenario": "S2", "seed": 11, "format": "csv"})";
    }
    std::string out;
    CHECK(run_args({"run", "--config", cfgPath}, out) == 0);
    CHECK(out.find("S2,11,asExpected") != std::string::npos);

    std::string out2;
    CHECK(run_args({"run", "--config", cfgPath, "--seed", "12"}, out2) == 0);
    CHECK(out2.find("S2,12,asExpected") != std::string::npos);
}

TEST_CASE("custom scenario spec file") {
    auto specPath = temp_path("spec.json");
    {
        std::ofstream f(specPath);
        f << R"({"name": "nurse-read", "mode": "online", "role": "nurse",
                 "commands": [{"kind": "ReadStatus", "payload": 0}],
                 "expected": "success"})";
    }
    std::string out;
    CHECK(run_args({"run", "--spec", specPath, "--seed", "4"}, out) == 0);
    CHECK(out.find("nurse-read") != std::string::npos);
    CHECK(out.find("verdict=asExpected") != std::string::npos);

    // A deviating expectation exits 1.
    {
        std::ofstream f(specPath);
        f << R"({"name": "nurse-write", "mode": "online", "role": "nurse",
                 "commands": [{"kind": "WriteTherapy", "payload": 1}],
                 "expected": "success"})";
    }
    std::string out2;
    CHECK(run_args({"run", "--spec", specPath, "--seed", "4"}, out2) == 1);
    CHECK(out2.find("verdict=deviation") != std::string::npos);
}

TEST_CASE("run validates the cost-table path too") {
    std::string out;
    CHECK(run_args({"run", "--scenario", "S1", "--cost-table", "/no/such/file.json"}, out) == 2);
    CHECK(out.find("error") != std::string::npos);

    // And a valid one is accepted.
    std::string dump;
    auto path = temp_path("run_table.json");
    REQUIRE(run_args({"dump-cost-table", "--out", path}, dump) == 0);
    std::string ok;
    CHECK(run_args({"run", "--scenario", "S2", "--seed", "3", "--cost-table", path}, ok) == 0);
}
