#pragma once

#include <memory>
#include <string>

#include "imdsec/energy/model.hpp"

#include "imdsec/audit.hpp"
#include "imdsec/netsim/world.hpp"

namespace imdsec::netsim {

enum class UserKind : std::uint8_t { HonestTrusted, MaliciousTrusted, Attacker };
enum class ScenarioMode : std::uint8_t { Online, Offline, Bedside, Remote };

const char* user_kind_name(UserKind u);
const char* scenario_mode_name(ScenarioMode m);

/// One row of the attack matrix (user x reader kind), plus the knobs the
/// verdict depends on.
struct ScenarioSpec {
    std::string name = "custom";
    UserKind user = UserKind::HonestTrusted;
    entities::ReaderKind readerKind = entities::ReaderKind::Valid;
    ScenarioMode mode = ScenarioMode::Online;
    std::string expected = "success";

    UserRole role = UserRole::Physician;
    bool correctPin = true;
    bool inHospitalZone = true;
    bool inWorkingHours = true;
    bool nrOfflineRequired = true;
    std::vector<Command> commands = {Command{CommandKind::WriteTherapy, 42}};

    // Deployment knobs threaded through from the CLI run config.
    std::uint32_t tokenLifetimeMs = 3600000;
    std::size_t flashCapacityBytes = 32768;
    crypto::ImplClass implClass = crypto::ImplClass::HardwareAccelerated;
    std::shared_ptr<const energy::CostTable> costTable;  // null = calibrated defaults
};

/// The seven standard scenarios; n in [1, 7].
ScenarioSpec standard_scenario(int n);

struct ScenarioResult {
    std::string observed;  // verdict token compared against spec.expected
    bool asExpected = false;
    std::string details;
    std::string traceText;
    Bytes flashDump;        // implant evidence store after the run
    Certificate cardCert;   // for offline audits of the dump
};

ScenarioResult run_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// ---- reusable five-entity fixture ----------------------------------------

struct TestbedConfig {
    std::uint64_t seed = 1;
    UserRole role = UserRole::Physician;
    entities::ReaderKind readerKind = entities::ReaderKind::Valid;
    std::uint32_t pin = 1234;
    bool inHospitalZone = true;
    bool inWorkingHours = true;     // shifts the world start clock when false
    bool nrOfflineRequired = true;
    bool zpdEnabled = true;
    bool oobArmed = true;
    bool forceCpp = false;
    std::uint8_t puzzleDifficulty = 8;
    std::uint32_t tokenLifetimeMs = 3600000;
    std::size_t flashCapacityBytes = 32768;
    std::size_t readStatusAnsBytes = kAnswerBytes;
    crypto::ImplClass implClass = crypto::ImplClass::HardwareAccelerated;
    bool withRemoteTopology = false;  // adds remote hospital + manufacturer
    bool implantRegisteredAtManufacturer = true;
    std::uint64_t eventBudget = 200000;
    std::shared_ptr<const energy::CostTable> costTable;  // null = calibrated defaults
};

/// Fully keyed world: CA, hospital server, reader, card, implant, and the
/// remote-hospital chain when asked for.
struct Testbed {
    std::unique_ptr<World> world;
    entities::CertificateAuthority ca;

    EntityId serverId, readerId, cardId, implantId;
    EntityId remoteServerId, manufacturerId;

    HospitalServer* server = nullptr;
    HospitalServer* remoteServer = nullptr;  // null unless remote topology
    ManufacturerServer* manufacturer = nullptr;
    Reader* reader = nullptr;
    SmartCard* card = nullptr;
    Implant* implant = nullptr;

    Certificate cardCert;
    std::uint32_t pin = 1234;

    AuditReport audit() const;
};

Testbed make_testbed(const TestbedConfig& cfg);

/// Battery-DoS flood: `attempts` bogus session-establishment starts against
/// the implant (well-formed sizes, junk cryptograms). Each attempt costs one
/// authentication window; with the zero-power defense enabled the battery
/// ledger never moves.
struct FloodReport {
    int attempts = 0;
    double batterySpentUj = 0;
    double harvestedSpentUj = 0;
};
FloodReport battery_dos_flood(Testbed& tb, int attempts);

}  // namespace imdsec::netsim
