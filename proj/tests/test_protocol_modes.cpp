#include "doctest.h"
#include "imdsec/netsim/scenario.hpp"

using namespace imdsec;
using namespace imdsec::netsim;
using entities::RunPlan;

namespace {

void run_duty_start(Testbed& tb) {
    RunPlan duty;
    duty.stopAfter = RunPlan::StopAfter::CardAuth;
    tb.world->start_session(tb.readerId, duty);
    tb.world->run_until_quiescent();
    REQUIRE(tb.reader->outcome().succeeded());
}

}  // namespace

TEST_CASE("offline session over OOB pairing, signature stored as online") {
    TestbedConfig cfg;
    cfg.seed = 2001;
    cfg.role = UserRole::Paramedic;
    auto tb = make_testbed(cfg);
    run_duty_start(tb);

    tb.world->connect_oob(tb.readerId, tb.implantId);
    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.commands = {Command{CommandKind::WriteTherapy, 61}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    REQUIRE(tb.reader->outcome().succeeded());
    CHECK(tb.implant->therapy_setting() == 61);
    auto audit = tb.audit();
    REQUIRE(audit.entries.size() == 1);
    CHECK(audit.entries[0].verified);  // offline evidence verifies like online
}

TEST_CASE("offline access without OOB touch never yields a session") {
    TestbedConfig cfg;
    cfg.seed = 2002;
    cfg.role = UserRole::Paramedic;
    auto tb = make_testbed(cfg);
    run_duty_start(tb);

    // No connect_oob call: the request is blocked at the channel.
    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    CHECK_FALSE(tb.implant->session_established());
    for (const auto& ev : tb.world->trace().events()) {
        CHECK(ev.msgType != "OobKeyTransfer");
        if (ev.msgType == "OobAccessRequest" && ev.action == TraceAction::Blocked) continue;
    }
}

TEST_CASE("OOB request arriving over RF is ignored: touch-to-access gate") {
    TestbedConfig cfg;
    cfg.seed = 2003;
    auto tb = make_testbed(cfg);

    tb.world->inject(entities::Envelope{entities::Channel::RF, tb.readerId, tb.implantId,
                                        wire::OobAccessRequest{tb.readerId}});
    tb.world->run_until_quiescent();

    for (const auto& ev : tb.world->trace().events()) CHECK(ev.msgType != "OobKeyTransfer");
    CHECK_FALSE(tb.implant->session_established());
}

TEST_CASE("offline caps privileges at the paramedic level") {
    TestbedConfig cfg;
    cfg.seed = 2004;
    cfg.role = UserRole::Technician;  // firmware rights online
    auto tb = make_testbed(cfg);
    run_duty_start(tb);
    tb.world->connect_oob(tb.readerId, tb.implantId);

    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.commands = {Command{CommandKind::FirmwareUpdate, 2}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    CHECK(tb.reader->outcome().failureReason == "rejected:privilege-violation");
    CHECK(tb.implant->firmware_version() == 1);
}

TEST_CASE("offline access requires an unexpired token") {
    TestbedConfig cfg;
    cfg.seed = 2005;
    cfg.role = UserRole::Paramedic;
    cfg.tokenLifetimeMs = 30000;
    auto tb = make_testbed(cfg);
    run_duty_start(tb);
    tb.world->connect_oob(tb.readerId, tb.implantId);
    tb.world->advance_time(30001);

    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();
    CHECK(tb.reader->outcome().failed());
    CHECK(tb.reader->outcome().failureReason == "token-expired");
}

TEST_CASE("no-NR deployment executes unsigned offline commands without records") {
    TestbedConfig cfg;
    cfg.seed = 2006;
    cfg.nrOfflineRequired = false;
    auto tb = make_testbed(cfg);
    tb.world->connect_oob(tb.readerId, tb.implantId);

    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.noCard = true;
    offline.unsignedCommands = true;
    offline.commands = {Command{CommandKind::WriteTherapy, 31}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().succeeded());
    CHECK(tb.implant->therapy_setting() == 31);
    CHECK(tb.implant->flash().size() == 0);
}

TEST_CASE("NR-required deployment rejects unsigned offline commands") {
    TestbedConfig cfg;
    cfg.seed = 2007;
    cfg.nrOfflineRequired = true;
    auto tb = make_testbed(cfg);
    tb.world->connect_oob(tb.readerId, tb.implantId);

    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.noCard = true;
    offline.unsignedCommands = true;
    offline.commands = {Command{CommandKind::WriteTherapy, 31}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    CHECK(tb.implant->therapy_setting() == 100);
    CHECK(tb.implant->flash().size() == 0);
}

TEST_CASE("bedside session: bulk chunked read-out lands at the server") {
    TestbedConfig cfg;
    cfg.seed = 2008;
    cfg.readStatusAnsBytes = 65536;  // bulk monitoring volume
    auto tb = make_testbed(cfg);

    RunPlan plan;
    plan.mode = RunPlan::Mode::Bedside;
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();

    REQUIRE(tb.reader->outcome().succeeded());
    const auto& logs = tb.server->retrieved_logs(tb.implantId);
    REQUIRE(logs.size() == 2);  // the bulk read plus the finish answer
    CHECK(logs[0].size() == 65536);
    CHECK(tb.server->bedside_finished(tb.readerId));
    CHECK(tb.implant->flash().size() == 0);  // server MACs, no signatures

    // Chunking: 65536 / 256 = 256 answer chunks for the first command.
    std::size_t chunks = 0;
    for (const auto& ev : tb.world->trace().events())
        if (ev.action == TraceAction::Send && ev.msgType == "CommandAnswer") ++chunks;
    CHECK(chunks == 256 + 1);
}

TEST_CASE("bedside path refuses write commands") {
    TestbedConfig cfg;
    cfg.seed = 2009;
    auto tb = make_testbed(cfg);
    tb.server->set_bedside_commands({Command{CommandKind::WriteTherapy, 9}});

    RunPlan plan;
    plan.mode = RunPlan::Mode::Bedside;
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    CHECK(tb.reader->outcome().failureReason == "rejected:privilege-violation");
    CHECK(tb.implant->therapy_setting() == 100);
}

TEST_CASE("bedside command without a valid server MAC is rejected") {
    TestbedConfig cfg;
    cfg.seed = 2010;
    auto tb = make_testbed(cfg);

    RunPlan plan;
    plan.mode = RunPlan::Mode::Bedside;
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();
    REQUIRE(tb.reader->outcome().succeeded());

    // Replay the recorded CommandToImplant with a corrupted MAC byte: the
    // AEAD binding covers the MAC, so the implant rejects it outright.
    Bytes cmdFrame;
    for (const auto& ev : tb.world->trace().events())
        if (ev.action == TraceAction::Send && ev.msgType == "CommandToImplant")
            cmdFrame = ev.frame;
    REQUIRE_FALSE(cmdFrame.empty());
    cmdFrame[cmdFrame.size() - 1] ^= 0x01;
    auto decoded = wire::decode_frame(BytesView(cmdFrame.data(), cmdFrame.size()));
    REQUIRE(decoded.ok());
    auto before = tb.implant->executed_commands();
    tb.world->inject(entities::Envelope{entities::Channel::RF, tb.readerId, tb.implantId,
                                        *decoded.message});
    tb.world->run_until_quiescent();
    CHECK(tb.implant->executed_commands() == before);
}

TEST_CASE("remote hospital establishment routes m_I through the home server") {
    TestbedConfig cfg;
    cfg.seed = 2011;
    cfg.withRemoteTopology = true;
    auto tb = make_testbed(cfg);

    RunPlan plan;
    plan.commands = {Command{CommandKind::WriteTherapy, 88}};
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();

    REQUIRE(tb.reader->outcome().succeeded());
    CHECK(tb.implant->therapy_setting() == 88);

    bool sawForward = false, sawReply = false;
    for (const auto& ev : tb.world->trace().events()) {
        if (ev.msgType == "RemoteKeyForward") sawForward = true;
        if (ev.msgType == "RemoteKeyReply") sawReply = true;
    }
    CHECK(sawForward);
    CHECK(sawReply);
}

TEST_CASE("implant unknown to the manufacturer fails cleanly") {
    TestbedConfig cfg;
    cfg.seed = 2012;
    cfg.withRemoteTopology = true;
    cfg.implantRegisteredAtManufacturer = false;
    auto tb = make_testbed(cfg);

    RunPlan plan;
    plan.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    CHECK(tb.reader->outcome().failureReason == "rejected:implant-unknown");
    CHECK_FALSE(tb.implant->session_established());
}

TEST_CASE("m_I minted under the wrong pre-shared key aborts at the implant") {
    // Misbinding: the manufacturer points the implant's home at the remote
    // server itself, which only has a decoy K_SI. The implant's AEAD check
    // rejects the resulting m_I.
    TestbedConfig cfg;
    cfg.seed = 2013;
    cfg.withRemoteTopology = true;
    auto tb = make_testbed(cfg);

    tb.manufacturer->register_implant_home(tb.implantId, tb.remoteServerId);
    SymmetricKey decoy;
    Rng rng(999);
    rng.fill(decoy.raw.data(), decoy.raw.size());
    tb.remoteServer->register_implant(tb.implantId, decoy);

    RunPlan plan;
    plan.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    bool sawAuthFail = false;
    for (const auto& ev : tb.world->trace().events())
        if (ev.msgType == "AuthFail") sawAuthFail = true;
    CHECK(sawAuthFail);
    CHECK_FALSE(tb.implant->session_established());
}

TEST_CASE("post-auth energy lands on the battery, pre-auth on the pool") {
    TestbedConfig cfg;
    cfg.seed = 2014;
    auto tb = make_testbed(cfg);
    RunPlan plan;
    plan.commands = {Command{CommandKind::WriteTherapy, 1}};
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();
    REQUIRE(tb.reader->outcome().succeeded());

    const auto& table = tb.world->cost_table();
    double eAuth = energy::auth_energy_uj(table, crypto::ImplClass::HardwareAccelerated);
    CHECK(tb.implant->ledger().harvested_spent_uj() == doctest::Approx(eAuth).epsilon(1e-9));
    CHECK(tb.implant->ledger().battery_spent_uj() > 0);

    bool established = false;
    for (const auto& e : tb.implant->ledger().spend_log()) {
        if (e.source == energy::EnergySource::Battery) established = true;
        // ZPD invariant: once battery spending starts, no harvested entry
        // precedes it out of order; pre-confirmation is all harvested.
        if (!established) CHECK(e.source == energy::EnergySource::Harvested);
    }
}

TEST_CASE("a disarmed OOB port never hands out keys") {
    TestbedConfig cfg;
    cfg.seed = 2015;
    cfg.oobArmed = false;
    auto tb = make_testbed(cfg);
    tb.world->connect_oob(tb.readerId, tb.implantId);  // touch alone is not enough

    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.noCard = true;
    offline.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();

    CHECK(tb.reader->outcome().failed());
    for (const auto& ev : tb.world->trace().events()) CHECK(ev.msgType != "OobKeyTransfer");
}

TEST_CASE("battery_dos_flood report: ZPD on vs off") {
    const auto table = energy::CostTable::calibrated();
    double eAuth = energy::auth_energy_uj(table, crypto::ImplClass::HardwareAccelerated);

    TestbedConfig on;
    on.seed = 2016;
    auto tbOn = make_testbed(on);
    auto repOn = battery_dos_flood(tbOn, 200);
    CHECK(repOn.batterySpentUj == 0.0);
    CHECK(repOn.harvestedSpentUj == doctest::Approx(200 * eAuth).epsilon(1e-9));

    TestbedConfig off = on;
    off.seed = 2017;
    off.zpdEnabled = false;
    auto tbOff = make_testbed(off);
    auto repOff = battery_dos_flood(tbOff, 200);
    CHECK(repOff.batterySpentUj == doctest::Approx(200 * eAuth).epsilon(1e-9));
    CHECK(repOff.harvestedSpentUj == 0.0);
}

TEST_CASE("bedside two-minute monitoring volume: 3 MB end to end") {
    TestbedConfig cfg;
    cfg.seed = 2018;
    cfg.readStatusAnsBytes = 3000000;
    cfg.eventBudget = 500000;
    auto tb = make_testbed(cfg);

    RunPlan plan;
    plan.mode = RunPlan::Mode::Bedside;
    tb.world->start_session(tb.readerId, plan);
    REQUIRE(tb.world->run_until_quiescent());
    REQUIRE(tb.reader->outcome().succeeded());

    const auto& logs = tb.server->retrieved_logs(tb.implantId);
    REQUIRE(logs.size() == 2);
    CHECK(logs[0].size() == 3000000);

    // Every chunk rode under the session key; the adversary saw only blobs.
    CHECK_FALSE(tb.world->adversary().knowledge().contains(
        BytesView(logs[0].data(), std::min<std::size_t>(logs[0].size(), 256))));
}

TEST_CASE("pairing reset after duty drops the tokens") {
    TestbedConfig cfg;
    cfg.seed = 2019;
    cfg.role = UserRole::Paramedic;
    auto tb = make_testbed(cfg);
    run_duty_start(tb);
    REQUIRE(tb.reader->has_token());

    tb.reader->reset_pairing();
    CHECK_FALSE(tb.reader->has_token());

    tb.world->connect_oob(tb.readerId, tb.implantId);
    RunPlan offline;
    offline.mode = RunPlan::Mode::Offline;
    offline.commands = {Command{CommandKind::ReadStatus, 0}};
    tb.world->start_session(tb.readerId, offline);
    tb.world->run_until_quiescent();
    CHECK(tb.reader->outcome().failed());
    CHECK(tb.reader->outcome().failureReason == "token-missing");
}
