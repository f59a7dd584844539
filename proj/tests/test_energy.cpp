#include <cmath>

#include "doctest.h"
#include "imdsec/energy/cost.hpp"
#include "imdsec/energy/ledger.hpp"
#include "imdsec/energy/model.hpp"

using namespace imdsec;
using namespace imdsec::energy;
using crypto::ImplClass;

namespace {

bool within_pct(double value, double target, double pct) {
    return std::abs(value - target) <= std::abs(target) * pct / 100.0;
}

}  // namespace

TEST_CASE("calibrated table reproduces the published session figures") {
    auto t = CostTable::calibrated();

    CHECK(within_pct(session_energy_uj_nosec(t, nosec_session_steps(t.budget)), 16.61, 1.0));
    CHECK(within_pct(session_energy_uj(t, ImplClass::HardwareAccelerated,
                                       basic_session_steps(t.budget)),
                     108.31, 1.0));
    CHECK(within_pct(session_energy_uj(t, ImplClass::SoftwareAes, basic_session_steps(t.budget)),
                     217.89, 1.0));

    CHECK(within_pct(session_delay_ms_nosec(t, nosec_session_steps(t.budget)), 2.17, 1.0));
    CHECK(within_pct(protocol_delay_ms(t, ImplClass::HardwareAccelerated), 15.73, 1.0));
    CHECK(within_pct(protocol_delay_ms(t, ImplClass::SoftwareAes), 58.99, 1.0));
}

TEST_CASE("authentication energy matches to the microjoule") {
    auto t = CostTable::calibrated();
    CHECK(auth_energy_uj(t, ImplClass::HardwareAccelerated) == doctest::Approx(59.6).epsilon(1e-9));
    CHECK(auth_energy_uj(t, ImplClass::SoftwareAes) == doctest::Approx(119.4).epsilon(1e-9));
    CHECK(session_energy_uj(t, ImplClass::HardwareAccelerated, {}) == 0.0);
}

TEST_CASE("failed establishment costs exactly one authentication window") {
    auto t = CostTable::calibrated();
    for (auto c : {ImplClass::HardwareAccelerated, ImplClass::SoftwareAes}) {
        CHECK(session_energy_uj(t, c, failed_auth_steps(t.budget)) ==
              doctest::Approx(auth_energy_uj(t, c)).epsilon(1e-12));
    }
}

TEST_CASE("daily cycle matches Table-4 and the overhead percentages") {
    auto t = CostTable::calibrated();
    auto p = UsageProfile::daily();

    double dNone = daily_energy_j_nosec(t, p);
    double dHw = daily_energy_j(t, ImplClass::HardwareAccelerated, p);
    double dSw = daily_energy_j(t, ImplClass::SoftwareAes, p);

    CHECK(within_pct(dNone, 16.60, 1.0));
    CHECK(within_pct(dHw, 17.69, 1.0));
    CHECK(within_pct(dSw, 19.89, 1.0));

    double hwIncrease = (dHw - dNone) / dNone * 100.0;
    double swIncrease = (dSw - dNone) / dNone * 100.0;
    CHECK(std::abs(hwIncrease - 6.57) <= 0.1);
    CHECK(std::abs(swIncrease - 19.82) <= 0.1);
    CHECK(hwIncrease < 7.0);  // the headline claim
}

TEST_CASE("hardware-class per-step delay stays under 6 ms") {
    auto t = CostTable::calibrated();
    for (const auto& step : basic_session_steps(t.budget)) {
        double ms = session_delay_ms(t, ImplClass::HardwareAccelerated, {step});
        CHECK(ms <= 6.0);
    }
}

TEST_CASE("session energy is additive over concatenated specs") {
    auto t = CostTable::calibrated();
    auto a = auth_steps(t.budget);
    auto b = basic_session_steps(t.budget);
    std::vector<StepCharge> both = a;
    both.insert(both.end(), b.begin(), b.end());
    for (auto c : {ImplClass::HardwareAccelerated, ImplClass::SoftwareAes,
                   ImplClass::SoftwareSpeck, ImplClass::SoftwareMisty1}) {
        CHECK(session_energy_uj(t, c, both) ==
              doctest::Approx(session_energy_uj(t, c, a) + session_energy_uj(t, c, b))
                  .epsilon(1e-12));
    }
}

TEST_CASE("lifetime ordering and linearity") {
    auto t = CostTable::calibrated();
    auto p = UsageProfile::daily();
    for (double capacity : p.batteryCapacitiesJ) {
        double lNone = lifetime_days_nosec(t, p, capacity);
        double lHw = lifetime_days(t, ImplClass::HardwareAccelerated, p, capacity);
        double lSpeck = lifetime_days(t, ImplClass::SoftwareSpeck, p, capacity);
        double lMisty = lifetime_days(t, ImplClass::SoftwareMisty1, p, capacity);
        double lSw = lifetime_days(t, ImplClass::SoftwareAes, p, capacity);
        CHECK(lNone >= lHw);
        CHECK(lHw > lSpeck);
        CHECK(lSpeck > lMisty);
        CHECK(lMisty > lSw);
        // Hardware-class lifetime penalty under 7% for the daily profile.
        CHECK((lNone - lHw) / lNone <= 0.07);
        // Doubling capacity doubles lifetime.
        CHECK(lifetime_days(t, ImplClass::HardwareAccelerated, p, 2 * capacity) ==
              doctest::Approx(2 * lHw).epsilon(1e-12));
    }
}

TEST_CASE("weekly profile shrinks the security overhead") {
    auto t = CostTable::calibrated();
    auto daily = UsageProfile::daily();
    auto weekly = UsageProfile::weekly();
    double dailyOverhead = daily_energy_j(t, ImplClass::SoftwareAes, daily) -
                           daily_energy_j_nosec(t, daily);
    double weeklyOverhead = daily_energy_j(t, ImplClass::SoftwareAes, weekly) -
                            daily_energy_j_nosec(t, weekly);
    CHECK(weeklyOverhead < dailyOverhead);
    CHECK(weeklyOverhead == doctest::Approx(dailyOverhead / 7).epsilon(1e-9));
}

TEST_CASE("cost table JSON round-trips") {
    auto t = CostTable::calibrated();
    auto text = t.to_json();
    auto back = CostTable::from_json(text);
    CHECK(back.rxUjPerBit == t.rxUjPerBit);
    CHECK(back.hw.stepUj == t.hw.stepUj);
    CHECK(back.swAes.blockUj == t.swAes.blockUj);
    CHECK(back.swSpeck.bulkUjPerByte == t.swSpeck.bulkUjPerByte);
    CHECK(back.medicalBaselineJPerDay == t.medicalBaselineJPerDay);
    CHECK(auth_energy_uj(back, ImplClass::HardwareAccelerated) ==
          doctest::Approx(59.6).epsilon(1e-9));
}

TEST_CASE("ledger: ZPD directs pre-auth spend to the harvested pool") {
    EnergyLedger zpd(100, true);
    zpd.begin_harvest_window(50);
    CHECK(zpd.charge(StepKind::SkRecvInit, 20, true));
    CHECK(zpd.charge(StepKind::SkSendHello, 30, true));
    CHECK(zpd.battery_spent_uj() == 0.0);
    CHECK(zpd.harvested_spent_uj() == 50.0);
    // Pool exhausted: pre-auth work defers rather than draining the battery.
    CHECK_FALSE(zpd.charge(StepKind::SkRecvKeys, 1, true));
    CHECK(zpd.harvested_pool_uj() >= 0.0);
    CHECK(zpd.charge(StepKind::CmdRecv, 5, false));
    CHECK(zpd.battery_spent_uj() == 5.0);

    EnergyLedger noZpd(100, false);
    noZpd.begin_harvest_window(50);
    CHECK(noZpd.charge(StepKind::SkRecvInit, 20, true));
    CHECK(noZpd.battery_spent_uj() == 20.0);
    for (const auto& e : noZpd.spend_log()) CHECK(e.source == EnergySource::Battery);
}

#include "imdsec/netsim/scenario.hpp"

TEST_CASE("cost-model frame sizes match real protocol traffic") {
    // The budget numbers feed the calibration; if the codec drifts, this
    // cross-check against a live trace catches it.
    netsim::TestbedConfig cfg;
    cfg.seed = 4242;
    auto tb = netsim::make_testbed(cfg);
    entities::RunPlan plan;
    plan.commands = {Command{CommandKind::WriteTherapy, 7}};
    plan.sendFinish = false;
    tb.world->start_session(tb.readerId, plan);
    tb.world->run_until_quiescent();
    REQUIRE(tb.reader->outcome().succeeded());

    auto bits_of = [&](const char* type) -> double {
        for (const auto& ev : tb.world->trace().events())
            if (ev.action == netsim::TraceAction::Send && ev.msgType == type)
                return static_cast<double>(ev.frame.size()) * 8.0;
        return -1;
    };

    const auto& b = tb.world->cost_table().budget;
    CHECK(bits_of("SessionInit") == b.sessionInitBits);
    CHECK(bits_of("SessionHello") == b.sessionInitBits);
    CHECK(bits_of("KeyConfirm") == b.keyConfirmBits);
    CHECK(bits_of("KeyConfirmReply") == b.keyConfirmReplyBits);
    CHECK(bits_of("CommandToImplant") == b.commandBits);
    CHECK(bits_of("CommandAnswer") == b.answerBits);
}
