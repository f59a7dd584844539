#pragma once

#include <vector>

#include "imdsec/energy/cost.hpp"

namespace imdsec::energy {

/// Usage pattern feeding the daily-energy and lifetime estimates.
struct UsageProfile {
    double sessionsPerDay = 1.0;  // 1 = daily monitoring, 1/7 = weekly
    double ansVolumeBytes = PublishedFigures::kDailyAnsBytes;
    double heartbeatUj = PublishedFigures::kHeartbeatUj;
    double heartRateBpm = 60.0;
    double medicalDutyCyclePct = 5.0;  // informational; folded into the baseline
    std::vector<double> batteryCapacitiesJ = {15000, 30000, 45000, 60000};

    static UsageProfile daily() { return UsageProfile{}; }
    static UsageProfile weekly() {
        UsageProfile p;
        p.sessionsPerDay = 1.0 / 7.0;
        return p;
    }
};

/// Energy of one monitoring session carrying `ansBytes` of answer payload.
double bulk_session_energy_uj(const CostTable& t, ImplClass c, double ansBytes);
double bulk_session_energy_uj_nosec(const CostTable& t, double ansBytes);

/// Stimulation + medical baseline + the day's share of monitoring sessions.
double daily_energy_j(const CostTable& t, ImplClass c, const UsageProfile& p);
double daily_energy_j_nosec(const CostTable& t, const UsageProfile& p);

/// capacity / daily consumption, in days.
double lifetime_days(const CostTable& t, ImplClass c, const UsageProfile& p, double capacityJ);
double lifetime_days_nosec(const CostTable& t, const UsageProfile& p, double capacityJ);

}  // namespace imdsec::energy
