#include "imdsec/energy/model.hpp"

namespace imdsec::energy {

namespace {

double stimulation_j(const UsageProfile& p) {
    return p.heartbeatUj * p.heartRateBpm * 1440.0 * 1e-6;
}

}  // namespace

double bulk_session_energy_uj(const CostTable& t, ImplClass c, double ansBytes) {
    auto steps = basic_session_steps(t.budget);
    if (ansBytes > kAnswerBytes) {
        StepCharge bulk;
        bulk.kind = StepKind::AnsBulk;
        bulk.bulkBytes = ansBytes - kAnswerBytes;
        steps.push_back(bulk);
    }
    double uj = session_energy_uj(t, c, steps);
    if (ansBytes > kAnswerBytes) uj -= t.row(c).stepUj;  // volume charge, not a protocol step
    return uj;
}

double bulk_session_energy_uj_nosec(const CostTable& t, double ansBytes) {
    auto steps = nosec_session_steps(t.budget);
    if (ansBytes > kAnswerBytes) {
        StepCharge bulk;
        bulk.kind = StepKind::AnsBulk;
        bulk.bulkBytes = ansBytes - kAnswerBytes;
        steps.push_back(bulk);
    }
    return session_energy_uj_nosec(t, steps);
}

double daily_energy_j(const CostTable& t, ImplClass c, const UsageProfile& p) {
    return stimulation_j(p) + t.medicalBaselineJPerDay +
           p.sessionsPerDay * bulk_session_energy_uj(t, c, p.ansVolumeBytes) * 1e-6;
}

double daily_energy_j_nosec(const CostTable& t, const UsageProfile& p) {
    return stimulation_j(p) + t.medicalBaselineJPerDay +
           p.sessionsPerDay * bulk_session_energy_uj_nosec(t, p.ansVolumeBytes) * 1e-6;
}

double lifetime_days(const CostTable& t, ImplClass c, const UsageProfile& p, double capacityJ) {
    return capacityJ / daily_energy_j(t, c, p);
}

double lifetime_days_nosec(const CostTable& t, const UsageProfile& p, double capacityJ) {
    return capacityJ / daily_energy_j_nosec(t, p);
}

}  // namespace imdsec::energy
