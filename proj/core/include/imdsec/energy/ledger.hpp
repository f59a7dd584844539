#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imdsec/energy/cost.hpp"

namespace imdsec::energy {

enum class EnergySource : std::uint8_t { Battery, Harvested };

struct SpendEntry {
    StepKind step;
    EnergySource source;
    double uj;
};

/// Battery vs harvested-RF accounting for one implant.
///
/// With the zero-power defense enabled, every charge before session
/// confirmation draws from the harvested pool; the battery is touched only
/// after the peer has authenticated. A harvest window worth one
/// authentication attempt is credited when an attempt begins, so a flood
/// of bogus attempts leaves the battery untouched.
class EnergyLedger {
public:
    EnergyLedger() = default;
    EnergyLedger(double batteryJ, bool zpdEnabled)
        : batteryRemainingUj_(batteryJ * 1e6), zpd_(zpdEnabled) {}

    void begin_harvest_window(double uj) {
        if (zpd_) harvestedPoolUj_ += uj;
    }

    /// True if the charge was funded; false when the harvested pool cannot
    /// cover a pre-authentication charge (the operation must defer).
    bool charge(StepKind step, double uj, bool preAuth) {
        if (zpd_ && preAuth) {
            if (harvestedPoolUj_ + 1e-9 < uj) return false;
            harvestedPoolUj_ -= uj;
            if (harvestedPoolUj_ < 0) harvestedPoolUj_ = 0;
            log_.push_back({step, EnergySource::Harvested, uj});
            return true;
        }
        batteryRemainingUj_ -= uj;
        log_.push_back({step, EnergySource::Battery, uj});
        return true;
    }

    double battery_remaining_uj() const { return batteryRemainingUj_; }
    double harvested_pool_uj() const { return harvestedPoolUj_; }
    bool zpd_enabled() const { return zpd_; }

    double battery_spent_uj() const {
        double s = 0;
        for (const auto& e : log_)
            if (e.source == EnergySource::Battery) s += e.uj;
        return s;
    }
    double harvested_spent_uj() const {
        double s = 0;
        for (const auto& e : log_)
            if (e.source == EnergySource::Harvested) s += e.uj;
        return s;
    }

    const std::vector<SpendEntry>& spend_log() const { return log_; }

private:
    double batteryRemainingUj_ = 60000.0 * 1e6;
    double harvestedPoolUj_ = 0;
    bool zpd_ = true;
    std::vector<SpendEntry> log_;
};

}  // namespace imdsec::energy
