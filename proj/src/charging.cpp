#include "evfleet/charging.hpp"

#include <cmath>
#include <string>

#include "evfleet/errors.hpp"

namespace evfleet::charging {

ThresholdSchedule ThresholdSchedule::always() {
    return ThresholdSchedule{{{0.0, 0.95}}};
}

ThresholdSchedule ThresholdSchedule::night() {
    // daytime 6 am - 11 pm at 0.4, nighttime at 0.95
    return ThresholdSchedule{{{0.0, 0.95}, {360.0, 0.4}, {1380.0, 0.95}}};
}

ThresholdSchedule ThresholdSchedule::custom(std::vector<std::pair<double, double>> table) {
    if (table.empty() || table.front().first != 0.0) {
        throw ConfigError("threshold schedule must start at minute 0 of the day");
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].first < 0.0 || table[i].first >= 1440.0) {
            throw ConfigError("threshold schedule entries must start within [0, 1440)");
        }
        if (i > 0 && table[i].first <= table[i - 1].first) {
            throw ConfigError("threshold schedule entries must be strictly increasing");
        }
        if (table[i].second < 0.0 || table[i].second > 1.0) {
            throw ConfigError("threshold values must lie in [0, 1]");
        }
    }
    return ThresholdSchedule{std::move(table)};
}

double threshold_at(double time_min, const ThresholdSchedule& schedule, double day_origin_minute) {
    double tod = std::fmod(day_origin_minute + time_min, 1440.0);
    if (tod < 0.0) tod += 1440.0;
    double value = schedule.table.front().second;
    for (const auto& [start, c] : schedule.table) {
        if (start <= tod) value = c;
    }
    return value;
}

std::vector<VehicleId> select_vehicles_for_charging(std::span<const Vehicle> fleet, double now,
                                                    const ThresholdSchedule& schedule,
                                                    double day_origin_minute) {
    const double c = threshold_at(now, schedule, day_origin_minute);
    std::vector<VehicleId> out;
    for (const Vehicle& v : fleet) {
        if (v.state == VehicleState::idle && v.soc <= c) out.push_back(v.id);
    }
    return out;
}

bool charger_available(int posts, int occupancy, int inbound, const AvailabilityRule& rule) {
    return static_cast<double>(posts - occupancy) > rule.alpha * static_cast<double>(inbound);
}

bool charger_available(const ChargingStation& s, const AvailabilityRule& rule) {
    return charger_available(s.posts, s.occupancy, s.inbound_count, rule);
}

} // namespace evfleet::charging
