#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "evfleet/fleet.hpp"

namespace evfleet::charging {

/// Piecewise-constant map from minute-of-day in [0, 1440) to the send-to-charge
/// threshold C(t). Entries are (start_minute, value) sorted ascending; the
/// first entry must start at 0 so the day is fully covered.
struct ThresholdSchedule {
    std::vector<std::pair<double, double>> table;

    static ThresholdSchedule always(); // C = 0.95 everywhere
    static ThresholdSchedule night();  // C = 0.4 on [360, 1380), 0.95 otherwise
    static ThresholdSchedule custom(std::vector<std::pair<double, double>> table);
};

/// C at simulated minute `time`, where minute 0 of the scenario falls at
/// wall-clock minute `day_origin_minute` of the day.
double threshold_at(double time_min, const ThresholdSchedule& schedule, double day_origin_minute);

/// Exactly the idle vehicles with soc <= C(now), in ascending id order.
std::vector<VehicleId> select_vehicles_for_charging(std::span<const Vehicle> fleet, double now,
                                                    const ThresholdSchedule& schedule,
                                                    double day_origin_minute);

/// A station is available for new assignments iff its free posts strictly
/// exceed alpha times the vehicles already driving toward it.
struct AvailabilityRule {
    double alpha = 0.0;
};

bool charger_available(int posts, int occupancy, int inbound, const AvailabilityRule& rule);
bool charger_available(const ChargingStation& s, const AvailabilityRule& rule);

struct AssignmentRule {
    enum class Kind : std::uint8_t { closest_available, power_of_d } kind = Kind::closest_available;
    int d = 1; // stations examined per vehicle under power_of_d
};

struct StationSnapshot {
    StationId id;
    int posts;
    int occupancy;
    int inbound;
};

/// Pairs vehicles with stations. Vehicles are processed in the order given
/// (the caller passes them by ascending id); each pairing immediately counts
/// against the paired station's inbound tally, so later pairings in the same
/// sweep see it. `distances_for(v)` returns a span of per-station distances
/// for vehicle v, indexed like `stations`.
///
/// closest_available: nearest available station (ties: lower station index).
/// power_of_d: nearest available among the vehicle's d nearest stations, or
/// skip the vehicle when all d are unavailable.
template <typename DistFn>
std::vector<std::pair<VehicleId, StationId>> assign_chargers(
    std::span<const VehicleId> vehicles, std::span<const StationSnapshot> stations,
    const AssignmentRule& assignment, const AvailabilityRule& availability, DistFn&& distances_for) {
    std::vector<std::pair<VehicleId, StationId>> pairs;
    if (vehicles.empty() || stations.empty()) return pairs;

    std::vector<int> inbound(stations.size());
    int available_count = 0;
    for (std::size_t s = 0; s < stations.size(); ++s) {
        inbound[s] = stations[s].inbound;
        if (charger_available(stations[s].posts, stations[s].occupancy, inbound[s], availability)) {
            ++available_count;
        }
    }

    std::vector<std::size_t> order(stations.size());
    for (const VehicleId v : vehicles) {
        if (available_count == 0) break;
        std::span<const double> dist = distances_for(v);

        std::size_t chosen = stations.size();
        if (assignment.kind == AssignmentRule::Kind::closest_available) {
            double best = 0.0;
            for (std::size_t s = 0; s < stations.size(); ++s) {
                if (!charger_available(stations[s].posts, stations[s].occupancy, inbound[s],
                                       availability)) {
                    continue;
                }
                if (chosen == stations.size() || dist[s] < best) {
                    chosen = s;
                    best = dist[s];
                }
            }
        } else {
            const std::size_t k = std::min<std::size_t>(assignment.d, stations.size());
            for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
            std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 if (dist[a] != dist[b]) return dist[a] < dist[b];
                                 return a < b;
                             });
            double best = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t s = order[i];
                if (!charger_available(stations[s].posts, stations[s].occupancy, inbound[s],
                                       availability)) {
                    continue;
                }
                if (chosen == stations.size() || dist[s] < best ||
                    (dist[s] == best && s < chosen)) {
                    chosen = s;
                    best = dist[s];
                }
            }
        }

        if (chosen < stations.size()) {
            pairs.emplace_back(v, stations[chosen].id);
            ++inbound[chosen];
            if (!charger_available(stations[chosen].posts, stations[chosen].occupancy,
                                   inbound[chosen], availability)) {
                --available_count;
            }
        }
    }
    return pairs;
}

} // namespace evfleet::charging
