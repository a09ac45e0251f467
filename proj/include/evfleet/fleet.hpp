#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "evfleet/geo.hpp"
#include "evfleet/sim_kernel.hpp"

namespace evfleet {

using VehicleId = std::int32_t;
using StationId = std::int32_t;
using TripId = std::int64_t;

enum class VehicleState : std::uint8_t {
    driving_with_passenger,
    driving_without_passenger, // en route to the pickup point
    charging,
    waiting_for_charger,
    driving_to_charger,
    idle,
};
inline constexpr std::size_t kVehicleStateCount = 6;

const char* to_string(VehicleState s);

/// True when (from -> to) is an edge of the vehicle state machine.
bool legal_transition(VehicleState from, VehicleState to);

/// Applies a state change, aborting on an illegal edge.
void transition(struct Vehicle& v, VehicleState to);

enum class TripState : std::uint8_t { unavailable, waiting, matched, reneged };
const char* to_string(TripState s);

enum class StationState : std::uint8_t { available, busy };

/// One in-flight timed leg: where it started, where it ends, and what it costs.
/// Location and SoC commit only when the leg completes or is interrupted.
struct ActivityLeg {
    geo::GeoPoint from;
    geo::GeoPoint to;
    double start_min = 0.0;
    double duration_min = 0.0;
    double distance_mi = 0.0;
    double dsoc = 0.0;
};

struct Vehicle {
    VehicleId id = 0;
    geo::GeoPoint location;
    double soc = 1.0;
    VehicleState state = VehicleState::idle;

    std::optional<sim::ProcessId> active_process;
    std::optional<ActivityLeg> leg;        // present while on a timed drive
    std::optional<double> charging_since;  // present while state == charging
    std::optional<StationId> station;      // present anywhere in the charge pipeline
    double charge_target = 1.0;
};

struct ChargeQueueEntry {
    VehicleId vehicle;
    double end_soc;
};

struct ChargingStation {
    StationId id = 0;
    geo::GeoPoint location;
    int posts = 4;
    int occupancy = 0;
    int inbound_count = 0; // vehicles currently driving toward this station
    StationState state = StationState::available;
    std::deque<ChargeQueueEntry> queue;
};

/// Recomputes the busy flag: busy iff occupancy >= posts.
void station_set_busy_or_available(ChargingStation& s);

struct TripRequest {
    TripId id = 0;
    geo::GeoPoint origin;
    geo::GeoPoint destination;
    double arrival_time = 0.0;
    double trip_distance = 0.0; // miles, authoritative for time and energy
    TripState state = TripState::waiting;
    std::optional<VehicleId> matched_vehicle;
    std::optional<double> pickup_time;
    std::optional<double> completion_time;
};

} // namespace evfleet
