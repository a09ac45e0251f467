#include "evfleet/fleet.hpp"

#include <string>

#include "evfleet/errors.hpp"

namespace evfleet {

const char* to_string(VehicleState s) {
    switch (s) {
        case VehicleState::driving_with_passenger: return "driving_with_passenger";
        case VehicleState::driving_without_passenger: return "driving_without_passenger";
        case VehicleState::charging: return "charging";
        case VehicleState::waiting_for_charger: return "waiting_for_charger";
        case VehicleState::driving_to_charger: return "driving_to_charger";
        case VehicleState::idle: return "idle";
    }
    return "?";
}

const char* to_string(TripState s) {
    switch (s) {
        case TripState::unavailable: return "unavailable";
        case TripState::waiting: return "waiting";
        case TripState::matched: return "matched";
        case TripState::reneged: return "reneged";
    }
    return "?";
}

bool legal_transition(VehicleState from, VehicleState to) {
    using V = VehicleState;
    switch (from) {
        case V::idle:
            return to == V::driving_without_passenger || to == V::driving_to_charger;
        case V::driving_without_passenger:
            return to == V::driving_with_passenger;
        case V::driving_with_passenger:
            return to == V::idle;
        case V::driving_to_charger:
            return to == V::waiting_for_charger || to == V::idle;
        case V::waiting_for_charger:
            return to == V::charging || to == V::idle;
        case V::charging:
            return to == V::idle;
    }
    return false;
}

void transition(Vehicle& v, VehicleState to) {
    if (!legal_transition(v.state, to)) {
        throw ConsistencyError(std::string("illegal vehicle transition ") + to_string(v.state) +
                               " -> " + to_string(to) + " (vehicle " + std::to_string(v.id) + ")");
    }
    v.state = to;
}

void station_set_busy_or_available(ChargingStation& s) {
    s.state = s.occupancy >= s.posts ? StationState::busy : StationState::available;
}

} // namespace evfleet
