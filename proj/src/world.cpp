#include "evfleet/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evfleet/errors.hpp"

namespace evfleet {

using metrics::EventKind;

namespace {
constexpr double kSocSlack = 1e-9; // tolerated FP error on SoC floors
}

World::World(const ScenarioConfig& cfg, ingest::TripTable table,
             std::vector<geo::GeoPoint> vehicle_locations,
             std::vector<geo::GeoPoint> charger_locations, Rng rng)
    : cfg_(cfg),
      model_{cfg.distance.mode, cfg.distance.correction_factor},
      schedule_(schedule_from_config(cfg.charging)),
      day_origin_(cfg.day_origin_minute.value_or(0.0)),
      rng_(rng) {
    if (vehicle_locations.size() != static_cast<std::size_t>(cfg.fleet_size)) {
        throw ConfigError("vehicle placement size does not match fleet size");
    }
    if (charger_locations.size() != static_cast<std::size_t>(cfg.charger_count)) {
        throw ConfigError("charger placement size does not match charger count");
    }

    fleet_.resize(cfg.fleet_size);
    fleet_trig_.resize(fleet_.size());
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
        Vehicle& v = fleet_[i];
        v.id = static_cast<VehicleId>(i);
        v.location = vehicle_locations[i];
        v.soc = cfg.initial_soc;
        v.state = VehicleState::idle;
        fleet_trig_.set(i, v.location);
        log_event(EventKind::vehicle_init, -1, v.id, -1, v.soc, v.location.lat, v.location.lon);
    }

    stations_.resize(cfg.charger_count);
    station_trig_.resize(stations_.size());
    for (std::size_t i = 0; i < stations_.size(); ++i) {
        ChargingStation& s = stations_[i];
        s.id = static_cast<StationId>(i);
        s.location = charger_locations[i];
        s.posts = cfg.posts_per_charger;
        station_trig_.set(i, s.location);
    }

    // Drop arrivals past the horizon; everything scheduled can then drain.
    while (!table.rows.empty() && table.rows.back().arrival_time > cfg.horizon_minutes) {
        table.rows.pop_back();
    }
    trips_ = ingest::arrival_stream(table);

    if (cfg.matching.adaptive.enabled) {
        adaptive_ = std::make_unique<dispatch::AdaptiveDController>(
            cfg.matching.adaptive.initial_d, cfg.matching.adaptive.period,
            cfg.matching.adaptive.threshold, cfg.matching.adaptive.high_soc);
    }
    rank_scratch_.resize(fleet_.size());
    station_dist_scratch_.resize(stations_.size());
}

int World::adaptive_d() const { return adaptive_ ? adaptive_->d() : 0; }

sim::KernelStats World::run() {
    if (invariant_checks_) {
        engine_.set_post_event_hook([this] { check_invariants(); });
    }
    if (!trips_.empty()) {
        const double first = trips_[0].arrival_time;
        engine_.schedule_timeout(first, [this] { handle_arrival(0); });
    }
    return engine_.run_until(std::numeric_limits<double>::infinity());
}

void World::log_event(EventKind kind, TripId trip, VehicleId vehicle, StationId station, double v1,
                      double v2, double v3) {
    log_.append(metrics::Event{engine_.now(), kind, trip, vehicle, station, v1, v2, v3});
}

void World::set_state(Vehicle& v, VehicleState to) {
    const VehicleState from = v.state;
    transition(v, to);
    log_event(EventKind::state_change, -1, v.id, -1, static_cast<double>(from),
              static_cast<double>(to), v.soc);
}

void World::commit_location(Vehicle& v, const geo::GeoPoint& p) {
    v.location = p;
    fleet_trig_.set(static_cast<std::size_t>(v.id), p);
}

void World::commit_soc(Vehicle& v, double soc) {
    if (soc < -kSocSlack || soc > 1.0 + kSocSlack) {
        throw ConsistencyError("vehicle " + std::to_string(v.id) + " SoC out of range: " +
                               std::to_string(soc) + " at t=" + std::to_string(engine_.now()));
    }
    v.soc = std::clamp(soc, 0.0, 1.0);
}

double World::effective_soc(const Vehicle& v) const {
    if (v.state == VehicleState::charging && v.charging_since) {
        const double gained = geo::soc_gain(engine_.now() - *v.charging_since, cfg_.energy);
        return std::min(v.charge_target, v.soc + gained);
    }
    if (v.state == VehicleState::driving_to_charger && v.leg) {
        const double f = v.leg->duration_min > 0.0
                             ? (engine_.now() - v.leg->start_min) / v.leg->duration_min
                             : 0.0;
        return v.soc - f * v.leg->dsoc;
    }
    return v.soc;
}

geo::GeoPoint World::effective_location(const Vehicle& v) const {
    if (v.state == VehicleState::driving_to_charger && v.leg) {
        const double f = v.leg->duration_min > 0.0
                             ? (engine_.now() - v.leg->start_min) / v.leg->duration_min
                             : 0.0;
        return geo::lerp(v.leg->from, v.leg->to, f);
    }
    return v.location;
}

double World::pickup_distance(const Vehicle& v, const geo::GeoPoint& origin) const {
    return geo::corrected_distance(effective_location(v), origin, model_);
}

// ---------------------------------------------------------------------------
// Arrival handling
// ---------------------------------------------------------------------------

void World::handle_arrival(std::size_t index) {
    // chain the next arrival before any state changes
    if (index + 1 < trips_.size()) {
        const double gap = trips_[index + 1].arrival_time - engine_.now();
        engine_.schedule_timeout(gap, [this, index] { handle_arrival(index + 1); });
    }

    TripRequest& trip = trips_[index];
    ++arrivals_handled_;
    log_event(EventKind::trip_arrival, trip.id, -1, -1, trip.trip_distance);

    if (adaptive_) {
        int idle_high = 0;
        for (const Vehicle& v : fleet_) {
            if (v.state == VehicleState::idle && v.soc >= adaptive_->high_soc_level()) ++idle_high;
        }
        adaptive_->observe_arrival(idle_high);
    }

    const dispatch::Outcome outcome = match(trip);
    if (outcome.vehicle) {
        Vehicle& v = fleet_[static_cast<std::size_t>(*outcome.vehicle)];
        if (v.state != VehicleState::idle) {
            interrupt_charging(v.id);
        }
        const double dist = pickup_distance(v, trip.origin);
        log_event(EventKind::trip_matched, trip.id, v.id, -1, dist,
                  static_cast<double>(outcome.considered));
        start_trip(v.id, trip.id, dist);
    } else {
        trip.state = candidates_.empty() ? TripState::unavailable : TripState::reneged;
        log_event(EventKind::trip_dropped, trip.id, -1, -1,
                  trip.state == TripState::unavailable ? 0.0 : 1.0);
        if (adaptive_) adaptive_->observe_drop();
    }

    charging_sweep();

    if (adaptive_ && adaptive_->at_review_boundary()) {
        const int new_d = adaptive_->review(cfg_.fleet_size);
        log_event(EventKind::adaptive_d, -1, -1, -1, static_cast<double>(new_d));
    }
}

dispatch::Outcome World::match(const TripRequest& trip) {
    build_candidates(trip);
    const dispatch::FeasibilityRule rule{cfg_.matching.min_end_soc};
    switch (cfg_.matching.kind) {
        case MatchingConfig::Kind::closest_available:
            return dispatch::closest_available_dispatch(trip, candidates_, rule, cfg_.energy);
        case MatchingConfig::Kind::closest:
            return dispatch::power_of_d_dispatch(trip, candidates_, 1.0, rule, cfg_.energy, rng_);
        case MatchingConfig::Kind::power_of_d: {
            const double d = adaptive_ ? static_cast<double>(adaptive_->d()) : cfg_.matching.d;
            return dispatch::power_of_d_dispatch(trip, candidates_, d, rule, cfg_.energy, rng_);
        }
    }
    return {};
}

void World::build_candidates(const TripRequest& trip) {
    // With interrupts disabled a non-idle vehicle could never be released to
    // serve the trip, so the filter degrades to idle-only.
    dispatch::AvailabilityFilter filter = cfg_.matching.filter;
    if (!cfg_.charging.interrupt) {
        filter.kind = dispatch::FilterKind::only_idle;
    }
    const std::vector<VehicleId> ids =
        dispatch::available_vehicles(fleet_, filter, engine_.now());

    const geo::PointTrig origin = geo::make_point_trig(trip.origin);
    geo::batch_rank(model_, origin, fleet_trig_, rank_scratch_.data(), fleet_.size());

    candidates_.clear();
    candidates_.reserve(ids.size());
    for (const VehicleId id : ids) {
        const Vehicle& v = fleet_[static_cast<std::size_t>(id)];
        double miles;
        if (v.state == VehicleState::driving_to_charger) {
            // committed location is stale mid-leg; measure from the point the
            // interrupt would release it at
            miles = pickup_distance(v, trip.origin);
        } else {
            miles = geo::rank_to_miles(model_, rank_scratch_[static_cast<std::size_t>(id)]);
        }
        candidates_.push_back(dispatch::Candidate{id, miles, effective_soc(v)});
    }
}

void World::charging_sweep() {
    const std::vector<VehicleId> selected =
        charging::select_vehicles_for_charging(fleet_, engine_.now(), schedule_, day_origin_);
    if (selected.empty()) return;

    std::vector<charging::StationSnapshot> snapshots;
    snapshots.reserve(stations_.size());
    for (const ChargingStation& s : stations_) {
        snapshots.push_back({s.id, s.posts, s.occupancy, s.inbound_count});
    }
    const charging::AvailabilityRule availability{cfg_.charging.alpha};

    VehicleId scratch_for = -1;
    auto distances_for = [&](VehicleId v) -> std::span<const double> {
        if (v != scratch_for) {
            const geo::PointTrig from =
                geo::make_point_trig(fleet_[static_cast<std::size_t>(v)].location);
            geo::batch_rank(model_, from, station_trig_, station_dist_scratch_.data(),
                            stations_.size());
            for (double& r : station_dist_scratch_) r = geo::rank_to_miles(model_, r);
            scratch_for = v;
        }
        return station_dist_scratch_;
    };

    const auto pairs = charging::assign_chargers(selected, snapshots, cfg_.charging.assignment,
                                                 availability, distances_for);
    for (const auto& [vehicle, station] : pairs) {
        send_to_charger(vehicle, station, 1.0);
    }
}

// ---------------------------------------------------------------------------
// Trip service
// ---------------------------------------------------------------------------

void World::start_trip(VehicleId vid, TripId tid, double pickup_dist) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    TripRequest& trip = trips_[static_cast<std::size_t>(tid)];

    trip.state = TripState::matched;
    trip.matched_vehicle = vid;

    const double duration = geo::travel_time_minutes(pickup_dist, cfg_.velocity_mph);
    v.leg = ActivityLeg{v.location,          trip.origin, engine_.now(),
                        duration,            pickup_dist, geo::soc_drop(pickup_dist, cfg_.energy)};
    set_state(v, VehicleState::driving_without_passenger);
    log_event(EventKind::leg_pickup_start, tid, vid, -1, pickup_dist, duration, v.leg->dsoc);
    v.active_process = engine_.schedule_timeout(
        duration, [this, vid, tid] { on_pickup_arrived(vid, tid); },
        [this, vid] {
            throw ConsistencyError("trip leg of vehicle " + std::to_string(vid) + " interrupted");
        });
}

void World::on_pickup_arrived(VehicleId vid, TripId tid) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    TripRequest& trip = trips_[static_cast<std::size_t>(tid)];

    commit_location(v, trip.origin);
    commit_soc(v, v.soc - v.leg->dsoc);
    set_state(v, VehicleState::driving_with_passenger);
    trip.pickup_time = engine_.now();
    log_event(EventKind::trip_pickup, tid, vid, -1);

    const double duration = geo::travel_time_minutes(trip.trip_distance, cfg_.velocity_mph);
    v.leg = ActivityLeg{trip.origin,        trip.destination,
                        engine_.now(),      duration,
                        trip.trip_distance, geo::soc_drop(trip.trip_distance, cfg_.energy)};
    log_event(EventKind::leg_trip_start, tid, vid, -1, trip.trip_distance, duration, v.leg->dsoc);
    v.active_process = engine_.schedule_timeout(
        duration, [this, vid, tid] { on_dropoff(vid, tid); },
        [this, vid] {
            throw ConsistencyError("trip leg of vehicle " + std::to_string(vid) + " interrupted");
        });
}

void World::on_dropoff(VehicleId vid, TripId tid) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    TripRequest& trip = trips_[static_cast<std::size_t>(tid)];

    commit_location(v, trip.destination);
    commit_soc(v, v.soc - v.leg->dsoc);
    v.leg.reset();
    v.active_process.reset();
    set_state(v, VehicleState::idle);
    trip.completion_time = engine_.now();
    log_event(EventKind::trip_completed, tid, vid, -1);
}

// ---------------------------------------------------------------------------
// Charge pipeline
// ---------------------------------------------------------------------------

void World::send_to_charger(VehicleId vid, StationId sid, double end_soc) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    ChargingStation& s = stations_[static_cast<std::size_t>(sid)];

    const double dist = geo::corrected_distance(v.location, s.location, model_);
    const double duration = geo::travel_time_minutes(dist, cfg_.velocity_mph);
    v.leg = ActivityLeg{v.location, s.location,  engine_.now(),
                        duration,   dist,        geo::soc_drop(dist, cfg_.energy)};
    v.station = sid;
    v.charge_target = end_soc;
    s.inbound_count += 1;
    set_state(v, VehicleState::driving_to_charger);
    log_event(EventKind::to_charger_start, -1, vid, sid, dist, duration, v.leg->dsoc);

    v.active_process = engine_.schedule_timeout(
        duration, [this, vid, sid, end_soc] { on_arrived_at_charger(vid, sid, end_soc); },
        [this, vid, sid] {
            // interrupted mid-drive: commit the partial leg
            Vehicle& veh = fleet_[static_cast<std::size_t>(vid)];
            ChargingStation& st = stations_[static_cast<std::size_t>(sid)];
            const double f = veh.leg->duration_min > 0.0
                                 ? (engine_.now() - veh.leg->start_min) / veh.leg->duration_min
                                 : 0.0;
            commit_location(veh, geo::lerp(veh.leg->from, veh.leg->to, f));
            commit_soc(veh, veh.soc - f * veh.leg->dsoc);
            const double miles = f * veh.leg->distance_mi;
            st.inbound_count -= 1;
            veh.leg.reset();
            veh.station.reset();
            veh.active_process.reset();
            set_state(veh, VehicleState::idle);
            log_event(EventKind::to_charger_interrupted, -1, vid, sid, veh.soc, miles);
        });
}

void World::on_arrived_at_charger(VehicleId vid, StationId sid, double end_soc) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    ChargingStation& s = stations_[static_cast<std::size_t>(sid)];

    commit_location(v, s.location);
    commit_soc(v, v.soc - v.leg->dsoc);
    v.leg.reset();
    v.active_process.reset();
    s.inbound_count -= 1;
    set_state(v, VehicleState::waiting_for_charger);
    log_event(EventKind::to_charger_arrived, -1, vid, sid, v.soc);
    enqueue_at_charger(sid, vid, end_soc);
}

void World::enqueue_at_charger(StationId sid, VehicleId vid, double end_soc) {
    ChargingStation& s = stations_[static_cast<std::size_t>(sid)];
    s.queue.push_back(ChargeQueueEntry{vid, end_soc});
    log_event(EventKind::queue_join, -1, vid, sid);
    drain_queue(sid);
}

void World::drain_queue(StationId sid) {
    ChargingStation& s = stations_[static_cast<std::size_t>(sid)];
    while (s.state != StationState::busy && !s.queue.empty()) {
        const ChargeQueueEntry head = s.queue.front();
        s.queue.pop_front();
        s.occupancy += 1;
        station_set_busy_or_available(s);
        log_event(EventKind::queue_leave, -1, head.vehicle, sid);
        start_charging(sid, head.vehicle, head.end_soc);
    }
}

void World::start_charging(StationId sid, VehicleId vid, double end_soc) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];

    v.charging_since = engine_.now();
    v.charge_target = end_soc;
    const double duration = geo::charge_duration_minutes(v.soc, end_soc, cfg_.energy);
    set_state(v, VehicleState::charging);
    log_event(EventKind::charge_start, -1, vid, sid, v.soc, end_soc, duration);

    v.active_process = engine_.schedule_timeout(
        duration, [this, vid, sid, end_soc] { on_charge_complete(vid, sid, end_soc); },
        [this, vid, sid] {
            // interrupted mid-charge: commit the partial gain, free the post
            Vehicle& veh = fleet_[static_cast<std::size_t>(vid)];
            ChargingStation& st = stations_[static_cast<std::size_t>(sid)];
            const double minutes = engine_.now() - *veh.charging_since;
            commit_soc(veh, std::min(veh.charge_target,
                                     veh.soc + geo::soc_gain(minutes, cfg_.energy)));
            veh.charging_since.reset();
            veh.station.reset();
            veh.active_process.reset();
            st.occupancy -= 1;
            station_set_busy_or_available(st);
            set_state(veh, VehicleState::idle);
            log_event(EventKind::charge_interrupted, -1, vid, sid, veh.soc, minutes);
            drain_queue(sid);
        });
}

void World::on_charge_complete(VehicleId vid, StationId sid, double end_soc) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    ChargingStation& s = stations_[static_cast<std::size_t>(sid)];

    commit_soc(v, end_soc);
    v.charging_since.reset();
    v.station.reset();
    v.active_process.reset();
    s.occupancy -= 1;
    station_set_busy_or_available(s);
    set_state(v, VehicleState::idle);
    log_event(EventKind::charge_end, -1, vid, sid, v.soc);
    drain_queue(sid);
}

void World::interrupt_charging(VehicleId vid) {
    Vehicle& v = fleet_[static_cast<std::size_t>(vid)];
    switch (v.state) {
        case VehicleState::driving_to_charger:
        case VehicleState::charging:
            engine_.interrupt(*v.active_process);
            return;
        case VehicleState::waiting_for_charger: {
            ChargingStation& s = stations_[static_cast<std::size_t>(*v.station)];
            auto it = std::find_if(s.queue.begin(), s.queue.end(),
                                   [vid](const ChargeQueueEntry& e) { return e.vehicle == vid; });
            if (it == s.queue.end()) {
                throw ConsistencyError("waiting vehicle " + std::to_string(vid) +
                                       " missing from station queue");
            }
            s.queue.erase(it);
            log_event(EventKind::queue_leave, -1, vid, *v.station);
            v.station.reset();
            set_state(v, VehicleState::idle);
            return;
        }
        default:
            throw ConsistencyError(std::string("interrupt_charging on vehicle in state ") +
                                   to_string(v.state));
    }
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

void World::check_invariants() const {
    std::vector<int> charging_at(stations_.size(), 0);
    std::vector<int> waiting_at(stations_.size(), 0);
    std::size_t state_total = 0;

    for (const Vehicle& v : fleet_) {
        if (v.soc < -kSocSlack || v.soc > 1.0 + kSocSlack) {
            throw ConsistencyError("invariant: SoC out of [0,1]");
        }
        ++state_total;
        const bool timed = v.state == VehicleState::driving_with_passenger ||
                           v.state == VehicleState::driving_without_passenger ||
                           v.state == VehicleState::driving_to_charger ||
                           v.state == VehicleState::charging;
        if (timed && !v.active_process) {
            throw ConsistencyError("invariant: active state without a pending process");
        }
        if (v.state == VehicleState::idle &&
            (v.active_process || v.leg || v.charging_since || v.station)) {
            throw ConsistencyError("invariant: idle vehicle with residual activity");
        }
        if (v.state == VehicleState::charging) {
            charging_at[static_cast<std::size_t>(*v.station)] += 1;
        }
        if (v.state == VehicleState::waiting_for_charger) {
            waiting_at[static_cast<std::size_t>(*v.station)] += 1;
        }
    }
    if (state_total != fleet_.size()) {
        throw ConsistencyError("invariant: fleet count drifted");
    }

    for (const ChargingStation& s : stations_) {
        if (s.occupancy < 0 || s.occupancy > s.posts) {
            throw ConsistencyError("invariant: station occupancy outside [0, posts]");
        }
        if ((s.state == StationState::busy) != (s.occupancy >= s.posts)) {
            throw ConsistencyError("invariant: station busy flag inconsistent");
        }
        if (s.inbound_count < 0) {
            throw ConsistencyError("invariant: negative inbound count");
        }
        if (charging_at[static_cast<std::size_t>(s.id)] != s.occupancy) {
            throw ConsistencyError("invariant: occupancy does not match charging vehicles");
        }
        if (waiting_at[static_cast<std::size_t>(s.id)] != static_cast<int>(s.queue.size())) {
            throw ConsistencyError("invariant: queue length does not match waiting vehicles");
        }
        for (const ChargeQueueEntry& e : s.queue) {
            const Vehicle& v = fleet_[static_cast<std::size_t>(e.vehicle)];
            if (v.state != VehicleState::waiting_for_charger) {
                throw ConsistencyError("invariant: queued vehicle not in waiting state");
            }
        }
        if (cfg_.charging.alpha == 1.0 && s.inbound_count + s.occupancy > s.posts) {
            throw ConsistencyError("invariant: alpha=1 inbound+occupancy exceeds posts");
        }
    }
}

} // namespace evfleet
