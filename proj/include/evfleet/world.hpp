#pragma once

#include <memory>
#include <span>
#include <vector>

#include "evfleet/charging.hpp"
#include "evfleet/config.hpp"
#include "evfleet/dispatch.hpp"
#include "evfleet/fleet.hpp"
#include "evfleet/geo_kernels.hpp"
#include "evfleet/metrics.hpp"
#include "evfleet/sim_kernel.hpp"
#include "evfleet/trips.hpp"

namespace evfleet {

/// One simulation world: the engine, the fleet, the stations, the arrival
/// stream, and the process scripts that tie them together. A world is owned
/// by a single thread for its whole life.
///
/// Every customer arrival triggers, in order: the matching decision (with a
/// charging interrupt when a non-idle vehicle is selected), then the charging
/// sweep that sends eligible idle vehicles toward stations. Locations and
/// SoCs commit only at process boundaries (leg completions, charge ends,
/// interrupts); in between, the committed state is stale by design.
class World {
public:
    World(const ScenarioConfig& cfg, ingest::TripTable table,
          std::vector<geo::GeoPoint> vehicle_locations,
          std::vector<geo::GeoPoint> charger_locations, Rng rng);

    /// Schedules the arrival stream and runs the event loop until it drains.
    /// Arrivals stop at the horizon; in-flight trips and charges complete, so
    /// every arrival ends the run served or dropped.
    sim::KernelStats run();

    void enable_invariant_checks(bool on) { invariant_checks_ = on; }

    double now() const { return engine_.now(); }
    const metrics::EventLog& log() const { return log_; }
    std::span<const Vehicle> fleet() const { return fleet_; }
    std::span<const ChargingStation> stations() const { return stations_; }
    std::span<const TripRequest> trips() const { return trips_; }
    const ScenarioConfig& config() const { return cfg_; }
    int adaptive_d() const;

    /// SoC the vehicle would commit if its current activity were interrupted
    /// right now (mid-charge gain or mid-drive loss applied).
    double effective_soc(const Vehicle& v) const;
    /// Position the vehicle would commit if interrupted right now.
    geo::GeoPoint effective_location(const Vehicle& v) const;

    /// Full consistency sweep; throws ConsistencyError on any violation.
    void check_invariants() const;

private:
    // arrival handling
    void handle_arrival(std::size_t index);
    dispatch::Outcome match(const TripRequest& trip);
    void charging_sweep();

    // process scripts
    void start_trip(VehicleId v, TripId t, double pickup_distance);
    void on_pickup_arrived(VehicleId v, TripId t);
    void on_dropoff(VehicleId v, TripId t);
    void send_to_charger(VehicleId v, StationId s, double end_soc);
    void on_arrived_at_charger(VehicleId v, StationId s, double end_soc);
    void enqueue_at_charger(StationId s, VehicleId v, double end_soc);
    void drain_queue(StationId s);
    void start_charging(StationId s, VehicleId v, double end_soc);
    void on_charge_complete(VehicleId v, StationId s, double end_soc);
    void interrupt_charging(VehicleId v);

    // helpers
    void set_state(Vehicle& v, VehicleState to);
    void commit_location(Vehicle& v, const geo::GeoPoint& p);
    void commit_soc(Vehicle& v, double soc);
    double pickup_distance(const Vehicle& v, const geo::GeoPoint& origin) const;
    void build_candidates(const TripRequest& trip);
    void log_event(metrics::EventKind kind, TripId trip, VehicleId vehicle, StationId station,
                   double v1 = 0.0, double v2 = 0.0, double v3 = 0.0);

    ScenarioConfig cfg_;
    geo::DistanceModel model_;
    charging::ThresholdSchedule schedule_;
    double day_origin_ = 0.0;
    Rng rng_;
    sim::Engine engine_;
    metrics::EventLog log_;

    std::vector<Vehicle> fleet_;
    std::vector<ChargingStation> stations_;
    std::vector<TripRequest> trips_;
    std::size_t next_arrival_ = 0;

    geo::TrigTable fleet_trig_;
    geo::TrigTable station_trig_;

    std::unique_ptr<dispatch::AdaptiveDController> adaptive_;
    std::int64_t arrivals_handled_ = 0;

    // scratch buffers reused across arrivals
    std::vector<double> rank_scratch_;
    std::vector<double> station_dist_scratch_;
    std::vector<dispatch::Candidate> candidates_;

    bool invariant_checks_ = false;
};

} // namespace evfleet
