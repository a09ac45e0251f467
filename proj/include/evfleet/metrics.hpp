#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evfleet::metrics {

// The event log is the authoritative record of a run: every metric below is
// computed from it alone, and events.csv is its direct serialization.

enum class EventKind : std::uint8_t {
    vehicle_init,           // vehicle; v1=soc v2=lat v3=lon
    trip_arrival,           // trip; v1=trip_distance_mi
    trip_matched,           // trip, vehicle; v1=pickup_distance_mi v2=candidates_considered
    trip_dropped,           // trip; v1 = 0 unavailable | 1 reneged
    trip_pickup,            // trip, vehicle (time is the pickup instant)
    trip_completed,         // trip, vehicle
    state_change,           // vehicle; v1=from v2=to v3=soc at commit
    leg_pickup_start,       // vehicle, trip; v1=distance v2=duration v3=dsoc
    leg_trip_start,         // vehicle, trip; v1=distance v2=duration v3=dsoc
    to_charger_start,       // vehicle, station; v1=distance v2=duration v3=dsoc
    to_charger_arrived,     // vehicle, station; v1=soc at commit
    to_charger_interrupted, // vehicle, station; v1=soc v2=miles actually driven
    queue_join,             // vehicle, station
    queue_leave,            // vehicle, station
    charge_start,           // vehicle, station; v1=soc v2=end_soc v3=duration
    charge_end,             // vehicle, station; v1=soc
    charge_interrupted,     // vehicle, station; v1=soc v2=minutes charged
    adaptive_d,             // v1=new d (emitted at each review boundary)
};

const char* to_string(EventKind k);

struct Event {
    double time = 0.0;
    EventKind kind{};
    std::int64_t trip = -1;
    std::int32_t vehicle = -1;
    std::int32_t station = -1;
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;
};

class EventLog {
public:
    void append(Event e) { events_.push_back(e); }
    std::span<const Event> events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    void reserve(std::size_t n) { events_.reserve(n); }

private:
    std::vector<Event> events_;
};

struct SummaryMetrics {
    std::int64_t arrivals = 0;
    std::int64_t completed = 0;
    std::int64_t dropped_unavailable = 0;
    std::int64_t dropped_reneged = 0;
    std::int64_t charger_trips = 0; // drive-to-charger starts
    std::optional<double> service_level;
    std::optional<double> workload_served;
    std::optional<double> avg_trip_time_min;
    std::optional<double> avg_trip_distance_mi;
    std::optional<double> avg_pickup_time_min;
    std::optional<double> avg_time_to_charger_min;
    double trips_to_charger_per_car_per_hour = 0.0;
    double time_avg_soc = 0.0;
};

/// Fraction of arrivals completed; absent when there were no arrivals.
std::optional<double> service_level(const EventLog& log);

/// Fraction of requested miles completed; absent when total miles are zero.
std::optional<double> workload_served(const EventLog& log);

double trips_to_charger_rate(const EventLog& log, int fleet_size, double horizon_minutes);

/// Mean over fixed-resolution samples of the fleet-mean SoC. Between commits
/// the SoC is interpolated along the vehicle's current activity.
double time_avg_soc(const EventLog& log, int fleet_size, double resolution_min);

SummaryMetrics summarize(const EventLog& log, int fleet_size, double horizon_minutes,
                         double resolution_min);

struct StateTimeseries {
    double resolution_min = 1.0;
    std::vector<double> time;
    // counts per VehicleState, indexed by the enum's integer value
    std::array<std::vector<int>, 6> state_counts;
    std::vector<double> avg_soc;
    std::vector<int> potential_trips;
};

StateTimeseries state_timeseries(const EventLog& log, int fleet_size, double resolution_min,
                                 double velocity_mph);

struct PickupHistogram {
    double bin_width_min = 1.0;
    std::vector<std::int64_t> counts; // bin k covers [k*w, (k+1)*w)
};

PickupHistogram pickup_histogram(const EventLog& log, double bin_width_min);

void write_events_csv(const EventLog& log, std::ostream& os);
void write_timeseries_csv(const StateTimeseries& ts, int fleet_size, std::ostream& os);
void write_pickup_hist_csv(const PickupHistogram& h, std::ostream& os);
std::string summary_to_json(const SummaryMetrics& m);

} // namespace evfleet::metrics
